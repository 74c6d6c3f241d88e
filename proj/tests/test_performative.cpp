#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "nestctl/controllers.hpp"
#include "nestctl/performative.hpp"
#include "nestctl/rng.hpp"

using namespace nestctl;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

PerformativeEnv basic_env(double theta = 0.5, double kappa = 0.8, std::uint64_t seed = 7) {
  Mat M(2, 2);
  M << 1.0, 0.2, 0.0, 1.0;
  return make_performative_env(2, theta, kappa, M, vec2(0.05, 0.0), 0.1 * Mat::Identity(2, 2),
                               1.0, 0.5, seed);
}

PpLoss linear_loss_in_z(const Vec& c) {
  PpLoss loss;
  loss.value = [c](const Vec&, const Vec& z) { return c.dot(z); };
  loss.grad_x = [](const Vec& x, const Vec&) { return Vec(Vec::Zero(x.size())); };
  loss.grad_z = [c](const Vec&, const Vec&) { return c; };
  loss.Lz = c.norm();
  return loss;
}

PpLoss mixed_loss() {
  // f(x, z) = <c, z> + 0.3 ||x - x0||, convex and Lipschitz in both arguments.
  Vec c = vec2(0.8, 0.4);
  Vec x0 = vec2(0.2, -0.1);
  PpLoss loss;
  loss.value = [c, x0](const Vec& x, const Vec& z) { return c.dot(z) + 0.3 * (x - x0).norm(); };
  loss.grad_x = [x0](const Vec& x, const Vec&) {
    const Vec d = x - x0;
    const double n = d.norm();
    return n < 1e-14 ? Vec(Vec::Zero(2)) : Vec(0.3 / n * d);
  };
  loss.grad_z = [c](const Vec&, const Vec&) { return c; };
  loss.Lz = 1.0;
  return loss;
}

}  // namespace

TEST_CASE("surrogate of a z-linear loss equals the sample-mean form exactly") {
  const PerformativeEnv env = basic_env();
  const Vec c = vec2(0.7, -0.2);
  const PpLoss loss = linear_loss_in_z(c);
  const Vec y = vec2(0.3, 0.1);
  const auto [value, grad] = pp_surrogate_loss(env, loss, y, 3, 4000);
  Vec mean_noise = Vec::Zero(2);
  for (const Vec& xi : env.noise_samples(3, 4000)) mean_noise += xi;
  mean_noise /= 4000.0;
  CHECK(value == doctest::Approx(c.dot(y + mean_noise)).epsilon(1e-12));
  CHECK((grad - c).norm() <= 1e-12);
  // The sample mean sits near mu, so the value is <c, y + mu> up to MC noise.
  CHECK(std::abs(value - c.dot(y + env.mu)) <= 5e-3);
}

TEST_CASE("surrogate gradient matches central finite differences under CRN") {
  const PerformativeEnv env = basic_env();
  const PpLoss loss = mixed_loss();
  const Vec y = vec2(0.25, -0.15);
  const int samples = 100000;
  const auto [value, grad] = pp_surrogate_loss(env, loss, y, 5, samples);
  (void)value;
  const double h = 1e-4;
  for (int i = 0; i < 2; ++i) {
    Vec yp = y, ym = y;
    yp[i] += h;
    ym[i] -= h;
    const double fp = pp_surrogate_loss(env, loss, yp, 5, samples).first;
    const double fm = pp_surrogate_loss(env, loss, ym, 5, samples).first;
    CHECK(std::abs((fp - fm) / (2.0 * h) - grad[i]) <= 1e-3);
  }
}

TEST_CASE("identity map with z-independent loss: surrogate equals the loss") {
  Mat I2 = Mat::Identity(2, 2);
  PerformativeEnv env = make_performative_env(2, 0.5, 0.8, I2, Vec::Zero(2),
                                              0.05 * Mat::Identity(2, 2), 1.0, 0.5, 9);
  PpLoss loss;
  const Vec x0 = vec2(0.1, 0.2);
  loss.value = [x0](const Vec& x, const Vec&) { return (x - x0).squaredNorm(); };
  loss.grad_x = [x0](const Vec& x, const Vec&) { return Vec(2.0 * (x - x0)); };
  loss.grad_z = [](const Vec&, const Vec&) { return Vec(Vec::Zero(2)); };
  loss.Lz = 2.0;
  const Vec y = vec2(0.3, -0.2);
  const auto [value, grad] = pp_surrogate_loss(env, loss, y, 1, 500);
  CHECK(value == doctest::Approx((y - x0).squaredNorm()).epsilon(1e-12));
  CHECK((grad - 2.0 * (y - x0)).norm() <= 1e-12);
}

TEST_CASE("surrogate difference quotients respect the (1+S) Lz envelope") {
  const PerformativeEnv env = basic_env();
  const PpLoss loss = mixed_loss();
  const double cap = (1.0 + env.S) * loss.Lz;
  CounterRng rng(31);
  for (int i = 0; i < 100; ++i) {
    const Vec a = 0.8 * rng.unit_ball(2);
    const Vec b = 0.8 * rng.unit_ball(2);
    if ((a - b).norm() < 1e-6) continue;
    const double fa = pp_surrogate_loss(env, loss, a, 2, 2000).first;
    const double fb = pp_surrogate_loss(env, loss, b, 2, 2000).first;
    CHECK(std::abs(fa - fb) / (a - b).norm() <= cap + 1e-6);
  }
}

TEST_CASE("update map: stable classifiers are fixed points, actions invert exactly") {
  const PerformativeEnv env = basic_env();
  CounterRng rng(37);
  for (int i = 0; i < 50; ++i) {
    const Vec x = rng.unit_ball(2);
    const Vec stable = env.stable_state(x);
    CHECK((env.update_map(x, stable) - stable).norm() <= 1e-12);
  }
  DynamicsModel model = pp_dynamics_model(env);
  for (int i = 0; i < 50; ++i) {
    const Vec y = 0.8 * rng.unit_ball(2);
    const double reach = env.rho * (1.0 - y.norm());
    const Vec target = y + 0.9 * reach * rng.unit_sphere(2);
    CHECK(nonconvex_oracle(model, y, target).residual <= 1e-9);
  }
}

TEST_CASE("true-loss gap: stationary runs decay geometrically, theta=1 collapses the mixture") {
  const PpLoss loss = mixed_loss();
  {
    // Stationary at the origin: every round's distribution equals y0 + xi, so
    // the measured gap is the single-round inverse-map term only.
    const PerformativeEnv env = basic_env(0.5, 0.8, 21);
    const int T = 12;
    std::vector<Vec> actions(T, Vec::Zero(2));
    std::vector<Vec> states(T, Vec::Zero(2));
    const PpGapAudit audit = pp_true_loss_gap(env, loss, actions, states, 0.0, 1e-9, 3000);
    for (double g : audit.gap) CHECK(g <= 0.3 * 0.2 + 1e-9);  // Lz_x * ||x - s^{-1}(0)||
    CHECK(audit.max_violation <= 0.0);
  }
  {
    // theta = 1: p_t = y_t + xi exactly; the gap is the inverse-mapping term.
    const PerformativeEnv env = basic_env(1.0, 0.8, 22);
    const int T = 10;
    std::vector<Vec> actions, states;
    CounterRng rng(43);
    Vec y = Vec::Zero(2);
    DynamicsModel model = pp_dynamics_model(env);
    for (int t = 1; t <= T; ++t) {
      const Vec x = 0.3 * rng.unit_ball(2);
      y = model.eval(x, y, t);
      actions.push_back(x);
      states.push_back(y);
    }
    const PpGapAudit audit = pp_true_loss_gap(env, loss, actions, states, /*max_step=*/2.0,
                                              /*mc_tol=*/1e-6, 3000);
    for (int t = 0; t < T; ++t) {
      const double direct =
          loss.Lz * (actions[t] - env.inverse_map(states[t])).norm() + 1e-9;
      CHECK(audit.gap[t] <= direct);
    }
  }
}

TEST_CASE("oen_ftrl over the surrogate keeps the audited gap within its bound") {
  const PerformativeEnv env = basic_env(0.5, 0.8, 23);
  const PpLoss loss = mixed_loss();
  DynamicsModel model = pp_dynamics_model(env);
  PerformativeEnv env_small = env;
  env_small.sample_count = 1500;
  auto stream = pp_surrogate_stream(env_small, loss);
  ControllerConfig cfg;
  cfg.horizon = 60;
  cfg.L = (1.0 + env.S) * loss.Lz;
  cfg.rho = env.rho;
  cfg.G = 0.5;
  cfg.seed = 3;
  const TrajectoryLog log = oen_ftrl_run(model, *stream, cfg);
  CHECK_FALSE(log.failed_feasibility);

  std::vector<Vec> actions, states;
  double max_step = 0.0;
  Vec prev = Vec::Zero(2);
  for (const auto& row : log.rows) {
    actions.push_back(row.action);
    states.push_back(row.state);
    max_step = std::max(max_step, (row.state - prev).norm());
    prev = row.state;
  }
  const PpGapAudit audit = pp_true_loss_gap(env, loss, actions, states, max_step, 5e-3, 2000);
  CHECK(audit.max_violation <= 0.0);
}
