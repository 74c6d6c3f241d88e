#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "nestctl/controllers.hpp"
#include "nestctl/rng.hpp"

using namespace nestctl;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

MatrixField isotropic(double rho) {
  return [rho](const Vec& y) {
    const int n = int(y.size());
    return Mat(std::max(1.0 - y.norm(), 0.0) * rho * Mat::Identity(n, n));
  };
}

ControllerConfig base_cfg(int T, double L, double rho, std::uint64_t seed = 1) {
  ControllerConfig cfg;
  cfg.horizon = T;
  cfg.L = L;
  cfg.rho = rho;
  cfg.gamma = 1.0;
  cfg.G = 0.5;
  cfg.seed = seed;
  return cfg;
}

double grid_regret(const TrajectoryLog& log, const LossStream& losses, double R) {
  double realized = 0.0;
  for (const auto& row : log.rows) realized += row.loss;
  double best = 1e18;
  const int T = int(log.rows.size());
  for (double x = -R; x <= R; x += 0.01)
    for (double y = -R; y <= R; y += 0.01) {
      Vec c = vec2(x, y);
      if (c.norm() > R) continue;
      best = std::min(best, losses.total(c, T));
    }
  return realized - best;
}

}  // namespace

TEST_CASE("oen_ftrl calibration reproduces the closed forms") {
  auto model = make_example1(2, 0.5, isotropic(0.5));
  const auto cal = oen_ftrl_calibrate(model, 1.0, 0.5, base_cfg(10000, 1.0, 0.5));
  CHECK(cal.eta == doctest::Approx(0.0040824829).epsilon(1e-6));
  CHECK(cal.delta == doctest::Approx(0.0081649658).epsilon(1e-6));
  CHECK(cal.regret_bound == doctest::Approx(244.94897).epsilon(1e-6));
}

TEST_CASE("oen_ftrl: loss minimized at the origin keeps the state pinned") {
  auto model = make_example1(2, 0.5, isotropic(0.5));
  auto losses = norm_loss(Vec::Zero(2), 1);
  const TrajectoryLog log = oen_ftrl_run(model, *losses, base_cfg(200, 1.0, 0.5));
  double total = 0.0;
  for (const auto& row : log.rows) total += row.loss;
  CHECK(total == doctest::Approx(0.0));
  CHECK_FALSE(log.failed_feasibility);
}

TEST_CASE("oen_ftrl: regret within the bound and feasibility on every round") {
  auto model = make_example1(2, 0.5, isotropic(0.5));
  auto losses = norm_loss(vec2(0.5, 0.0), 1);
  for (int T : {256, 1024}) {
    auto cfg = base_cfg(T, 1.0, 0.5);
    const TrajectoryLog log = oen_ftrl_run(model, *losses, cfg);
    const auto cal = oen_ftrl_calibrate(model, 1.0, 0.5, cfg);
    CHECK(grid_regret(log, *losses, 1.0) <= cal.regret_bound);
    Vec prev = Vec::Zero(2);
    for (const auto& row : log.rows) {
      CHECK((row.target - prev).norm() <= cal.r * cal.delta * 0.5 + 1e-12);
      CHECK(row.residual <= 1e-8);
      prev = row.state;
    }
    // FTRL step bound on consecutive targets.
    for (size_t t = 0; t + 1 < log.rows.size(); ++t)
      CHECK((log.rows[t + 1].target - log.rows[t].target).norm() <= log.step_bound + 1e-12);
  }
}

TEST_CASE("oen_ftrl_ap with a silent adversary matches oen_ftrl at alpha*rho") {
  auto model = make_exact_weak(ConvexBody::ball(2, 1.0), 0.5);
  auto losses = norm_loss(vec2(0.3, 0.2), 1);
  auto cfg = base_cfg(300, 1.0, 0.5);
  cfg.alpha = 0.5;
  const TrajectoryLog ap =
      oen_ftrl_ap_run(model, *losses, DisturbanceAdversary::none(), cfg);

  auto plain_cfg = cfg;
  plain_cfg.rho = 0.25;  // alpha * rho
  const TrajectoryLog plain = oen_ftrl_run(model, *losses, plain_cfg);
  REQUIRE(ap.rows.size() == plain.rows.size());
  for (size_t t = 0; t < ap.rows.size(); ++t)
    CHECK((ap.rows[t].target - plain.rows[t].state).norm() <= 1e-9);
}

TEST_CASE("oen_ftrl_ap shadow consistency holds under any admissible adversary") {
  auto model = make_exact_weak(ConvexBody::ball(2, 1.0), 0.5);
  auto losses = norm_loss(vec2(0.3, 0.2), 1);
  auto cfg = base_cfg(300, 1.0, 0.5);
  cfg.alpha = 0.5;
  // Per-round cap fraction (rho - alpha rho)/(1+rho) = 1/6.
  const TrajectoryLog pushed = oen_ftrl_ap_run(
      model, *losses, DisturbanceAdversary::radial_push(0.5, 0.5, 5.0), cfg);
  auto plain_cfg = cfg;
  plain_cfg.rho = 0.25;
  const TrajectoryLog plain = oen_ftrl_run(model, *losses, plain_cfg);
  for (size_t t = 0; t < pushed.rows.size(); ++t)
    CHECK((pushed.rows[t].target - plain.rows[t].state).norm() <= 1e-9);
  // Disturbed states differ from the shadow.
  CHECK(pushed.rows[4].disturbance.norm() > 1e-3);
}

TEST_CASE("oen_ftrl_ap: cap formula, abort-by-default, audited regret") {
  auto model = make_exact_weak(ConvexBody::ball(2, 1.0), 0.5);
  auto losses = norm_loss(Vec::Zero(2), 1);
  auto cfg = base_cfg(1000, 1.0, 0.5);
  cfg.alpha = 0.5;

  // Cap fraction (rho - alpha*rho)/(1+rho) = 1/6 of pi(undisturbed).
  auto adv = DisturbanceAdversary::radial_push(0.5, 0.5, 5.0);
  const Vec w = adv.next(vec2(0.0, 0.0), model.state_space);
  CHECK(w.norm() == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  const TrajectoryLog log = oen_ftrl_ap_run(
      model, *losses, DisturbanceAdversary::radial_push(0.5, 0.5, 5.0), cfg);
  const auto cal = oen_ftrl_calibrate(model, 1.0, 0.25, cfg);
  CHECK(grid_regret(log, *losses, 1.0) <= cal.regret_bound + 1.0 * 5.0);
  CHECK(log.adversary_spend <= 5.0 + 1e-12);

  // A boundary-push adversary exceeds the AP contract cap: aborted by
  // default, tolerated when the config says so.
  CHECK_THROWS_AS(oen_ftrl_ap_run(model, *losses,
                                  DisturbanceAdversary::boundary_push(0.0, 0.5), cfg),
                  std::runtime_error);
  cfg.allow_cap_violation = true;
  const TrajectoryLog tolerated = oen_ftrl_ap_run(
      model, *losses, DisturbanceAdversary::boundary_push(0.0, 0.5), cfg);
  CHECK(tolerated.cap_violation);
}

TEST_CASE("oen_ftrl_uap: exact tracking without disturbances, rejection threshold") {
  auto model = make_exact_strong(ConvexBody::ball(2, 1.0), 0.5);
  auto losses = norm_loss(vec2(0.4, 0.1), 1);
  auto cfg = base_cfg(400, 1.0, 0.5);
  const TrajectoryLog log = oen_ftrl_uap_run(model, *losses, DisturbanceAdversary::none(), cfg);
  for (const auto& row : log.rows) {
    CHECK(row.residual <= 1e-9);
    CHECK((row.state - row.target).norm() <= 1e-9);
  }

  // Horizons too small for eta*L/gamma <= rho*alpha are rejected...
  auto tiny = base_cfg(4, 1.0, 0.02);
  CHECK_THROWS_AS(oen_ftrl_uap_run(model, *losses, DisturbanceAdversary::none(), tiny),
                  std::invalid_argument);
  // ...unless the config asks for the capped step size.
  tiny.cap_eta = true;
  CHECK_NOTHROW(oen_ftrl_uap_run(model, *losses, DisturbanceAdversary::none(), tiny));
}

TEST_CASE("oen_ftrl_uap on the 1-D pinning instance: regret sandwich") {
  const double rho = 0.25, L = 1.0, R = 1.0, E = 10.0, alpha = 0.1;
  const int T = 1000;
  auto model = make_exact_strong(ConvexBody::interval(-1.0, 1.0), rho);
  auto losses = ramp_loss(L, R);
  auto cfg = base_cfg(T, L, rho);
  cfg.alpha = alpha;
  const TrajectoryLog log =
      oen_ftrl_uap_run(model, *losses, DisturbanceAdversary::pin1d(-1.0, E), cfg);
  double realized = 0.0;
  for (const auto& row : log.rows) realized += row.loss;
  // Comparator y* = R has zero loss, so the realized total is the regret.
  CHECK(realized >= std::min(2.0 * L * R * E / rho, 2.0 * double(T) * L * R) - 1e-6);
  CHECK(realized <= 2.0 * std::sqrt(double(T) * 0.5) + 2.0 * L * R * E / ((1.0 - alpha) * rho) +
                        1e-6);
}

TEST_CASE("oen_ftrl_uap deviation dichotomy around the reachability radius") {
  const double rho = 0.25, alpha = 0.1;
  auto model = make_exact_strong(ConvexBody::interval(-1.0, 1.0), rho);
  auto losses = ramp_loss(1.0, 1.0);
  auto cfg = base_cfg(1000, 1.0, rho);
  cfg.alpha = alpha;
  const TrajectoryLog log =
      oen_ftrl_uap_run(model, *losses, DisturbanceAdversary::pin1d(-1.0, 10.0), cfg);
  for (size_t t = 0; t + 1 < log.rows.size(); ++t) {
    const double deviation = (log.rows[t].state - log.rows[t].target).norm();
    if (log.rows[t + 1].residual <= 1e-8)
      CHECK(deviation <= (1.0 + alpha) * rho + 1e-9);
    else
      CHECK(deviation > (1.0 - alpha) * rho - 1e-9);
  }
}

TEST_CASE("probing_oco: noiseless estimation recovers the constant dynamics") {
  Mat A(2, 2);
  A << 1.0, 0.0, 0.0, 2.0;
  auto model = make_constant_affine(A, Vec::Zero(2), ConvexBody::ball(2, 1.0), 2.0);
  auto losses = norm_loss(vec2(0.6, 0.3), 2);
  auto cfg = base_cfg(4096, 3.4, 1.0);
  cfg.alpha = 0.5;
  cfg.probe_eps = 0.01;
  cfg.x1 = Vec::Zero(2);
  const TrajectoryLog log = probing_oco_run(model, *losses, cfg);
  REQUIRE(!log.fit_A.empty());
  // Noiseless linear fits recover A up to the 1e-10 ridge; the criterion
  // envelope 10*eps holds for every refit.
  CHECK((log.fit_A.front() - A).norm() <= 1e-5);
  for (const Mat& fit : log.fit_A) CHECK((fit - A).norm() <= 10.0 * cfg.probe_eps);
  for (const Vec& b : log.fit_b) CHECK(b.norm() <= 10.0 * cfg.probe_eps);

  // Missing x1 is rejected.
  auto broken = cfg;
  broken.x1 = Vec();
  CHECK_THROWS_AS(probing_oco_run(model, *losses, broken), std::invalid_argument);
}

TEST_CASE("probing_oco converges to the loss minimizer") {
  Mat A(2, 2);
  A << 1.0, 0.0, 0.0, 2.0;
  auto model = make_constant_affine(A, Vec::Zero(2), ConvexBody::ball(2, 1.0), 2.0);
  const Vec p = vec2(0.6, 0.3);
  auto losses = norm_loss(p, 2);
  auto cfg = base_cfg(4096, 3.4, 1.0);
  cfg.alpha = 0.5;
  cfg.probe_eps = 0.01;
  cfg.x1 = Vec::Zero(2);
  const TrajectoryLog log = probing_oco_run(model, *losses, cfg);
  // The tail of the trajectory sits near p up to the probe scale.
  double tail = 0.0;
  for (size_t t = log.rows.size() - 50; t < log.rows.size(); ++t)
    tail = std::max(tail, (log.rows[t].state - p).norm());
  CHECK(tail <= 0.1);
}

TEST_CASE("nested_bco: calibration formulas, step audit, rejection") {
  auto model = make_example1(2, 0.5, isotropic(0.5));
  auto c_loss = linear_loss(vec2(1.0, 0.0));

  // T = 10^4, r = R = 1, rho = 0.5: probe 0.1, delta 0.8, eta 1/(4*10^3).
  auto cfg = base_cfg(10000, 1.0, 0.5, 5);
  {
    const TrajectoryLog log = nested_bco_run(model, *c_loss, cfg);
    CHECK(log.delta == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(log.eta == doctest::Approx(1.0 / 4000.0).epsilon(1e-9));
    const double probe = std::pow(10000.0, -0.25);
    const double step_cap = 2.0 * probe + log.eta * 2.0 * 1.0 / probe;
    for (size_t t = 0; t + 1 < log.rows.size(); ++t)
      CHECK((log.rows[t + 1].target - log.rows[t].target).norm() <= step_cap + 1e-12);
    CHECK(step_cap <= log.r * log.delta * 0.5 + 1e-12);
    for (const auto& row : log.rows) CHECK(row.residual <= 1e-8);
  }

  // Horizon too small for the configured rho: delta >= 1 is rejected.
  auto small = base_cfg(256, 1.0, 0.5, 5);
  CHECK_THROWS_AS(nested_bco_run(model, *c_loss, small), std::invalid_argument);
}

TEST_CASE("nested_bco is deterministic in the seed and responsive to it") {
  auto model = make_example1(2, 1.0, isotropic(1.0));
  auto losses = linear_loss(vec2(1.0, 0.0));
  auto cfg = base_cfg(2048, 1.0, 1.0, 9);
  const TrajectoryLog a = nested_bco_run(model, *losses, cfg);
  const TrajectoryLog b = nested_bco_run(model, *losses, cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t t = 0; t < a.rows.size(); ++t) {
    CHECK(a.rows[t].state == b.rows[t].state);  // bitwise
    CHECK(a.rows[t].loss == b.rows[t].loss);
  }
  auto cfg2 = cfg;
  cfg2.seed = 10;
  const TrajectoryLog c = nested_bco_run(model, *losses, cfg2);
  double diff = 0.0;
  for (size_t t = 0; t < a.rows.size(); ++t) diff += (a.rows[t].state - c.rows[t].state).norm();
  CHECK(diff > 1e-6);
}

TEST_CASE("state targeting reaches one-step targets and follows the contraction") {
  auto model = make_prop2_instance(2);
  const Vec y_hat = vec2(0.5, 0.0);
  // One-step reach: target within rho*pi(0) = 1.
  const Vec x = state_targeting_policy_step(model, Vec::Zero(2), ConvexBody(), y_hat);
  CHECK((model.eval(x, Vec::Zero(2), 1) - y_hat).norm() <= 1e-9);

  // From further away the distance decreases by rho*pi(y) per round.
  auto weak = make_exact_weak(ConvexBody::ball(2, 1.0), 0.5);
  Vec y = Vec::Zero(2);
  double dist = y_hat.norm();
  for (int t = 1; t <= 20; ++t) {
    const Vec xt = state_targeting_policy_step(weak, y, ConvexBody(), y_hat, t);
    y = weak.eval(xt, y, t);
    const double reach = 0.5 * (1.0 - (y - (y_hat - y_hat)).norm());  // pi at previous point
    (void)reach;
    const double new_dist = (y - y_hat).norm();
    CHECK(new_dist <= std::max(0.0, dist - 0.5 * 0.25) + 1e-9);  // pi >= 0.5 en route
    dist = new_dist;
    if (dist < 1e-12) break;
  }
  CHECK(dist <= 1e-9);
}

TEST_CASE("state targeting equals the closed-form policy on linear dynamics") {
  // D = proj(y + Ax) with A = I: P(y) = A^{-1}(y_hat - y).
  auto model = make_prop2_instance(2);
  CounterRng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec y = 0.5 * rng.unit_ball(2);
    const Vec y_hat = 0.4 * rng.unit_ball(2);
    if ((y_hat - y).norm() > (1.0 - y.norm())) continue;  // inside one-step reach
    const Vec x = state_targeting_policy_step(model, y, ConvexBody(), y_hat);
    CHECK((x - (y_hat - y)).norm() <= 1e-8);
  }
}

TEST_CASE("linear policies stall on the projection instance") {
  auto model = make_prop2_instance(2);
  const Vec p = vec2(0.5, 0.0);
  auto losses = norm_loss(p, 2);
  const int T = 100;
  CounterRng rng(41);
  std::vector<Mat> Ks = {Mat::Zero(2, 2), Mat::Identity(2, 2)};
  for (int i = 0; i < 5; ++i) {
    Mat K(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) K(r, c) = rng.gaussian();
    Ks.push_back(K);
  }
  for (const Mat& K : Ks) {
    const TrajectoryLog log = linear_policy_run(model, *losses, K, T);
    double total = 0.0;
    for (const auto& row : log.rows) {
      CHECK(row.state.norm() == doctest::Approx(0.0));
      total += row.loss;
    }
    CHECK(total == doctest::Approx(double(T) * p.squaredNorm()));  // regret = T ||p||^2
  }
  // State targeting on the same instance: sublinear regret.
  const TrajectoryLog st = state_targeting_run(model, *losses, p, T);
  double st_total = 0.0;
  for (const auto& row : st.rows) st_total += row.loss;
  CHECK(st_total <= 10.0 * std::sqrt(double(T)));
}

TEST_CASE("zero-horizon runs return empty logs") {
  auto model = make_prop2_instance(2);
  auto losses = norm_loss(vec2(0.1, 0.0), 1);
  CHECK(oen_ftrl_run(model, *losses, base_cfg(0, 1.0, 0.5)).rows.empty());
}
