#include "nestctl/performative.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "nestctl/rng.hpp"

namespace nestctl {

std::vector<Vec> PerformativeEnv::noise_samples(int t, int count) const {
  CounterRng rng(seed + 0x7070ULL * std::uint64_t(t), 0x7869);
  std::vector<Vec> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(mu + noise_scale * rng.gaussian_vector(n));
  return out;
}

PerformativeEnv make_performative_env(int n, double theta, double kappa, Mat M, Vec mu,
                                      Mat noise_scale, double state_radius, double rho,
                                      std::uint64_t seed) {
  PerformativeEnv env;
  env.n = n;
  env.theta = theta;
  env.kappa = kappa;
  env.M = std::move(M);
  Eigen::FullPivLU<Mat> lu(env.M);
  if (!lu.isInvertible()) throw std::invalid_argument("performative env: s must be invertible");
  env.M_inv = lu.inverse();
  Eigen::JacobiSVD<Mat> svd(env.M_inv);
  env.S = svd.singularValues()(0);
  env.mu = std::move(mu);
  env.noise_scale = std::move(noise_scale);
  env.state_radius = state_radius;
  env.rho = rho;
  env.seed = seed;
  // Inverse action map X(y, y*) = M^{-1}(y + (y* - y)/kappa).
  env.L_y = env.S * std::abs(1.0 - 1.0 / kappa);
  // Action radius large enough that every weakly reachable target has an
  // exact action: ||M x|| = ||y + (y* - y)/kappa|| <= R + (rho R)/kappa.
  Eigen::JacobiSVD<Mat> svdM(env.M);
  const double smin = svdM.singularValues()(svdM.singularValues().size() - 1);
  env.action_radius = 2.0 * (state_radius + rho * state_radius / kappa) / smin;
  return env;
}

std::pair<double, Vec> pp_surrogate_loss(const PerformativeEnv& env, const PpLoss& loss,
                                         const Vec& y, int t, int sample_count) {
  const int count = sample_count > 0 ? sample_count : env.sample_count;
  const Vec x = env.inverse_map(y);
  double value = 0.0;
  Vec grad = Vec::Zero(env.n);
  const std::vector<Vec> noise = env.noise_samples(t, count);
  for (const Vec& xi : noise) {
    const Vec z = y + xi;
    value += loss.value(x, z);
    grad += env.M_inv.transpose() * loss.grad_x(x, z) + loss.grad_z(x, z);
  }
  return {value / double(count), grad / double(count)};
}

DynamicsModel pp_dynamics_model(const PerformativeEnv& env) {
  DynamicsModel m;
  m.name = "performative";
  m.state_space = ConvexBody::ball(env.n, env.state_radius);
  m.action_space = ConvexBody::ball(env.n, env.action_radius);
  m.rho = env.rho;
  m.mode = DynamicsModel::Mode::weak;
  PerformativeEnv env_copy = env;
  const ConvexBody Y = m.state_space;
  m.evaluator = [env_copy, Y](const Vec& x, const Vec& y, int) {
    return Y.project(env_copy.update_map(x, y));
  };
  m.custom_solver = [env_copy](const Vec& y, const Vec& target, int) -> SolveResult {
    const Vec x = env_copy.M_inv * (y + (target - y) / env_copy.kappa);
    return {x, 0.0};
  };
  return m;
}

LossStreamPtr pp_surrogate_stream(const PerformativeEnv& env, const PpLoss& loss) {
  PerformativeEnv env_copy = env;
  PpLoss loss_copy = loss;
  auto value = [env_copy, loss_copy](int t, const Vec& y) {
    return pp_surrogate_loss(env_copy, loss_copy, y, t).first;
  };
  auto grad = [env_copy, loss_copy](int t, const Vec& y) {
    return pp_surrogate_loss(env_copy, loss_copy, y, t).second;
  };
  const double lip = (1.0 + env.S) * loss.Lz;
  return functional_loss(value, grad, lip, lip, 1.0, false);
}

PpGapAudit pp_true_loss_gap(const PerformativeEnv& env, const PpLoss& loss,
                            const std::vector<Vec>& actions, const std::vector<Vec>& states,
                            double max_step, double mc_tol, int sample_count) {
  PpGapAudit audit;
  const int T = int(actions.size());
  const std::vector<Vec> noise = env.noise_samples(0, sample_count);

  auto expected_at = [&](const Vec& x, const Vec& base) {
    double v = 0.0;
    for (const Vec& xi : noise) v += loss.value(x, base + xi);
    return v / double(noise.size());
  };

  // M bound for the geometric tail: the largest deviation of the round-0
  // distribution term from the current surrogate, measured on samples.
  double M_hat = 0.0;
  const Vec y0 = Vec::Zero(env.n);
  for (int t = 1; t <= T; ++t)
    M_hat = std::max(M_hat, std::abs(expected_at(actions[t - 1], y0)));
  for (int t = 1; t <= T; ++t) {
    const Vec& x_t = actions[t - 1];
    // Mixture over past updates: p_t = (1-th)^t p_0 + sum_h th (1-th)^h (y_{t-h} + xi).
    double truth = std::pow(1.0 - env.theta, t) * expected_at(x_t, y0);
    for (int h = 0; h < t; ++h) {
      const Vec& y_mh = states[t - h - 1];
      truth += env.theta * std::pow(1.0 - env.theta, h) * expected_at(x_t, y_mh);
    }
    const double surrogate = expected_at(env.inverse_map(states[t - 1]), states[t - 1]);
    const double gap = std::abs(truth - surrogate);
    const double tail = std::pow(1.0 - env.theta, t) * (M_hat + std::abs(surrogate));
    const double step_term = max_step * loss.Lz * (1.0 + env.S) *
                             (env.L_y + (1.0 - env.theta) / env.theta + 1.0);
    const double bound = tail + step_term + mc_tol;
    audit.gap.push_back(gap);
    audit.bound.push_back(bound);
    audit.max_violation = std::max(audit.max_violation, gap - bound);
  }
  return audit;
}

}  // namespace nestctl
