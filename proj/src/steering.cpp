#include "nestctl/steering.hpp"

#include <cmath>

#include "nestctl/rng.hpp"

namespace nestctl {

Vec SteeringEnv::row_average(const Mat& M) const {
  return M.colwise().mean().transpose();
}

namespace {

Mat cross_B(int m, int n, double radius, double angle) {
  // Rows +-radius*u and +-radius*u_perp (m = 4, n = 2): the row hull is a
  // square whose inscribed circle has radius radius/sqrt(2).
  if (m != 4 || n != 2) throw std::invalid_argument("steering env: cross B needs m=4, n=2");
  Mat B(m, n);
  const double c = std::cos(angle), s = std::sin(angle);
  B.row(0) << radius * c, radius * s;
  B.row(1) << -radius * c, -radius * s;
  B.row(2) << -radius * s, radius * c;
  B.row(3) << radius * s, -radius * c;
  return B;
}

Mat identical_row_A(int m, int n, const Vec& row) {
  Mat A(m, n);
  for (int i = 0; i < m; ++i) A.row(i) = row.transpose();
  return A;
}

}  // namespace

SteeringEnv make_fixed_game_env(int m, int n, int T, double L) {
  SteeringEnv env;
  env.m = m;
  env.n = n;
  env.L = L;
  env.T = T;
  env.theta = std::sqrt(2.0 / (L * L * double(T)));
  const double entry_cap = L / (2.0 * std::sqrt(double(n)));
  Vec row(n);
  for (int j = 0; j < n; ++j) row[j] = (j == 0 ? 0.7 : -0.7) * entry_cap;
  const Mat A = identical_row_A(m, n, row);
  const Mat B = cross_B(m, n, std::sqrt(2.0), 0.0);
  if (B.cwiseAbs().maxCoeff() > entry_cap + 1e-12)
    throw std::invalid_argument("steering env: B entries exceed the game scale");
  env.A.assign(T, A);
  env.B.assign(T, B);
  env.delta_t.assign(T, 0.0);
  env.eps_t.assign(T, 0.0);
  return env;
}

SteeringEnv make_drifting_game_env(int m, int n, int T, double L, double eps_total,
                                   std::uint64_t seed) {
  SteeringEnv env = make_fixed_game_env(m, n, T, L);
  CounterRng rng(seed, 0x737465);
  std::vector<double> raw(T, 0.0);
  double raw_total = 0.0;
  for (int t = 1; t < T; ++t) {
    raw[t] = rng.uniform();
    raw_total += raw[t];
  }
  // Rotate B by increments scaled so the realized row drift sums to eps_total.
  double angle = 0.0;
  const double radius = std::sqrt(2.0);
  for (int t = 1; t < T; ++t) {
    // Row displacement for a rotation by da is 2*radius*sin(da/2) ~ radius*da.
    const double da = (eps_total / raw_total) * raw[t] / radius;
    angle += da;
    env.B[t] = cross_B(m, n, radius, angle);
    env.eps_t[t] = 0.0;
    for (int i = 0; i < m; ++i)
      env.eps_t[t] = std::max(env.eps_t[t], (env.B[t].row(i) - env.B[t - 1].row(i)).norm());
  }
  return env;
}

SolveResult steering_action(const SteeringEnv& env, const Vec& y_now, const Vec& target,
                            const Mat& B_prev) {
  const Vec simplex_target = target;
  if (simplex_target.minCoeff() < -1e-7 || std::abs(simplex_target.sum() - 1.0) > 1e-6)
    throw std::invalid_argument("steering_action: target must lie on the simplex");
  const Vec g = (target - y_now) / env.theta;
  return simplex_least_squares(B_prev, g);
}

SteeringRoundResult steering_round(const SteeringEnv& env, int t, const Vec& y_now,
                                   const Vec& controller_target) {
  const ConvexBody simplex = ConvexBody::simplex(env.n);
  const Mat& B_prev = env.B_at(std::max(1, t - 1));
  SteeringRoundResult out;
  const SolveResult sol = steering_action(env, y_now, controller_target, B_prev);
  out.x = sol.x;
  out.residual = sol.residual;
  const Vec declared = simplex.project(y_now + env.theta * (B_prev.transpose() * out.x));
  out.y_next = simplex.project(y_now + env.theta * (env.B_at(t).transpose() * out.x));
  out.w = out.y_next - declared;
  out.true_reward = out.x.dot(env.A_at(t) * y_now);
  const Vec srow = t >= 2 ? env.row_average(env.A_at(t - 1)) : Vec(Vec::Zero(env.n));
  out.surrogate_loss = -srow.dot(out.y_next);
  return out;
}

DynamicsModel steering_dynamics_model(const SteeringEnv& env) {
  DynamicsModel m;
  m.name = "steering";
  const int n = env.n;
  const Vec center = Vec::Constant(n, 1.0 / double(n));
  m.state_space = ConvexBody::simplex(n).recentered(center, std::sqrt(1.0 - 1.0 / double(n)));
  m.action_space = ConvexBody::simplex(env.m);
  m.rho = env.theta;
  m.mode = DynamicsModel::Mode::strong;
  m.time_varying = true;

  SteeringEnv env_copy = env;
  const ConvexBody simplex = ConvexBody::simplex(n);
  m.evaluator = [env_copy, center, simplex](const Vec& x, const Vec& yc, int t) {
    const Vec y = yc + center;
    const Vec next = simplex.project(y + env_copy.theta * (env_copy.B_at(t).transpose() * x));
    return Vec(next - center);
  };
  // Declared dynamics use the last revealed matrix B_{t-1}; round 1 sees B_1
  // since nothing earlier exists.
  m.nominal_evaluator = [env_copy, center, simplex](const Vec& x, const Vec& yc, int t) {
    const Vec y = yc + center;
    const Mat& B_prev = env_copy.B_at(std::max(1, t - 1));
    const Vec next = simplex.project(y + env_copy.theta * (B_prev.transpose() * x));
    return Vec(next - center);
  };
  m.custom_solver = [env_copy, center](const Vec& yc, const Vec& target_c, int t) -> SolveResult {
    const Vec y = yc + center;
    const Vec target = target_c + center;
    const Mat& B_prev = env_copy.B_at(std::max(1, t - 1));
    SolveResult sol = steering_action(env_copy, y, target, B_prev);
    sol.residual *= env_copy.theta;  // state-space units
    return sol;
  };
  return m;
}

LossStreamPtr steering_surrogate_loss(const SteeringEnv& env) {
  SteeringEnv env_copy = env;
  const Vec center = Vec::Constant(env.n, 1.0 / double(env.n));
  auto row_at = [env_copy](int t) {
    if (t <= 1) return Vec(Vec::Zero(env_copy.n));  // A_0 = 0
    return env_copy.row_average(env_copy.A_at(t - 1));
  };
  auto value = [row_at, center](int t, const Vec& yc) {
    return -row_at(t).dot(yc + center);
  };
  auto grad = [row_at](int t, const Vec& yc) {
    (void)yc;
    return Vec(-row_at(t));
  };
  const double lip = env.L / 2.0;  // ||u A_t|| <= sqrt(n) * L/(2 sqrt(n))
  return functional_loss(value, grad, lip, lip, 1.0, false);
}

SteeringAudit steering_audit(const SteeringEnv& env, const std::vector<Vec>& states,
                             const std::vector<Vec>& actions,
                             const std::vector<Vec>& disturbances) {
  SteeringAudit audit;
  const int T = int(actions.size());
  const int n = env.n;
  const Vec center = Vec::Constant(n, 1.0 / double(n));

  // Learner's strategy at round t is the state entering the round.
  std::vector<Vec> y(T + 1);
  y[0] = center;
  for (int t = 1; t <= T; ++t) y[t] = states[t - 1] + center;

  Mat entry_sums = Mat::Zero(env.m, n);
  Vec learner_loss_sum = Vec::Zero(n);  // sum_t of the learner's loss gradient rows
  double learner_realized = 0.0;
  double surrogate_sum = 0.0;
  for (int t = 1; t <= T; ++t) {
    const Vec& x = actions[t - 1];
    const Vec& y_now = y[t - 1];
    audit.optimizer_total_reward += x.dot(env.A_at(t) * y_now);
    entry_sums += env.A_at(t);
    const Vec loss_row = -(env.B_at(t).transpose() * x);  // learner minimizes
    learner_loss_sum += loss_row;
    learner_realized += loss_row.dot(y_now);
    const Vec srow = t >= 2 ? env.row_average(env.A_at(t - 1)) : Vec(Vec::Zero(n));
    surrogate_sum += -srow.dot(y[t]);
    if (env.eps_t[t - 1] > 1e-15) {
      const double ratio = disturbances[t - 1].norm() / (env.theta * env.eps_t[t - 1]);
      audit.max_disturbance_ratio = std::max(audit.max_disturbance_ratio, ratio);
    } else if (disturbances[t - 1].norm() > 1e-12) {
      audit.max_disturbance_ratio = std::numeric_limits<double>::infinity();
    }
  }
  audit.optimizer_average_reward = audit.optimizer_total_reward / double(T);
  audit.best_profile_average = entry_sums.maxCoeff() / double(T);
  audit.profile_regret = entry_sums.maxCoeff() - audit.optimizer_total_reward;
  audit.learner_regret = learner_realized - learner_loss_sum.minCoeff();
  const double R_B = std::sqrt(2.0) / 2.0;
  audit.learner_regret_bound = 2.0 * R_B * env.L * std::sqrt(double(T));
  audit.surrogate_gap = std::abs(audit.optimizer_total_reward - (-surrogate_sum));
  return audit;
}

}  // namespace nestctl
