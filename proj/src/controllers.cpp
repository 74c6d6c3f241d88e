#include "nestctl/controllers.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace nestctl {

namespace {

constexpr double kResidualTol = 1e-8;

double effective_L(const LossStream& losses, const ControllerConfig& cfg) {
  return cfg.L > 0.0 ? cfg.L : losses.lipschitz();
}

struct Calib {
  double eta, delta, step_bound, r, R, G;
};

Calib calibrate(const DynamicsModel& model, const LossStream& losses, double rho_eff,
                const ControllerConfig& cfg) {
  Calib c{};
  c.r = cfg.r_override > 0.0 ? cfg.r_override : model.state_space.inradius();
  c.R = cfg.R_override > 0.0 ? cfg.R_override : model.state_space.circumradius();
  if (c.r <= 0.0) throw std::invalid_argument("calibrate: state space has empty inradius about the origin");
  c.G = cfg.G >= 0.0 ? cfg.G : 0.5 * c.R * c.R;
  const long T = cfg.horizon;
  if (cfg.holder) {
    const double lambda = losses.holder_lambda();
    const double beta = losses.holder_beta();
    const HolderCalibration h =
        holder_calibrate(lambda, beta, c.G, cfg.gamma, c.R, rho_eff * c.r, T);
    c.eta = cfg.eta_override > 0.0 ? cfg.eta_override : h.eta;
    c.delta = cfg.delta_override > 0.0 ? cfg.delta_override : h.delta;
    c.step_bound = h.step_bound;
  } else {
    const double L = effective_L(losses, cfg);
    c.eta = cfg.eta_override > 0.0
                ? cfg.eta_override
                : std::sqrt(c.G * cfg.gamma / ((1.0 + c.R / (c.r * rho_eff)) * double(T) * L * L));
    c.delta = cfg.delta_override > 0.0 ? cfg.delta_override
                                       : c.eta * L / (c.r * rho_eff * cfg.gamma);
    c.step_bound = c.eta * L / cfg.gamma;
  }
  if (c.delta >= 1.0)
    throw std::invalid_argument("calibrate: contraction delta >= 1 (horizon too small for rho)");
  return c;
}

void append_row(TrajectoryLog& log, int t, Vec target, Vec action, Vec undisturbed, Vec w,
                Vec state, double loss, double residual, bool feasible) {
  RoundRow row;
  row.t = t;
  row.target = std::move(target);
  row.action = std::move(action);
  row.undisturbed = std::move(undisturbed);
  row.disturbance = std::move(w);
  row.state = std::move(state);
  row.loss = loss;
  row.residual = residual;
  row.feasible = feasible;
  log.rows.push_back(std::move(row));
}

// Shared loop for OEN-FTRL and OEN-FTRL-AP: the FTRL engine runs over the
// contracted space at rho_inner and is always fed the loss at its own shadow
// target, so the shadow trajectory is independent of disturbances.
TrajectoryLog run_contracted_ftrl(const DynamicsModel& model, const LossStream& losses,
                                  DisturbanceAdversary adv, const ControllerConfig& cfg,
                                  double rho_inner, bool plain) {
  TrajectoryLog log;
  log.controller = plain ? "oen_ftrl" : "oen_ftrl_ap";
  if (cfg.horizon <= 0) return log;

  const Calib cal = calibrate(model, losses, rho_inner, cfg);
  log.eta = cal.eta;
  log.delta = cal.delta;
  log.step_bound = cal.step_bound;
  log.r = cal.r;
  log.R = cal.R;
  log.G = cal.G;
  log.gamma = cfg.gamma;
  log.L = effective_L(losses, cfg);
  log.rho_inner = rho_inner;

  const ConvexBody& Y = model.state_space;
  ConvexBody domain = Y.contracted(cal.delta);
  FtrlState ftrl = ftrl_init(domain, cal.eta, cfg.gamma, cal.G);

  const double cap_fraction = (cfg.rho - cfg.alpha * cfg.rho) / (1.0 + cfg.rho);
  Vec y = Vec::Zero(Y.dim());
  for (int t = 1; t <= cfg.horizon; ++t) {
    const Vec target = ftrl_next(ftrl);
    SolveResult sol = nonconvex_oracle(model, y, target, t);
    const Vec undisturbed = model.eval_nominal(sol.x, y, t);
    const Vec realized_base = model.nominal_evaluator ? model.eval(sol.x, y, t) : undisturbed;
    Vec w = adv.next(undisturbed, Y);
    if (!plain && w.norm() > 0.0) {
      const double cap = cap_fraction * Y.boundary_distance(undisturbed);
      if (w.norm() > cap + 1e-9) {
        log.cap_violation = true;
        if (!cfg.allow_cap_violation) {
          std::ostringstream msg;
          msg << "oen_ftrl_ap: disturbance cap violated at round " << t << " (|w|=" << w.norm()
              << ", cap=" << cap << ")";
          throw std::runtime_error(msg.str());
        }
      }
    }
    Vec state = realized_base + w;
    if (!Y.contains(state, 1e-7)) state = Y.project(state);
    const Vec w_total = state - undisturbed;
    const double loss = losses.value(t, state);
    const bool feasible = sol.residual <= kResidualTol;
    if (plain && !feasible) log.failed_feasibility = true;
    ftrl = ftrl_update(ftrl, losses.grad(t, target));
    y = state;
    append_row(log, t, target, sol.x, undisturbed, w_total, std::move(state), loss, sol.residual,
               feasible);
  }
  log.adversary_spend = adv.spent();
  return log;
}

}  // namespace

NestedCalibration oen_ftrl_calibrate(const DynamicsModel& model, double L, double rho_eff,
                                     const ControllerConfig& cfg) {
  ControllerConfig c = cfg;
  c.L = L;
  // A throwaway Lipschitz stream carrying only the constant.
  auto stream = linear_loss(Vec::Zero(model.state_space.dim()));
  const Calib cal = calibrate(model, *stream, rho_eff, c);
  NestedCalibration out;
  out.eta = cal.eta;
  out.delta = cal.delta;
  out.step_bound = cal.step_bound;
  out.r = cal.r;
  out.R = cal.R;
  out.G = cal.G;
  out.regret_bound =
      2.0 * std::sqrt((1.0 + cal.R / (cal.r * rho_eff)) * double(cfg.horizon) * cal.G * L * L /
                      cfg.gamma);
  return out;
}

TrajectoryLog oen_ftrl_run(const DynamicsModel& model, const LossStream& losses,
                           const ControllerConfig& cfg) {
  return run_contracted_ftrl(model, losses, DisturbanceAdversary::none(), cfg, cfg.rho, true);
}

TrajectoryLog oen_ftrl_ap_run(const DynamicsModel& model, const LossStream& losses,
                              DisturbanceAdversary adversary, const ControllerConfig& cfg) {
  if (cfg.alpha <= 0.0) throw std::invalid_argument("oen_ftrl_ap: alpha must be positive");
  return run_contracted_ftrl(model, losses, std::move(adversary), cfg, cfg.alpha * cfg.rho, false);
}

TrajectoryLog oen_ftrl_uap_run(const DynamicsModel& model, const LossStream& losses,
                               DisturbanceAdversary adversary, const ControllerConfig& cfg) {
  TrajectoryLog log;
  log.controller = "oen_ftrl_uap";
  if (cfg.horizon <= 0) return log;

  const ConvexBody& Y = model.state_space;
  const double L = effective_L(losses, cfg);
  const double r = cfg.r_override > 0.0 ? cfg.r_override : Y.inradius();
  const double R = cfg.R_override > 0.0 ? cfg.R_override : Y.circumradius();
  const double G = cfg.G >= 0.0 ? cfg.G : 0.5 * R * R;
  double eta = cfg.eta_override > 0.0 ? cfg.eta_override
                                      : std::sqrt(G * cfg.gamma / (double(cfg.horizon) * L * L));
  const double step_cap = cfg.alpha * cfg.rho * cfg.gamma / L;
  if (eta > step_cap + 1e-15) {
    if (cfg.cap_eta)
      eta = step_cap;
    else
      throw std::invalid_argument(
          "oen_ftrl_uap: horizon too small, eta*L/gamma exceeds rho*alpha (step feasibility)");
  }
  log.eta = eta;
  log.step_bound = eta * L / cfg.gamma;
  log.r = r;
  log.R = R;
  log.G = G;
  log.gamma = cfg.gamma;
  log.L = L;
  log.rho_inner = cfg.rho;

  FtrlState ftrl = ftrl_init(Y, eta, cfg.gamma, G);
  Vec y = Vec::Zero(Y.dim());
  for (int t = 1; t <= cfg.horizon; ++t) {
    const Vec target = ftrl_next(ftrl);
    SolveResult sol = nonconvex_oracle(model, y, target, t);
    const Vec undisturbed = model.eval_nominal(sol.x, y, t);
    const Vec realized_base = model.nominal_evaluator ? model.eval(sol.x, y, t) : undisturbed;
    Vec w = adversary.next(undisturbed, Y);
    Vec state = realized_base + w;
    if (!Y.contains(state, 1e-7)) state = Y.project(state);
    const Vec w_total = state - undisturbed;
    const double loss = losses.value(t, state);
    ftrl = ftrl_update(ftrl, losses.grad(t, target));
    y = state;
    append_row(log, t, target, sol.x, undisturbed, w_total, std::move(state), loss, sol.residual,
               sol.residual <= kResidualTol);
  }
  log.adversary_spend = adversary.spent();
  return log;
}

TrajectoryLog probing_oco_run(const DynamicsModel& model, const LossStream& losses,
                              const ControllerConfig& cfg) {
  TrajectoryLog log;
  log.controller = "probing_oco";
  if (cfg.horizon <= 0) return log;
  if (cfg.x1.size() == 0)
    throw std::invalid_argument("probing_oco: missing near-stabilizing action x1");
  if (cfg.probe_eps <= 0.0) throw std::invalid_argument("probing_oco: probe_eps must be positive");
  if (model.time_varying) throw std::invalid_argument("probing_oco: dynamics must be time-invariant");

  const ConvexBody& Y = model.state_space;
  const ConvexBody& X = model.action_space;
  const int n = X.dim();
  const int block = 2 * n + 1;
  const int inner_rounds = cfg.horizon / block;
  if (inner_rounds < 1) throw std::invalid_argument("probing_oco: horizon below one probing block");

  ControllerConfig inner_cfg = cfg;
  inner_cfg.horizon = inner_rounds;
  const double rho_inner = cfg.alpha * cfg.rho;
  const Calib cal = calibrate(model, losses, rho_inner, inner_cfg);
  log.eta = cal.eta;
  log.delta = cal.delta;
  log.step_bound = cal.step_bound;
  log.r = cal.r;
  log.R = cal.R;
  log.G = cal.G;
  log.gamma = cfg.gamma;
  log.L = effective_L(losses, cfg);
  log.rho_inner = rho_inner;

  ConvexBody domain = Y.contracted(cal.delta);
  FtrlState ftrl = ftrl_init(domain, cal.eta, cfg.gamma, cal.G);

  const double eps = cfg.probe_eps;
  std::vector<std::pair<Vec, Vec>> window;  // (action, observed next state)
  Vec y = Vec::Zero(Y.dim());
  int t = 0;

  auto play_action = [&](const Vec& x, const Vec& intent) {
    ++t;
    const Vec next = model.eval(x, y, t);
    const double residual = (next - intent).norm();
    window.emplace_back(x, next);
    if (int(window.size()) > block) window.erase(window.begin());
    append_row(log, t, intent, x, next, next - intent, next, losses.value(t, next), residual, true);
    y = next;
  };

  auto refit = [&]() {
    const int rows = int(window.size());
    Mat Z(rows, n + 1);
    Mat Ynext(rows, Y.dim());
    for (int i = 0; i < rows; ++i) {
      Z.row(i).head(n) = window[i].first.transpose();
      Z(i, n) = 1.0;
      Ynext.row(i) = window[i].second.transpose();
    }
    const Mat ZtZ = Z.transpose() * Z + 1e-10 * Mat::Identity(n + 1, n + 1);
    const Mat coef = ZtZ.ldlt().solve(Z.transpose() * Ynext);  // (n+1) x dim(Y)
    Mat A_hat = coef.topRows(n).transpose();
    Vec b_hat = coef.row(n).transpose();
    log.fit_A.push_back(A_hat);
    log.fit_b.push_back(b_hat);
  };

  auto target_with_fit = [&](const Vec& target) {
    const Mat& A_hat = log.fit_A.back();
    const Vec& b_hat = log.fit_b.back();
    const SolveResult sol = solve_action_linear(A_hat, b_hat, y, target, X);
    play_action(sol.x, target);
  };

  // Estimation phase: x1 and coordinate probes around it.
  play_action(cfg.x1, y);
  for (int i = 0; i < n && t < cfg.horizon; ++i) {
    play_action(cfg.x1 + eps * Vec::Unit(n, i), y);
    play_action(cfg.x1 - eps * Vec::Unit(n, i), y);
  }
  refit();

  // Main loop: one inner FTRL step per 2n+1 environment rounds.
  while (t + block <= cfg.horizon) {
    const Vec y_base = y;
    target_with_fit(y_base);  // stabilizing round
    const Vec target_star = ftrl_next(ftrl);
    const int loss_round = t;
    for (int i = 0; i < n; ++i) {
      const double f1 = double(2 * i + 1) / double(2 * n);
      const double f2 = double(2 * i + 2) / double(2 * n);
      target_with_fit(Y.project(y_base + f1 * (target_star - y_base) + eps * Vec::Unit(Y.dim(), i)));
      target_with_fit(Y.project(y_base + f2 * (target_star - y_base) - eps * Vec::Unit(Y.dim(), i)));
    }
    refit();
    ftrl = ftrl_update(ftrl, losses.grad(loss_round, target_star));
  }
  // Trailing rounds: hold position.
  while (t < cfg.horizon) target_with_fit(y);
  return log;
}

TrajectoryLog nested_bco_run(const DynamicsModel& model, const LossStream& losses,
                             const ControllerConfig& cfg) {
  TrajectoryLog log;
  log.controller = "nested_bco";
  if (cfg.horizon <= 0) return log;

  const ConvexBody& Y = model.state_space;
  const int n = Y.dim();
  const double L = effective_L(losses, cfg);
  const double r = cfg.r_override > 0.0 ? cfg.r_override : Y.inradius();
  const double R = cfg.R_override > 0.0 ? cfg.R_override : Y.circumradius();
  const double T = double(cfg.horizon);
  const double t_quarter = std::pow(T, 0.25);
  if (t_quarter < R / r - 1e-9)
    throw std::invalid_argument("nested_bco: requires T^{1/4} >= R/r");
  const double probe = 1.0 / t_quarter;
  const double delta = 4.0 / (r * cfg.rho * t_quarter);
  if (delta >= 1.0)
    throw std::invalid_argument("nested_bco: contraction delta >= 1 (horizon too small for rho)");
  const double eta = R / (2.0 * double(n) * r * L * std::pow(T, 0.75));

  log.eta = eta;
  log.delta = delta;
  log.step_bound = 2.0 * probe + eta * double(n) * L / probe;
  log.r = r;
  log.R = R;
  log.gamma = cfg.gamma;
  log.L = L;
  log.rho_inner = cfg.rho;

  ConvexBody domain = Y.contracted(delta);
  FkmState fkm = fkm_init(domain, eta, probe, cfg.seed);
  Vec y = Vec::Zero(n);
  for (int t = 1; t <= cfg.horizon; ++t) {
    const Vec target = fkm.played_point();
    SolveResult sol = nonconvex_oracle(model, y, target, t);
    const Vec state = model.eval(sol.x, y, t);
    const double loss = losses.value(t, state);
    auto [next_fkm, next_point] = fkm_step(std::move(fkm), loss);
    fkm = std::move(next_fkm);
    (void)next_point;
    append_row(log, t, target, sol.x, state, state - target, state, loss, sol.residual,
               sol.residual <= kResidualTol);
    y = state;
  }
  return log;
}

Vec state_targeting_policy_step(const DynamicsModel& model, const Vec& y_prev,
                                const ConvexBody& target_body, const Vec& y_hat, int t) {
  // Move along the segment toward y_hat as far as one round allows; the
  // segment stays inside the (convex) target body when both ends do.
  const double reach = model.rho * model.state_space.boundary_distance(y_prev);
  Vec d = y_hat - y_prev;
  const double dist = d.norm();
  Vec target = y_prev;
  if (dist > 1e-15) target = y_prev + std::min(reach, dist) / dist * d;
  target = target_body.valid() ? target_body.project(target) : target;
  return nonconvex_oracle(model, y_prev, target, t).x;
}

TrajectoryLog state_targeting_run(const DynamicsModel& model, const LossStream& losses,
                                  const Vec& y_hat, int T) {
  TrajectoryLog log;
  log.controller = "state_targeting";
  const ConvexBody& Y = model.state_space;
  Vec y = Vec::Zero(Y.dim());
  for (int t = 1; t <= T; ++t) {
    const Vec x = state_targeting_policy_step(model, y, ConvexBody(), y_hat, t);
    const Vec state = model.eval(x, y, t);
    const double loss = losses.value(t, state);
    append_row(log, t, y_hat, x, state, Vec::Zero(Y.dim()), state, loss,
               (state - y_hat).norm(), true);
    y = state;
  }
  return log;
}

TrajectoryLog linear_policy_run(const DynamicsModel& model, const LossStream& losses, const Mat& K,
                                int T) {
  TrajectoryLog log;
  log.controller = "linear_policy";
  const ConvexBody& Y = model.state_space;
  Vec y = Vec::Zero(Y.dim());
  for (int t = 1; t <= T; ++t) {
    Vec x = model.action_space.project(-K * y);
    const Vec state = model.eval(x, y, t);
    const double loss = losses.value(t, state);
    append_row(log, t, state, std::move(x), state, Vec::Zero(Y.dim()), state, loss, 0.0, true);
    y = log.rows.back().state;
  }
  return log;
}

TrajectoryLog run_controller_with_adversary(const std::string& name, const DynamicsModel& model,
                                            const LossStream& losses,
                                            DisturbanceAdversary adversary,
                                            const ControllerConfig& cfg) {
  if (name == "oen_ftrl")
    return run_contracted_ftrl(model, losses, std::move(adversary), cfg, cfg.rho, true);
  if (name == "oen_ftrl_ap") return oen_ftrl_ap_run(model, losses, std::move(adversary), cfg);
  if (name == "oen_ftrl_uap") return oen_ftrl_uap_run(model, losses, std::move(adversary), cfg);
  throw std::invalid_argument("run_controller_with_adversary: unknown controller " + name);
}

}  // namespace nestctl
