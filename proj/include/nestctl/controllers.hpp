#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nestctl/dynamics.hpp"
#include "nestctl/loss.hpp"
#include "nestctl/oco.hpp"

namespace nestctl {

struct ControllerConfig {
  int horizon = 0;     // T
  double L = -1.0;     // loss Lipschitz constant; <0 -> take from the stream
  double rho = 1.0;    // controllability parameter of the instance
  double alpha = 0.1;  // AP margin / UAP calibration constant
  double gamma = 1.0;  // regularizer strong convexity
  double G = -1.0;     // regularizer range; <0 -> 0.5 * R^2
  double probe_eps = 0.0;
  std::uint64_t seed = 1;

  // Optional overrides; negative means "derive from the model".
  double r_override = -1.0;
  double R_override = -1.0;
  double eta_override = -1.0;
  double delta_override = -1.0;

  bool allow_cap_violation = false;  // AP: record violations instead of aborting
  bool cap_eta = false;              // UAP: clamp eta to alpha*rho*gamma/L
  bool holder = false;               // calibrate for Hoelder losses
  Vec x1;                            // Probing-OCO near-stabilizing action
};

struct RoundRow {
  int t = 0;
  Vec target;       // shadow target chosen by the inner engine
  Vec action;       // x_t
  Vec undisturbed;  // D(x_t, y_{t-1})
  Vec disturbance;  // w_t
  Vec state;        // realized y_t
  double loss = 0.0;
  double residual = 0.0;  // || D(x_t, y_{t-1}) - target ||
  bool feasible = true;
};

struct TrajectoryLog {
  std::string controller;
  std::vector<RoundRow> rows;
  // Calibration actually used by the run.
  double eta = 0.0, delta = 0.0, step_bound = 0.0;
  double r = 0.0, R = 0.0, G = 0.0, gamma = 1.0, L = 0.0;
  double rho_inner = 0.0;  // effective controllability the inner engine assumed
  bool failed_feasibility = false;
  bool cap_violation = false;
  double adversary_spend = 0.0;
  // Probing-OCO: local-form estimates after each refit.
  std::vector<Mat> fit_A;
  std::vector<Vec> fit_b;
};

struct NestedCalibration {
  double eta = 0.0, delta = 0.0, step_bound = 0.0;
  double r = 0.0, R = 0.0, G = 0.0;
  double regret_bound = 0.0;  // 2*sqrt((1 + R/(r*rho)) * T * G * L^2 / gamma)
};

// Closed-form calibration for the contracted-FTRL controllers.
NestedCalibration oen_ftrl_calibrate(const DynamicsModel& model, double L, double rho_eff,
                                     const ControllerConfig& cfg);

TrajectoryLog oen_ftrl_run(const DynamicsModel& model, const LossStream& losses,
                           const ControllerConfig& cfg);
TrajectoryLog oen_ftrl_ap_run(const DynamicsModel& model, const LossStream& losses,
                              DisturbanceAdversary adversary, const ControllerConfig& cfg);
TrajectoryLog oen_ftrl_uap_run(const DynamicsModel& model, const LossStream& losses,
                               DisturbanceAdversary adversary, const ControllerConfig& cfg);
TrajectoryLog probing_oco_run(const DynamicsModel& model, const LossStream& losses,
                              const ControllerConfig& cfg);
TrajectoryLog nested_bco_run(const DynamicsModel& model, const LossStream& losses,
                             const ControllerConfig& cfg);

// Prop-2 style baselines.
Vec state_targeting_policy_step(const DynamicsModel& model, const Vec& y_prev,
                                const ConvexBody& target_body, const Vec& y_hat, int t = 1);
TrajectoryLog state_targeting_run(const DynamicsModel& model, const LossStream& losses,
                                  const Vec& y_hat, int T);
TrajectoryLog linear_policy_run(const DynamicsModel& model, const LossStream& losses, const Mat& K,
                                int T);

// Runs any FTRL-family controller against an explicit adversary; used by the
// lower-bound scenarios that pit one adversary against several controllers.
TrajectoryLog run_controller_with_adversary(const std::string& name, const DynamicsModel& model,
                                            const LossStream& losses,
                                            DisturbanceAdversary adversary,
                                            const ControllerConfig& cfg);

}  // namespace nestctl
