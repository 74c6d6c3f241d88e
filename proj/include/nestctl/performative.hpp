#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nestctl/dynamics.hpp"
#include "nestctl/loss.hpp"

namespace nestctl {

// Per-round scoring loss f_t(x, z), convex and Lipschitz in both arguments.
struct PpLoss {
  std::function<double(const Vec& x, const Vec& z)> value;
  std::function<Vec(const Vec& x, const Vec& z)> grad_x;
  std::function<Vec(const Vec& x, const Vec& z)> grad_z;
  double Lz = 1.0;
};

// Stateful distribution-shift environment: deploying classifier x moves the
// state through A(x, y) = y + kappa*(M x - y), and the population distribution
// is the geometric mixture of past updates plus noise xi ~ (mu, Sigma).
struct PerformativeEnv {
  int n = 0;
  double theta = 0.5;   // mixture speed
  double kappa = 1.0;   // update responsiveness
  Mat M;                // s(x) = M x, invertible
  Mat M_inv;
  double S = 0.0;       // Lipschitz constant of s^{-1}
  Vec mu;
  Mat noise_scale;      // xi = mu + noise_scale * g, g standard normal
  int sample_count = 10000;
  std::uint64_t seed = 7;
  double rho = 0.5;
  double state_radius = 1.0;   // Y = Ball(0, state_radius)
  double action_radius = 0.0;  // X = Ball(0, action_radius)
  double L_y = 0.0;            // Lipschitz of the inverse action map in y

  Vec stable_state(const Vec& x) const { return M * x; }  // s(x)
  Vec inverse_map(const Vec& y) const { return M_inv * y; }
  Vec update_map(const Vec& x, const Vec& y) const { return y + kappa * (M * x - y); }
  // Common-random-number noise draws for round t.
  std::vector<Vec> noise_samples(int t, int count) const;
};

PerformativeEnv make_performative_env(int n, double theta, double kappa, Mat M, Vec mu,
                                      Mat noise_scale, double state_radius, double rho,
                                      std::uint64_t seed);

// Monte-Carlo surrogate E_{z ~ y + xi}[ f(s^{-1}(y), z) ] and its gradient,
// with shared draws across the whole gradient stencil.
std::pair<double, Vec> pp_surrogate_loss(const PerformativeEnv& env, const PpLoss& loss,
                                         const Vec& y, int t, int sample_count = -1);

// Dynamics over Y = Ball(0, state_radius) with exact inverse-map actions.
DynamicsModel pp_dynamics_model(const PerformativeEnv& env);
// Surrogate stream for a fixed per-round loss family.
LossStreamPtr pp_surrogate_stream(const PerformativeEnv& env, const PpLoss& loss);

struct PpGapAudit {
  std::vector<double> gap;           // |f~(x_t, p_t) - f*(y_t)| per round
  std::vector<double> bound;         // geometric tail + step term per round
  double max_violation = 0.0;        // max over rounds of gap - bound
};

// Mixture-expanded true loss vs surrogate, audited against the
// geometric-tail-plus-step bound with measured constants.
PpGapAudit pp_true_loss_gap(const PerformativeEnv& env, const PpLoss& loss,
                            const std::vector<Vec>& actions, const std::vector<Vec>& states,
                            double max_step, double mc_tol, int sample_count = 2000);

}  // namespace nestctl
