#pragma once

#include <cstdint>
#include <functional>

#include "nestctl/dynamics.hpp"
#include "nestctl/loss.hpp"

namespace nestctl {

// Adaptive pricing of two real-valued goods against a utility-maximizing
// buyer with reserves: the buyer consumes a fraction theta_t of every good,
// then purchases the bundle maximizing v(reserves + x) - <p, x>.
struct PricingEnv {
  enum class Valuation { ces, cobb_douglas };

  Valuation valuation = Valuation::ces;
  Vec alpha;              // weights / exponents
  double kappa = 0.5;     // CES inner exponent
  double beta_exp = 1.0;  // CES outer exponent
  double k_hom = 0.5;     // homogeneity degree

  double holder_lambda = 2.0;  // pinned (lambda, beta) of v, sample-verified
  double holder_beta = 0.5;

  double phi = 0.2;  // cost slope; state space is {v(y) >= phi * ||y||}
  double C0 = 0.0;
  double Lc = 1.0;  // cost Lipschitz parameter used in calibration

  double theta_min = 0.25;
  std::uint64_t seed = 1;
  double cost_slope_max = 0.3;  // a_t in [0, cost_slope_max]

  Vec y1;         // interior anchor with B_1(y1) inside the state space
  double V = 0.0; // max of v over the unit sphere in the orthant
  double R = 0.0; // circumradius (V/phi)^(1/(1-k))

  double theta_at(int t) const;
  double cost_slope_at(int t) const;  // a_t
  // c_t(x) = (phi + a_t) * ||x|| + C0
  double cost(int t, const Vec& x) const;
  Vec cost_grad(int t, const Vec& x) const;
  // Surrogate Hoelder constant L = k*lambda + Lc.
  double surrogate_L() const { return k_hom * holder_lambda + Lc; }
};

PricingEnv make_ces_env(Vec alpha, double kappa, double beta_exp, double phi, double C0,
                        double theta_min, std::uint64_t seed);
PricingEnv make_cobb_douglas_env(Vec alpha, double phi, double C0, double theta_min,
                                 std::uint64_t seed);

double pricing_value(const PricingEnv& env, const Vec& y);  // v(y)
Vec pricing_value_grad(const PricingEnv& env, const Vec& y);
// Prices p = grad v(y_target) inducing the reserve update to y_target.
Vec pricing_price_for_target(const PricingEnv& env, const Vec& y_target);
// Closed-form solution u of grad v(u) = p (the buyer's unconstrained optimum).
Vec pricing_demand_point(const PricingEnv& env, const Vec& prices);
// Buyer's purchased bundle from reserves (1-theta)*y_prev at prices p.
Vec pricing_best_response(const PricingEnv& env, const Vec& prices, double theta,
                          const Vec& y_prev);
// theta_t * k * v(y) - c_t(theta_t * y).
double pricing_surrogate_reward(const PricingEnv& env, const Vec& y, int t);

// Convex body {y >= 0 : v(y) >= phi * ||y||} (two goods only); rejects phi
// too large for a unit ball around env.y1.
ConvexBody pricing_state_space(const PricingEnv& env);

// Dynamics recentered at y1: actions are price vectors, reserves start at y1.
DynamicsModel pricing_dynamics_model(const PricingEnv& env);
// Surrogate minimization stream in recentered coordinates.
LossStreamPtr pricing_surrogate_loss(const PricingEnv& env);

// Recovers theta_t from an observed transition, asserting cross-coordinate
// consistency.
double pricing_recover_theta(const Vec& y_prev, const Vec& y_next, const Vec& bundle);

}  // namespace nestctl
