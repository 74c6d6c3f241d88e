#pragma once

#include "nestctl/geometry.hpp"
#include "nestctl/rng.hpp"

namespace nestctl {

// Follow the Regularized Leader with the quadratic regularizer 0.5*||y||^2
// (gamma-strongly convex, argmin at the origin). The next iterate depends
// only on the gradient sum, so it reduces to one projection.
struct FtrlState {
  ConvexBody domain;
  double eta = 0.0;
  double gamma = 1.0;
  double range_G = 0.0;  // regularizer range over the domain
  Vec grad_sum;
  int round = 0;
};

FtrlState ftrl_init(ConvexBody domain, double eta, double gamma, double range_G);
Vec ftrl_next(const FtrlState& state);
FtrlState ftrl_update(FtrlState state, const Vec& gradient);

// FKM one-point bandit gradient estimator. The center lives in a contracted
// copy of the domain so every played point v + probe_radius * u stays inside;
// when the domain inradius r is below 1, the contraction factor is
// probe_radius / r rather than the probe radius alone.
struct FkmState {
  ConvexBody domain;
  ConvexBody center_domain;
  double eta = 0.0;
  double probe_radius = 0.0;  // spherical smoothing radius
  Vec center;                 // v_t
  Vec last_direction;         // u_t
  std::uint64_t rng_seed = 0;
  CounterRng rng{0};
  int round = 1;

  Vec played_point() const { return center + probe_radius * last_direction; }
};

FkmState fkm_init(ConvexBody domain, double eta, double probe_radius, std::uint64_t seed);
// Feeds back the loss observed at the previously played point and returns the
// updated state together with the next point to play.
std::pair<FkmState, Vec> fkm_step(FkmState state, double observed_loss);

// Online projected gradient descent with a constant step; used both as an
// inner engine and as the steered learner in the games environment.
struct OgdState {
  ConvexBody domain;
  double step = 0.0;  // theta
  Vec point;
};

OgdState ogd_init(ConvexBody domain, double step, Vec start);
OgdState ogd_step(OgdState state, const Vec& gradient);

// Step-size calibration for (lambda, beta)-Hoelder continuous convex losses:
//   K    = lambda * (3 + (R/theta)^beta) * (lambda/gamma)^(beta/(2-beta))
//   eta  = (G / (K*T))^((2-beta)/2)
//   delta = (1/theta) * (eta*lambda/gamma)^(1/(2-beta))
// and the guaranteed per-round FTRL step norm (eta*lambda/gamma)^(1/(2-beta)).
struct HolderCalibration {
  double eta = 0.0;
  double delta = 0.0;
  double step_bound = 0.0;
  double K = 0.0;
};

HolderCalibration holder_calibrate(double lambda, double beta, double G, double gamma,
                                   double R, double theta, long T);

}  // namespace nestctl
