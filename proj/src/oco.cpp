#include "nestctl/oco.hpp"

#include <cmath>

namespace nestctl {

FtrlState ftrl_init(ConvexBody domain, double eta, double gamma, double range_G) {
  if (eta <= 0.0) throw std::invalid_argument("ftrl: eta must be positive");
  if (gamma <= 0.0) throw std::invalid_argument("ftrl: gamma must be positive");
  FtrlState s;
  s.grad_sum = Vec::Zero(domain.dim());
  s.domain = std::move(domain);
  s.eta = eta;
  s.gamma = gamma;
  s.range_G = range_G;
  return s;
}

Vec ftrl_next(const FtrlState& state) {
  // argmin_y eta*<grad_sum, y> + (gamma/2)||y||^2 over the domain.
  return state.domain.project(-(state.eta / state.gamma) * state.grad_sum);
}

FtrlState ftrl_update(FtrlState state, const Vec& gradient) {
  if (gradient.size() != state.grad_sum.size())
    throw std::invalid_argument("ftrl_update: gradient dimension mismatch");
  state.grad_sum += gradient;
  state.round += 1;
  return state;
}

FkmState fkm_init(ConvexBody domain, double eta, double probe_radius, std::uint64_t seed) {
  if (probe_radius <= 0.0) throw std::invalid_argument("fkm: probe radius must be positive");
  const double r = domain.inradius();
  if (probe_radius >= r) throw std::invalid_argument("fkm: probe radius exceeds domain inradius");
  FkmState s;
  s.center = Vec::Zero(domain.dim());
  const double shrink = std::min(probe_radius / r, 1.0 - 1e-12);
  s.center_domain = domain.contracted(shrink);
  s.domain = std::move(domain);
  s.eta = eta;
  s.probe_radius = probe_radius;
  s.rng_seed = seed;
  s.rng = CounterRng(seed, /*stream=*/0x464b4d);
  s.last_direction = s.domain.hull_direction(s.rng.unit_sphere(s.domain.dim()));
  const double n = s.last_direction.norm();
  if (n > 1e-12) s.last_direction /= n;
  return s;
}

std::pair<FkmState, Vec> fkm_step(FkmState state, double observed_loss) {
  const int n = state.domain.dim();
  const Vec g = (double(n) / state.probe_radius) * observed_loss * state.last_direction;
  state.center = state.center_domain.project(state.center - state.eta * g);
  Vec u = state.domain.hull_direction(state.rng.unit_sphere(n));
  const double un = u.norm();
  if (un > 1e-12) u /= un;
  state.last_direction = u;
  state.round += 1;
  return {state, state.center + state.probe_radius * u};
}

OgdState ogd_init(ConvexBody domain, double step, Vec start) {
  OgdState s;
  s.point = domain.project(start);
  s.domain = std::move(domain);
  s.step = step;
  return s;
}

OgdState ogd_step(OgdState state, const Vec& gradient) {
  state.point = state.domain.project(state.point - state.step * gradient);
  return state;
}

HolderCalibration holder_calibrate(double lambda, double beta, double G, double gamma,
                                   double R, double theta, long T) {
  if (beta <= 0.0 || beta > 1.0) throw std::invalid_argument("holder_calibrate: beta must lie in (0,1]");
  if (lambda < 1.0) throw std::invalid_argument("holder_calibrate: lambda must be >= 1");
  HolderCalibration c;
  c.K = lambda * (3.0 + std::pow(R / theta, beta)) * std::pow(lambda / gamma, beta / (2.0 - beta));
  c.eta = std::pow(G / (c.K * double(T)), (2.0 - beta) / 2.0);
  c.step_bound = std::pow(c.eta * lambda / gamma, 1.0 / (2.0 - beta));
  c.delta = c.step_bound / theta;
  return c;
}

}  // namespace nestctl
