#include "nestctl/pricing.hpp"

#include <cmath>

#include "nestctl/rng.hpp"

namespace nestctl {

namespace {

double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 80) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

// State space {y in R^2_+ : v(y) >= phi * ||y||}. The gauge is closed form
// along rays, so the boundary is the curve t(w)*d(w) over directions d(w);
// projection and boundary distance search over that parameterization.
class PricingBody final : public BodyImpl {
 public:
  PricingBody(std::function<double(const Vec&)> value, double phi, double k_hom, double R,
              Vec anchor)
      : value_(std::move(value)), phi_(phi), k_(k_hom), R_(R), anchor_(std::move(anchor)) {}

  int dim() const override { return 2; }
  double inradius() const override { return 0.0; }  // origin sits on the boundary
  double circumradius() const override { return R_; }

  bool member(const Vec& y, double tol) const {
    if (y.minCoeff() < -tol) return false;
    const Vec yc = y.cwiseMax(0.0);
    return value_(yc) >= phi_ * yc.norm() - tol;
  }

  Vec boundary_at(double w) const {
    Vec d(2);
    d << std::cos(w), std::sin(w);
    const double v = value_(d);
    if (v <= 0.0) return Vec::Zero(2);
    const double t = std::pow(v / phi_, 1.0 / (1.0 - k_));
    return t * d;
  }

  Vec project(const Vec& z) const override {
    if (member(z, 1e-12)) return z.cwiseMax(0.0);
    Vec best = Vec::Zero(2);
    double best_d = z.norm();
    auto consider = [&](const Vec& cand) {
      const double d = (z - cand).norm();
      if (d < best_d) {
        best_d = d;
        best = cand;
      }
    };
    // Curve candidates on a grid, then golden refinement around the best.
    const int grid = 512;
    double best_w = 0.0;
    double best_curve = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
      const double w = 0.5 * M_PI * double(i) / double(grid);
      const double d = (z - boundary_at(w)).norm();
      if (d < best_curve) {
        best_curve = d;
        best_w = w;
      }
    }
    const double span = 0.5 * M_PI / double(grid);
    const double w_ref = golden_min(
        [&](double w) { return (z - boundary_at(w)).norm(); },
        std::max(0.0, best_w - 2.0 * span), std::min(0.5 * M_PI, best_w + 2.0 * span));
    consider(boundary_at(w_ref));
    consider(boundary_at(best_w));
    // Axis segments belong to the boundary when v is positive there (CES).
    for (int axis = 0; axis < 2; ++axis) {
      const double cap = boundary_at(axis == 0 ? 0.0 : 0.5 * M_PI)[axis];
      if (cap <= 0.0) continue;
      Vec cand = Vec::Zero(2);
      cand[axis] = std::min(std::max(z[axis], 0.0), cap);
      if (member(cand, 1e-9)) consider(cand);
    }
    return best;
  }

  double boundary_distance(const Vec& y) const override {
    if (!member(y, kMembershipTol))
      throw std::invalid_argument("boundary_distance: point outside pricing body");
    double best = y.norm();  // origin is a boundary point
    const int grid = 512;
    double best_w = 0.0;
    for (int i = 0; i <= grid; ++i) {
      const double w = 0.5 * M_PI * double(i) / double(grid);
      const double d = (y - boundary_at(w)).norm();
      if (d < best) {
        best = d;
        best_w = w;
      }
    }
    const double span = 0.5 * M_PI / double(grid);
    const double w_ref = golden_min(
        [&](double w) { return (y - boundary_at(w)).norm(); },
        std::max(0.0, best_w - 2.0 * span), std::min(0.5 * M_PI, best_w + 2.0 * span));
    best = std::min(best, (y - boundary_at(w_ref)).norm());
    // Orthant facets count where they bound the body.
    for (int axis = 0; axis < 2; ++axis) {
      Vec foot = y;
      foot[axis] = 0.0;
      if (member(foot, 1e-9)) best = std::min(best, y[axis]);
    }
    return best;
  }

  Vec nearest_boundary_point(const Vec& y) const override {
    const double w = golden_min([&](double ww) { return (y - boundary_at(ww)).norm(); }, 0.0,
                                0.5 * M_PI, 120);
    return boundary_at(w);
  }

  std::string kind() const override { return "pricing_sublevel"; }

 private:
  std::function<double(const Vec&)> value_;
  double phi_, k_, R_;
  Vec anchor_;
};

CounterRng round_rng(std::uint64_t seed, std::uint64_t stream, int t) {
  return CounterRng(seed + 0x9e37 * std::uint64_t(t), stream);
}

}  // namespace

double PricingEnv::theta_at(int t) const {
  CounterRng rng = round_rng(seed, 0x707261, t);
  return theta_min + (1.0 - theta_min) * rng.uniform();
}

double PricingEnv::cost_slope_at(int t) const {
  CounterRng rng = round_rng(seed, 0x707262, t);
  return cost_slope_max * rng.uniform();
}

double PricingEnv::cost(int t, const Vec& x) const {
  return (phi + cost_slope_at(t)) * x.norm() + C0;
}

Vec PricingEnv::cost_grad(int t, const Vec& x) const {
  const double n = x.norm();
  if (n < 1e-14) return Vec::Zero(x.size());
  return ((phi + cost_slope_at(t)) / n) * x;
}

double pricing_value(const PricingEnv& env, const Vec& y) {
  if (env.valuation == PricingEnv::Valuation::cobb_douglas) {
    double v = 1.0;
    for (int i = 0; i < y.size(); ++i) v *= std::pow(std::max(y[i], 0.0), env.alpha[i]);
    return v;
  }
  double s = 0.0;
  for (int i = 0; i < y.size(); ++i) s += env.alpha[i] * std::pow(std::max(y[i], 0.0), env.kappa);
  return std::pow(s, env.beta_exp);
}

Vec pricing_value_grad(const PricingEnv& env, const Vec& y) {
  const int n = int(y.size());
  Vec g(n);
  if (env.valuation == PricingEnv::Valuation::cobb_douglas) {
    const double v = pricing_value(env, y);
    for (int i = 0; i < n; ++i) g[i] = env.alpha[i] * v / y[i];
    return g;
  }
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += env.alpha[i] * std::pow(y[i], env.kappa);
  const double outer = env.beta_exp * std::pow(s, env.beta_exp - 1.0);
  for (int i = 0; i < n; ++i)
    g[i] = outer * env.alpha[i] * env.kappa * std::pow(y[i], env.kappa - 1.0);
  return g;
}

Vec pricing_price_for_target(const PricingEnv& env, const Vec& y_target) {
  if (y_target.minCoeff() <= 0.0)
    throw std::invalid_argument("pricing_price_for_target: target must be strictly positive");
  return pricing_value_grad(env, y_target);
}

Vec pricing_demand_point(const PricingEnv& env, const Vec& prices) {
  const int n = int(prices.size());
  Vec u(n);
  if (env.valuation == PricingEnv::Valuation::cobb_douglas) {
    // u_i = alpha_i v / p_i with v determined by homogeneity.
    double log_prod = 0.0;
    for (int i = 0; i < n; ++i) log_prod += env.alpha[i] * std::log(env.alpha[i] / prices[i]);
    const double v = std::exp(log_prod / (1.0 - env.k_hom));
    for (int i = 0; i < n; ++i) u[i] = env.alpha[i] * v / prices[i];
    return u;
  }
  // CES: u = c * w with w_i = (p_i / (alpha_i kappa))^{1/(kappa-1)} and the
  // scalar c fixed by the outer exponent.
  Vec w(n);
  double s_w = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = std::pow(prices[i] / (env.alpha[i] * env.kappa), 1.0 / (env.kappa - 1.0));
    s_w += env.alpha[i] * std::pow(w[i], env.kappa);
  }
  const double c = std::pow(env.beta_exp * std::pow(s_w, env.beta_exp - 1.0),
                            1.0 / (1.0 - env.kappa * env.beta_exp));
  return c * w;
}

Vec pricing_best_response(const PricingEnv& env, const Vec& prices, double theta,
                          const Vec& y_prev) {
  const Vec base = (1.0 - theta) * y_prev;
  const Vec u = pricing_demand_point(env, prices);
  if ((u - base).minCoeff() >= 0.0) return u - base;
  // A coordinate constraint binds (n = 2): fix it at zero and solve the
  // remaining first-order condition along the free coordinate.
  Vec best = Vec::Zero(2);
  double best_util = pricing_value(env, base);  // buy nothing
  for (int fixed = 0; fixed < 2; ++fixed) {
    const int free = 1 - fixed;
    const double lo = 1e-9;
    const double hi = env.R;
    const double x_free = golden_min(
        [&](double x) {
          Vec xx = Vec::Zero(2);
          xx[free] = x;
          return -(pricing_value(env, base + xx) - prices.dot(xx));
        },
        lo, hi, 120);
    Vec cand = Vec::Zero(2);
    cand[free] = x_free;
    const double util = pricing_value(env, base + cand) - prices.dot(cand);
    if (util > best_util) {
      best_util = util;
      best = cand;
    }
  }
  return best;
}

double pricing_surrogate_reward(const PricingEnv& env, const Vec& y, int t) {
  const double theta = env.theta_at(t);
  return theta * env.k_hom * pricing_value(env, y) - env.cost(t, theta * y);
}

namespace {

PricingEnv finalize_env(PricingEnv env) {
  // V = max of v over the unit quarter-circle, then the circumradius bound.
  auto neg_v_at = [&](double w) {
    Vec d(2);
    d << std::cos(w), std::sin(w);
    return -pricing_value(env, d);
  };
  const double w_star = golden_min(neg_v_at, 0.0, 0.5 * M_PI, 120);
  double V = -neg_v_at(w_star);
  for (int i = 0; i <= 64; ++i)
    V = std::max(V, -neg_v_at(0.5 * M_PI * double(i) / 64.0));
  env.V = V;
  env.R = std::pow(V / env.phi, 1.0 / (1.0 - env.k_hom));

  // Anchor with a unit ball inside: walk the max-value ray outward.
  Vec d(2);
  d << std::cos(w_star), std::sin(w_star);
  bool found = false;
  for (double s = 1.5; s < env.R && !found; s *= 1.3) {
    const Vec cand = s * d;
    bool ok = cand.minCoeff() >= 1.0 + 1e-6;
    for (int i = 0; i < 64 && ok; ++i) {
      const double ang = 2.0 * M_PI * double(i) / 64.0;
      Vec p = cand;
      p[0] += std::cos(ang);
      p[1] += std::sin(ang);
      ok = p.minCoeff() >= 0.0 && pricing_value(env, p) >= env.phi * p.norm() + 1e-9;
    }
    if (ok) {
      env.y1 = cand;
      found = true;
    }
  }
  if (!found)
    throw std::invalid_argument("pricing env: phi too large, no unit ball fits the state space");

  // Hoelder constant of v over the body. Cobb-Douglas: |v(y)-v(y')| <=
  // sum_i R^{k-a_i} |d_i|^{a_i}, converted to the binding exponent beta via
  // ||d|| <= 2R. CES with unit outer exponent: subadditivity of t^kappa plus
  // the Hoelder inequality over the weights.
  const double beta = env.holder_beta;
  double lambda = 0.0;
  if (env.valuation == PricingEnv::Valuation::cobb_douglas) {
    for (int i = 0; i < env.alpha.size(); ++i)
      lambda += std::pow(env.R, env.k_hom - env.alpha[i]) *
                std::pow(2.0 * env.R, env.alpha[i] - beta);
  } else if (env.beta_exp == 1.0) {
    double wsum = 0.0;
    for (int i = 0; i < env.alpha.size(); ++i)
      wsum += std::pow(env.alpha[i], 1.0 / (1.0 - env.kappa));
    lambda = std::pow(wsum, 1.0 - env.kappa) * std::pow(2.0, env.kappa / 2.0);
  } else {
    // Conservative sampled estimate for general outer exponents.
    CounterRng rng(0x686f65);
    for (int i = 0; i < 4000; ++i) {
      Vec a(2), b(2);
      a << env.R * rng.uniform(), env.R * rng.uniform();
      b << env.R * rng.uniform(), env.R * rng.uniform();
      const double gap = std::abs(pricing_value(env, a) - pricing_value(env, b));
      const double den = std::pow((a - b).norm(), beta);
      if (den > 1e-9) lambda = std::max(lambda, gap / den);
    }
    lambda *= 1.5;
  }
  env.holder_lambda = std::max(1.0, 1.1 * lambda);
  return env;
}

}  // namespace

PricingEnv make_ces_env(Vec alpha, double kappa, double beta_exp, double phi, double C0,
                        double theta_min, std::uint64_t seed) {
  if (alpha.size() != 2) throw std::invalid_argument("pricing env: two goods only");
  PricingEnv env;
  env.valuation = PricingEnv::Valuation::ces;
  env.alpha = std::move(alpha);
  env.kappa = kappa;
  env.beta_exp = beta_exp;
  env.k_hom = kappa * beta_exp;
  if (env.k_hom <= 0.0 || env.k_hom >= 1.0)
    throw std::invalid_argument("pricing env: homogeneity degree must lie in (0,1)");
  env.holder_beta = kappa;  // the binding exponent near the axes
  env.phi = phi;
  env.C0 = C0;
  env.theta_min = theta_min;
  env.seed = seed;
  return finalize_env(std::move(env));
}

PricingEnv make_cobb_douglas_env(Vec alpha, double phi, double C0, double theta_min,
                                 std::uint64_t seed) {
  if (alpha.size() != 2) throw std::invalid_argument("pricing env: two goods only");
  PricingEnv env;
  env.valuation = PricingEnv::Valuation::cobb_douglas;
  env.alpha = alpha;
  env.k_hom = alpha.sum();
  if (env.k_hom <= 0.0 || env.k_hom >= 1.0)
    throw std::invalid_argument("pricing env: exponents must sum inside (0,1)");
  env.holder_beta = std::min(alpha[0], alpha[1]);
  env.phi = phi;
  env.C0 = C0;
  env.theta_min = theta_min;
  env.seed = seed;
  return finalize_env(std::move(env));
}

ConvexBody pricing_state_space(const PricingEnv& env) {
  PricingEnv copy = env;
  auto value = [copy](const Vec& y) { return pricing_value(copy, y); };
  return ConvexBody(
      std::make_shared<PricingBody>(value, env.phi, env.k_hom, env.R, env.y1));
}

DynamicsModel pricing_dynamics_model(const PricingEnv& env) {
  DynamicsModel m;
  m.name = "pricing";
  const ConvexBody body = pricing_state_space(env);
  const Vec y1 = env.y1;
  m.state_space = body.recentered(y1, env.R + y1.norm());
  m.action_space = ConvexBody::box(Vec::Zero(2), Vec::Constant(2, 1e12));
  m.rho = env.theta_min;
  m.mode = DynamicsModel::Mode::weak;
  m.time_varying = true;

  PricingEnv env_copy = env;
  m.evaluator = [env_copy, y1](const Vec& prices, const Vec& y_prev_c, int t) {
    const Vec y_prev = y_prev_c + y1;
    const double theta = env_copy.theta_at(t);
    const Vec bundle = pricing_best_response(env_copy, prices, theta, y_prev);
    return Vec((1.0 - theta) * y_prev + bundle - y1);
  };
  m.custom_solver = [env_copy, y1](const Vec& y_prev_c, const Vec& target_c,
                                   int) -> SolveResult {
    const Vec target = target_c + y1;
    return {pricing_price_for_target(env_copy, target), 0.0};
  };
  return m;
}

LossStreamPtr pricing_surrogate_loss(const PricingEnv& env) {
  PricingEnv env_copy = env;
  const Vec y1 = env.y1;
  auto value = [env_copy, y1](int t, const Vec& yc) {
    return -pricing_surrogate_reward(env_copy, yc + y1, t);
  };
  auto grad = [env_copy, y1](int t, const Vec& yc) {
    const Vec y = yc + y1;
    const double theta = env_copy.theta_at(t);
    const Vec g_v = pricing_value_grad(env_copy, y);
    const Vec g_c = env_copy.cost_grad(t, theta * y);
    return Vec(-(theta * env_copy.k_hom * g_v) + theta * g_c);
  };
  const double L = env.surrogate_L();
  return functional_loss(value, grad, L, L, env.holder_beta, false);
}

double pricing_recover_theta(const Vec& y_prev, const Vec& y_next, const Vec& bundle) {
  double theta = -1.0;
  for (int i = 0; i < y_prev.size(); ++i) {
    if (y_prev[i] <= 1e-6) continue;
    const double t_i = 1.0 - (y_next[i] - bundle[i]) / y_prev[i];
    if (theta < 0.0)
      theta = t_i;
    else if (std::abs(theta - t_i) > 1e-8)
      throw std::runtime_error("pricing_recover_theta: inconsistent consumption across goods");
  }
  if (theta < 0.0) throw std::runtime_error("pricing_recover_theta: no usable coordinate");
  return theta;
}

}  // namespace nestctl
