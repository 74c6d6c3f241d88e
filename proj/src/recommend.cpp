#include "nestctl/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nestctl {

RecommendationEnv make_affine_score_env(int n, int k, double lambda, double sigma,
                                        double theta_min,
                                        std::function<double(int)> theta_schedule) {
  RecommendationEnv env;
  env.n = n;
  env.k = k;
  env.lambda = lambda;
  env.sigma = sigma;
  env.score_floor = lambda;
  env.theta_min = theta_min;
  env.theta_schedule = std::move(theta_schedule);
  env.score = [lambda](int i, const Vec& v) { return (1.0 - lambda) * v[i] + lambda; };
  return env;
}

Vec rec_choice_distribution(const RecommendationEnv& env, const std::vector<int>& menu,
                            const Vec& v) {
  if (int(menu.size()) != env.k) throw std::invalid_argument("rec_choice_distribution: |menu| != k");
  Vec p = Vec::Zero(env.n);
  double total = 0.0;
  for (int i : menu) total += env.score(i, v);
  for (int i : menu) p[i] = env.score(i, v) / total;
  return p;
}

MenuTimes rec_menu_times(const Vec& p, const Vec& v, int k, const RecommendationEnv& env) {
  MenuTimes out;
  out.mu = Vec::Zero(env.n);
  double denom = 0.0;
  Vec ratio(env.n);
  for (int i = 0; i < env.n; ++i) {
    const double s = env.score(i, v);
    if (p[i] > 0.0 && s < env.score_floor - 1e-12)
      throw std::invalid_argument("rec_menu_times: score below floor for supported item");
    ratio[i] = s > 0.0 ? p[i] / s : 0.0;
    denom += ratio[i];
  }
  if (denom <= 0.0) throw std::invalid_argument("rec_menu_times: degenerate target distribution");
  for (int i = 0; i < env.n; ++i) out.mu[i] = double(k) * ratio[i] / denom;
  out.in_ird = out.mu.maxCoeff() <= 1.0 + 1e-12;
  return out;
}

MenuDistribution rec_menu_synthesis(const Vec& p, const Vec& v, int k,
                                    const RecommendationEnv& env) {
  const MenuTimes mt = rec_menu_times(p, v, k, env);
  if (!mt.in_ird) throw std::invalid_argument("rec_menu_synthesis: target outside IRD(v)");
  const int n = env.n;
  Vec mu = mt.mu.cwiseMin(1.0);

  // Item i owns [cum_{i-1}, cum_i) on [0, k). A menu is the k-set hit by
  // {tau + j : j = 0..k-1}; distinct menus correspond to segments of tau in
  // [0, 1) delimited by the fractional parts of the cumulative sums.
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + mu[i];
  cum[n] = double(k);  // guard against rounding drift

  std::vector<double> cuts{0.0, 1.0};
  for (int i = 1; i < n; ++i) {
    double f = cum[i] - std::floor(cum[i]);
    if (f > 1e-14 && f < 1.0 - 1e-14) cuts.push_back(f);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             cuts.end());

  auto item_at = [&](double pos) {
    const auto it = std::upper_bound(cum.begin(), cum.end(), pos);
    int idx = int(it - cum.begin()) - 1;
    return std::min(std::max(idx, 0), n - 1);
  };

  MenuDistribution out;
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double len = cuts[s + 1] - cuts[s];
    if (len < 1e-14) continue;
    const double tau = 0.5 * (cuts[s] + cuts[s + 1]);
    std::vector<int> menu;
    for (int j = 0; j < k; ++j) menu.push_back(item_at(tau + double(j)));
    std::sort(menu.begin(), menu.end());
    out.menus.push_back(std::move(menu));
    out.z_probs.push_back(len);
  }

  // Reweight x(K) proportional to z(K) * sum of menu scores so the induced
  // choice distribution matches p exactly.
  out.probs = out.z_probs;
  double norm = 0.0;
  for (size_t m = 0; m < out.menus.size(); ++m) {
    double s_menu = 0.0;
    for (int i : out.menus[m]) s_menu += env.score(i, v);
    out.probs[m] *= s_menu;
    norm += out.probs[m];
  }
  for (double& q : out.probs) q /= norm;
  return out;
}

Vec rec_menu_marginals(const MenuDistribution& d, int n) {
  Vec m = Vec::Zero(n);
  for (size_t i = 0; i < d.menus.size(); ++i)
    for (int item : d.menus[i]) m[item] += d.z_probs[i];
  return m;
}

Vec rec_induced_choice(const RecommendationEnv& env, const MenuDistribution& d, const Vec& v) {
  Vec p = Vec::Zero(env.n);
  for (size_t m = 0; m < d.menus.size(); ++m)
    p += d.probs[m] * rec_choice_distribution(env, d.menus[m], v);
  return p;
}

RecBenchmark rec_benchmark_body(const RecommendationEnv& env, const std::string& variant,
                                double eps, double phi) {
  const int n = env.n;
  const int k = env.k;
  RecBenchmark out;
  out.center = Vec::Constant(n, 1.0 / double(n));
  if (variant == "eird_ball") {
    if (eps <= 0.0) throw std::invalid_argument("rec_benchmark_body: eird_ball needs eps > 0");
    if (env.lambda < double(k - 1) / double(n - 1) + eps - 1e-12)
      throw std::invalid_argument("rec_benchmark_body: lambda below (k-1)/(n-1) + eps");
    const double rho =
        eps * (2.0 * double(n - 1) / (std::sqrt(2.0) * double(n))) / (double(n * (k - 1)) + eps);
    out.body = ConvexBody::hull_ball(out.center, rho);
    out.radius = rho;
    out.rho_lc = env.theta_min;
    return out;
  }
  if (variant == "smoothed_simplex") {
    if (env.sigma <= 1.0 || env.sigma > std::sqrt(4.0 * double(n - 1) / double(k)) + 1e-12)
      throw std::invalid_argument("rec_benchmark_body: sigma out of scale-bounded range");
    if (phi <= 0.0) phi = std::min(0.9, double(k) * env.lambda * env.sigma * env.sigma);
    out.body = ConvexBody::smoothed_simplex(n, phi);
    // Feasible radius around v is min(lambda*phi, pi(v)); normalizing by the
    // largest boundary distance realizes Omega(theta*lambda*phi).
    const double pi_max = (1.0 - phi) / std::sqrt(double(n) * double(n - 1));
    out.rho_lc = env.theta_min * std::min(1.0, env.lambda * phi / pi_max);
    out.radius = phi;
    return out;
  }
  throw std::invalid_argument("rec_benchmark_body: unknown variant " + variant);
}

DynamicsModel rec_dynamics_model(const RecommendationEnv& env, const RecBenchmark& bench) {
  DynamicsModel m;
  m.name = "recommendation";
  const Vec center = bench.center;
  m.state_space = bench.body.recentered(center, bench.radius > 0 ? bench.radius : -1.0);
  m.action_space = ConvexBody::simplex(env.n);
  m.rho = bench.rho_lc;
  m.mode = DynamicsModel::Mode::weak;
  m.time_varying = true;

  RecommendationEnv env_copy = env;
  m.evaluator = [env_copy, center](const Vec& p_target, const Vec& y, int t) {
    const Vec v = y + center;
    const MenuDistribution d = rec_menu_synthesis(p_target, v, env_copy.k, env_copy);
    const Vec p = rec_induced_choice(env_copy, d, v);
    const double theta = env_copy.theta_at(t);
    return Vec((1.0 - theta) * v + theta * p - center);
  };
  m.custom_solver = [env_copy, center](const Vec& y_prev, const Vec& target,
                                       int t) -> SolveResult {
    const Vec v = y_prev + center;
    const Vec v_target = target + center;
    const double theta = env_copy.theta_at(t);
    Vec p_star = v + (v_target - v) / theta;
    MenuTimes mt = rec_menu_times(p_star, v, env_copy.k, env_copy);
    if (!mt.in_ird) {
      // Shrink toward the centroid (in EIRD) until realizable.
      double lo = 0.0, hi = 1.0;
      const Vec anchor = center;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Vec cand = anchor + mid * (p_star - anchor);
        if (rec_menu_times(cand, v, env_copy.k, env_copy).in_ird)
          lo = mid;
        else
          hi = mid;
      }
      p_star = anchor + lo * (p_star - anchor);
    }
    return {p_star, 0.0};
  };
  return m;
}

}  // namespace nestctl
