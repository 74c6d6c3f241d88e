#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nestctl/dynamics.hpp"

namespace nestctl {

// Menu recommendation environment: an agent picks items from size-k menus in
// proportion to preference scores over its memory vector, and the memory
// moves toward the realized choice distribution at speed theta_t.
struct RecommendationEnv {
  int n = 0;
  int k = 0;
  std::function<double(int item, const Vec& v)> score;  // s_i(v)
  double score_floor = 0.0;                             // lambda (or lambda/sigma)
  double lambda = 0.0;
  double sigma = 1.0;
  double theta_min = 1.0;
  std::function<double(int t)> theta_schedule;  // theta_t in [theta_min, 1]

  double theta_at(int t) const { return theta_schedule ? theta_schedule(t) : theta_min; }
  Vec scores_at(const Vec& v) const {
    Vec s(n);
    for (int i = 0; i < n; ++i) s[i] = score(i, v);
    return s;
  }
};

// Everywhere-uniform scores s_i(v) = (1 - lambda) * v_i + lambda.
RecommendationEnv make_affine_score_env(int n, int k, double lambda, double sigma,
                                        double theta_min,
                                        std::function<double(int)> theta_schedule = nullptr);

// Agent's choice distribution conditioned on a menu.
Vec rec_choice_distribution(const RecommendationEnv& env, const std::vector<int>& menu,
                            const Vec& v);

struct MenuTimes {
  Vec mu;
  bool in_ird = false;
};

// Menu times mu_i = k*(p_i/s_i) / sum_j(p_j/s_j); p is realizable at v iff
// every mu_i <= 1.
MenuTimes rec_menu_times(const Vec& p, const Vec& v, int k, const RecommendationEnv& env);

struct MenuDistribution {
  std::vector<std::vector<int>> menus;
  std::vector<double> probs;    // score-reweighted mixture x(K)
  std::vector<double> z_probs;  // systematic-sampling decomposition z(K)
};

// Exact menu-distribution synthesis: systematic-sampling decomposition of the
// menu times into at most n+k menus whose inclusion marginals under z equal
// mu exactly, then score reweighting x(K) ~ z(K) * S_K so the induced choice
// distribution equals p.
MenuDistribution rec_menu_synthesis(const Vec& p, const Vec& v, int k,
                                    const RecommendationEnv& env);

// Inclusion marginals of the decomposition z (for audits against mu).
Vec rec_menu_marginals(const MenuDistribution& d, int n);
// Choice distribution induced by mixing menus.
Vec rec_induced_choice(const RecommendationEnv& env, const MenuDistribution& d, const Vec& v);

struct RecBenchmark {
  ConvexBody body;   // state space in ambient simplex coordinates
  Vec center;        // run origin (u_n)
  double rho_lc = 0.0;
  double radius = 0.0;  // inner-ball radius for the eird variant
};

// Benchmark state spaces: certified inner ball of EIRD, or the smoothed
// simplex for scale-bounded scores.
RecBenchmark rec_benchmark_body(const RecommendationEnv& env, const std::string& variant,
                                double eps = 0.0, double phi = -1.0);

// Dynamics over the recentered benchmark body. Actions are target choice
// distributions p in Delta(n); the evaluator synthesizes an exact menu
// distribution each round and advances the memory vector.
DynamicsModel rec_dynamics_model(const RecommendationEnv& env, const RecBenchmark& bench);

}  // namespace nestctl
