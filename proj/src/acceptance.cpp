#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Dense>

#include "nestctl/harness.hpp"
#include "nestctl/pricing.hpp"
#include "nestctl/recommend.hpp"
#include "nestctl/rng.hpp"

namespace nestctl {

namespace {

struct Check {
  CriterionResult result;

  explicit Check(int id, std::string name) {
    result.id = id;
    result.name = std::move(name);
    result.pass = true;
  }

  void require(bool ok, const std::string& detail) {
    result.details.push_back((ok ? "  ok   " : "  FAIL ") + detail);
    if (!ok) result.pass = false;
  }

  void note(const std::string& detail) { result.details.push_back("       " + detail); }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

RunRecord run_preset(const std::string& json) {
  const ScenarioConfig cfg = parse_config_text(json);
  return run_scenario(cfg, cfg.seeds[0]);
}

struct FeasibilityStats {
  double max_target_step_excess = -1e18;  // ||target_t - y_{t-1}|| - r*delta*rho
  double max_residual = 0.0;
  double max_ftrl_step_excess = -1e18;  // consecutive targets vs the step bound
  int rounds = 0;
};

FeasibilityStats feasibility_stats(const TrajectoryLog& log) {
  FeasibilityStats st;
  const double reach_cap = log.r * log.delta * log.rho_inner;
  Vec prev_state = Vec::Zero(log.rows.empty() ? 0 : log.rows.front().state.size());
  for (size_t t = 0; t < log.rows.size(); ++t) {
    const auto& row = log.rows[t];
    st.max_target_step_excess =
        std::max(st.max_target_step_excess, (row.target - prev_state).norm() - reach_cap);
    st.max_residual = std::max(st.max_residual, row.residual);
    if (t + 1 < log.rows.size())
      st.max_ftrl_step_excess =
          std::max(st.max_ftrl_step_excess,
                   (log.rows[t + 1].target - row.target).norm() - log.step_bound);
    prev_state = row.state;
    ++st.rounds;
  }
  return st;
}

// Shared across criteria 1 and 2: the no-disturbance FTRL-driven runs.
struct SuiteCache {
  std::map<int, RunRecord> d1_runs;  // T -> record
  std::optional<RunRecord> rec_run;
  std::optional<RunRecord> pricing_run;

  const RunRecord& d1(int T) {
    auto it = d1_runs.find(T);
    if (it == d1_runs.end()) {
      it = d1_runs
               .emplace(T, run_preset(R"({"preset":"oen-ftrl-d1","seed":1,"T":)" +
                                      std::to_string(T) + "}"))
               .first;
    }
    return it->second;
  }
  const RunRecord& rec() {
    if (!rec_run) rec_run = run_preset(R"({"preset":"rec-eird","T":1024,"seed":1})");
    return *rec_run;
  }
  const RunRecord& pricing() {
    if (!pricing_run) pricing_run = run_preset(R"({"preset":"pricing-ces","T":4096,"seed":1})");
    return *pricing_run;
  }
};

// --------------------------------------------------------------------------

CriterionResult criterion_oen_ftrl_bound(SuiteCache& cache) {
  Check c(1, "oen-ftrl-bound");
  const auto start = std::chrono::steady_clock::now();
  std::map<int, double> regret;
  for (int T : {256, 1024, 4096}) {
    const RunRecord& rec = cache.d1(T);
    regret[T] = rec.summary.final_regret;
    c.require(rec.summary.final_regret <= rec.summary.bound,
              "T=" + std::to_string(T) + " regret " + num(rec.summary.final_regret) +
                  " <= bound " + num(rec.summary.bound));
  }
  for (int T : {256, 1024}) {
    const double ratio = regret[4 * T] / regret[T];
    c.require(ratio <= 2.5, "sublinearity Reg(" + std::to_string(4 * T) + ")/Reg(" +
                                std::to_string(T) + ") = " + num(ratio) + " <= 2.5");
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.require(secs < 10.0, "runtime " + num(secs) + " s < 10 s");
  return c.result;
}

CriterionResult criterion_feasibility(SuiteCache& cache) {
  Check c(2, "feasibility-suite");
  auto audit = [&](const std::string& label, const TrajectoryLog& log) {
    const FeasibilityStats st = feasibility_stats(log);
    c.require(st.max_target_step_excess <= 1e-12,
              label + ": max target-step excess " + num(st.max_target_step_excess) + " <= 1e-12 (" +
                  std::to_string(st.rounds) + " rounds)");
    c.require(st.max_residual <= 1e-8,
              label + ": max solver residual " + num(st.max_residual) + " <= 1e-8");
    c.require(st.max_ftrl_step_excess <= 1e-12,
              label + ": max step-bound excess " + num(st.max_ftrl_step_excess) + " <= 1e-12");
  };
  for (int T : {256, 1024, 4096}) audit("d1 T=" + std::to_string(T), cache.d1(T).log);
  audit("rec-eird", cache.rec().log);
  audit("pricing-ces", cache.pricing().log);
  return c.result;
}

CriterionResult criterion_boundary_push(SuiteCache&) {
  Check c(3, "boundary-push-threshold");
  const double rho = 0.5, beta = 0.0, d0 = 1.0;
  const int T = 500;
  const double factor = 1.0 - (1.0 - beta) * rho * rho / (1.0 + beta * rho);  // 0.75
  const double spend_cap = d0 * (rho + rho * rho) / ((1.0 - beta) * rho * rho);
  for (const std::string ctrl : {"oen_ftrl", "oen_ftrl_ap", "oen_ftrl_uap"}) {
    const RunRecord rec = run_preset(R"({"preset":"boundary-push","T":500,"controller":")" + ctrl +
                                     R"(","seed":1})");
    double max_decay_excess = -1e18;
    double regret = 0.0;
    for (const auto& row : rec.log.rows) {
      const double d_t = 1.0 - row.state.norm();
      if (row.t <= 40)
        max_decay_excess = std::max(max_decay_excess, d_t - std::pow(factor, row.t) * d0);
      regret += row.loss;  // f_t = ||y_t - y_0||, comparator y_0 has zero loss
    }
    c.require(max_decay_excess <= 1e-9,
              ctrl + ": d_t - 0.75^t excess " + num(max_decay_excess) + " <= 1e-9 (t <= 40)");
    const double spend = rec.summary.extras.at("adversary_spend");
    c.require(spend <= spend_cap + 1e-6,
              ctrl + ": disturbance spend " + num(spend) + " <= " + num(spend_cap));
    c.require(regret >= 0.2 * d0 * T,
              ctrl + ": distance-loss regret " + num(regret) + " >= " + num(0.2 * d0 * T));
  }
  return c.result;
}

CriterionResult criterion_radial_push(SuiteCache&) {
  Check c(4, "bounded-disturbance-sandwich");
  const RunRecord rec = run_preset(R"({"preset":"radial-push-ap","T":1000,"seed":1})");
  c.require(rec.summary.final_regret <= rec.summary.bound,
            "regret " + num(rec.summary.final_regret) + " <= bound " + num(rec.summary.bound));
  // Forced per-round loss floor L*(rho - alpha*rho)/(1+rho) = 1/6 while the
  // budget lasts (full-cap pushes only).
  const double floor = 1.0 / 6.0;
  const double budget = 5.0;
  double spent = 0.0;
  double min_forced = 1e18;
  for (const auto& row : rec.log.rows) {
    const double cap = floor * (1.0 - row.undisturbed.norm());
    const double w = row.disturbance.norm();
    if (spent + cap <= budget - 1e-9 && w >= cap - 1e-12)
      min_forced = std::min(min_forced, row.loss);
    spent += w;
  }
  c.require(min_forced >= floor - 1e-9,
            "forced per-round loss floor " + num(min_forced) + " >= 1/6 - 1e-9");
  c.require(rec.summary.extras.at("adversary_spend") <= budget + 1e-12,
            "budget respected: spend " + num(rec.summary.extras.at("adversary_spend")));
  return c.result;
}

CriterionResult criterion_pin1d(SuiteCache&) {
  Check c(5, "unbounded-disturbance-sandwich");
  const RunRecord rec = run_preset(R"({"preset":"pin1d-uap","T":1000,"seed":1})");
  const double lower = 80.0;
  c.require(rec.summary.final_regret >= lower - 1e-6,
            "adversary forces regret " + num(rec.summary.final_regret) + " >= 80 - 1e-6");
  const double upper = 2.0 * std::sqrt(1000.0 * 0.5) + 2.0 * 10.0 / ((1.0 - 0.1) * 0.25);
  c.require(rec.summary.final_regret <= upper + 1e-6,
            "controller keeps regret <= " + num(upper) + " + 1e-6");
  return c.result;
}

CriterionResult criterion_prop2(SuiteCache&) {
  Check c(6, "policy-separation");
  DynamicsModel model = make_prop2_instance(2);
  Vec p(2);
  p << 0.5, 0.0;
  auto losses = norm_loss(p, 2);
  const int T = 1000;
  const double expected = double(T) * p.squaredNorm();

  std::vector<Mat> Ks = {Mat::Zero(2, 2), Mat::Identity(2, 2)};
  CounterRng rng(0x70726f70);
  for (int i = 0; i < 20; ++i) {
    Mat K(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int col = 0; col < 2; ++col) K(r, col) = 2.0 * rng.gaussian();
    Ks.push_back(K);
  }
  double worst_dev = 0.0;
  for (const Mat& K : Ks) {
    const TrajectoryLog log = linear_policy_run(model, *losses, K, T);
    double total = 0.0;
    for (const auto& row : log.rows) total += row.loss;
    worst_dev = std::max(worst_dev, std::abs(total - expected));
  }
  c.require(worst_dev <= 1e-9, "every sampled K yields regret exactly " + num(expected) +
                                   " (max deviation " + num(worst_dev) + ")");

  const TrajectoryLog st = state_targeting_run(model, *losses, p, T);
  double st_total = 0.0;
  for (const auto& row : st.rows) st_total += row.loss;
  c.require(st_total <= 10.0 * std::sqrt(double(T)),
            "state-targeting regret " + num(st_total) + " <= 10*sqrt(T) = " +
                num(10.0 * std::sqrt(double(T))));
  return c.result;
}

CriterionResult criterion_probing(SuiteCache&) {
  Check c(7, "probing-oco");
  std::map<int, RunRecord> recs;
  for (int T : {1024, 4096})
    recs.emplace(T, run_preset(R"({"preset":"probing-const","seed":1,"T":)" + std::to_string(T) +
                               "}"));
  for (auto& [T, rec] : recs)
    c.require(rec.summary.extras.at("max_fit_error") <= 0.1,
              "T=" + std::to_string(T) + " max ||A_hat - A||_F = " +
                  num(rec.summary.extras.at("max_fit_error")) + " <= 0.1");
  const double ratio = recs.at(4096).summary.final_regret / recs.at(1024).summary.final_regret;
  c.require(ratio < 3.0, "Reg(4T)/Reg(T) = " + num(ratio) + " < 3");
  return c.result;
}

CriterionResult criterion_nested_bco(SuiteCache&) {
  Check c(8, "nested-bco");
  std::map<int, double> mean_scaled;
  double worst_step_excess = -1e18;
  for (int T : {1024, 4096, 16384}) {
    double total = 0.0;
    const double probe = std::pow(double(T), -0.25);
    for (int seed = 1; seed <= 20; ++seed) {
      const ScenarioConfig cfg = parse_config_text(
          R"({"preset":"nested-bco","T":)" + std::to_string(T) + R"(,"seed":)" +
          std::to_string(seed) + "}");
      const RunRecord rec = run_scenario(cfg, seed);
      total += rec.summary.final_regret;
      const double step_cap = 2.0 * probe + rec.log.eta * 2.0 * 1.0 / probe;
      for (size_t t = 0; t + 1 < rec.log.rows.size(); ++t)
        worst_step_excess = std::max(
            worst_step_excess,
            (rec.log.rows[t + 1].target - rec.log.rows[t].target).norm() - step_cap);
    }
    mean_scaled[T] = (total / 20.0) / std::pow(double(T), 0.75);
  }
  c.require(worst_step_excess <= 1e-12,
            "per-step norms never exceed 2*probe + eta*n*L/probe (max excess " +
                num(worst_step_excess) + ")");
  double lo = 1e18, hi = -1e18;
  for (const auto& [T, v] : mean_scaled) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    c.note("T=" + std::to_string(T) + ": mean Reg/T^{3/4} = " + num(v));
  }
  c.require(hi / lo <= 3.0, "mean Reg(T)/T^{3/4} spread " + num(hi / lo) + " <= 3x");
  return c.result;
}

// ---- recommendation helpers (independent oracles) -------------------------

std::vector<std::vector<int>> enumerate_menus(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (int(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

// Phase-1 simplex for feasibility of C x = p over the probability simplex.
bool lp_feasible(const Mat& C, const Vec& p, double tol = 1e-9) {
  const int m = int(C.rows());
  const int n = int(C.cols());
  Mat T(m + 1, n + m + 1);
  T.setZero();
  for (int i = 0; i < m; ++i) {
    const double sign = p[i] >= 0 ? 1.0 : -1.0;
    T.block(i, 0, 1, n) = sign * C.row(i);
    T(i, n + i) = 1.0;
    T(i, n + m) = sign * p[i];
  }
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += T(i, j);
    T(m, j) = -s;
  }
  double rhs = 0.0;
  for (int i = 0; i < m; ++i) rhs += T(i, n + m);
  T(m, n + m) = -rhs;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  for (int iter = 0; iter < 20000; ++iter) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j)
      if (T(m, j) < -1e-11) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i)
      if (T(i, enter) > 1e-11) {
        const double ratio = T(i, n + m) / T(i, enter);
        if (leave < 0 || ratio < best - 1e-12 ||
            (std::abs(ratio - best) <= 1e-12 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    if (leave < 0) break;
    T.row(leave) /= T(leave, enter);
    for (int i = 0; i <= m; ++i)
      if (i != leave) T.row(i) -= T(i, enter) * T.row(leave);
    basis[leave] = enter;
  }
  return std::abs(T(m, n + m)) <= tol;
}

CriterionResult criterion_recommendations(SuiteCache& cache) {
  Check c(9, "recommendations");
  CounterRng rng(0x726563);

  auto random_env = [&](int n, int k) {
    std::vector<double> lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = 0.3 + 0.35 * rng.uniform();
      hi[i] = lo[i] + (1.0 - lo[i]) * rng.uniform();
    }
    RecommendationEnv env;
    env.n = n;
    env.k = k;
    env.lambda = env.score_floor = 0.3;
    env.theta_min = 0.5;
    env.score = [lo, hi](int i, const Vec& v) { return lo[i] + (hi[i] - lo[i]) * v[i]; };
    return env;
  };
  auto random_simplex = [&](int n) {
    Vec v = rng.gaussian_vector(n).cwiseAbs();
    v /= v.sum();
    return v;
  };

  // (a) exact synthesis on 100 random realizable targets.
  double worst_synth = 0.0;
  int done = 0;
  while (done < 100) {
    const int n = 3 + rng.uniform_int(0, 4);
    const int k = 2 + rng.uniform_int(0, 1);
    if (k >= n) continue;
    RecommendationEnv env = random_env(n, k);
    const Vec v = random_simplex(n);
    const auto menus = enumerate_menus(n, k);
    Vec w = rng.gaussian_vector(int(menus.size())).cwiseAbs();
    w /= w.sum();
    Vec p = Vec::Zero(n);
    for (size_t m = 0; m < menus.size(); ++m)
      p += w[int(m)] * rec_choice_distribution(env, menus[m], v);
    const MenuDistribution d = rec_menu_synthesis(p, v, k, env);
    worst_synth = std::max(worst_synth, (rec_induced_choice(env, d, v) - p).norm());
    ++done;
  }
  c.require(worst_synth <= 1e-9,
            "(a) synthesis exact on 100 cases: max error " + num(worst_synth) + " <= 1e-9");

  // (b) menu-time criterion vs the LP feasibility oracle.
  int mismatches = 0;
  done = 0;
  while (done < 100) {
    const int n = 3 + rng.uniform_int(0, 3);
    const int k = 2 + rng.uniform_int(0, 1);
    if (k >= n) continue;
    RecommendationEnv env = random_env(n, k);
    const Vec v = random_simplex(n);
    const auto menus = enumerate_menus(n, k);
    Vec inside = Vec::Zero(n);
    for (const auto& menu : menus) inside += rec_choice_distribution(env, menu, v);
    inside /= double(menus.size());
    Vec vertex = Vec::Zero(n);
    vertex[rng.uniform_int(0, n - 1)] = 1.0;
    // Sweep the segment between a realizable point and a vertex.
    const double wmix = rng.uniform();
    const Vec q = (1.0 - wmix) * inside + wmix * vertex;
    const MenuTimes mt = rec_menu_times(q, v, k, env);
    if (std::abs(mt.mu.maxCoeff() - 1.0) < 1e-6) continue;
    Mat C(n, int(menus.size()));
    for (size_t m = 0; m < menus.size(); ++m)
      C.col(int(m)) = rec_choice_distribution(env, menus[m], v);
    if (mt.in_ird != lp_feasible(C, q)) ++mismatches;
    ++done;
  }
  c.require(mismatches == 0, "(b) mu-criterion vs LP oracle: " + std::to_string(mismatches) +
                                 " mismatches in 100 cases");

  // (c) every probed point of the certified ball is realizable everywhere.
  {
    const int n = 10, k = 2;
    RecommendationEnv env = make_affine_score_env(n, k, 0.25, 1.0, 0.2);
    const RecBenchmark bench = rec_benchmark_body(env, "eird_ball", 0.1);
    std::vector<Vec> points;
    points.push_back(bench.center);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (double f : {0.25, 0.5, 0.75, 1.0}) {
          Vec dir = Vec::Zero(n);
          dir[i] = 1.0;
          dir[j] = -1.0;
          points.push_back(bench.center + f * bench.radius / dir.norm() * dir);
        }
    std::vector<Vec> memories;
    for (int i = 0; i < n; ++i) memories.push_back(Vec::Unit(n, i));
    for (int i = 0; i < 40; ++i) memories.push_back(random_simplex(n));
    bool all_ok = true;
    for (const Vec& p : points)
      for (const Vec& v : memories)
        all_ok = all_ok && rec_menu_times(p, v, k, env).in_ird;
    c.require(all_ok, "(c) " + std::to_string(points.size()) + " ball points realizable at " +
                          std::to_string(memories.size()) + " memory vectors (radius " +
                          num(bench.radius) + ")");
  }

  // (d) regret of the EIRD-ball run against the theorem-shaped bound.
  const RunRecord& rec = cache.rec();
  c.require(rec.summary.final_regret <= rec.summary.bound,
            "(d) true-loss regret " + num(rec.summary.final_regret) + " <= bound " +
                num(rec.summary.bound));
  c.require(rec.summary.extras.at("max_synthesis_error") <= 1e-9,
            "(d) per-round synthesis error " + num(rec.summary.extras.at("max_synthesis_error")) +
                " <= 1e-9");
  return c.result;
}

CriterionResult criterion_pricing(SuiteCache& cache) {
  Check c(10, "pricing");
  CounterRng rng(0x707269);
  Vec a_ces(2), a_cd(2);
  a_ces << 1.0, 1.0;
  a_cd << 0.3, 0.4;
  const PricingEnv envs[2] = {make_ces_env(a_ces, 0.5, 1.0, 0.2, 0.1, 0.25, 1),
                              make_cobb_douglas_env(a_cd, 0.3, 0.1, 0.25, 1)};

  double worst_euler = 0.0;
  for (const auto& env : envs) {
    for (int i = 0; i < 100; ++i) {
      Vec y(2);
      y << 0.1 + 5.0 * rng.uniform(), 0.1 + 5.0 * rng.uniform();
      const double lhs = pricing_value_grad(env, y).dot(y);
      const double rhs = env.k_hom * pricing_value(env, y);
      worst_euler = std::max(worst_euler, std::abs(lhs - rhs) / std::abs(rhs));
    }
  }
  c.require(worst_euler <= 1e-8,
            "euler identity relative error " + num(worst_euler) + " <= 1e-8 (200 points)");

  // Best-response oracle vs the closed-form bundle.
  double worst_br = 0.0;
  for (int caseno = 0; caseno < 50; ++caseno) {
    const PricingEnv& env = envs[caseno % 2];
    Vec y_prev(2);
    y_prev << 1.0 + 2.0 * rng.uniform(), 1.0 + 2.0 * rng.uniform();
    const double theta = 0.25 + 0.75 * rng.uniform();
    Vec bump(2);
    bump << 0.3 + rng.uniform(), 0.3 + rng.uniform();
    const Vec y_target = (1.0 - theta) * y_prev + bump;
    const Vec prices = pricing_price_for_target(env, y_target);
    const Vec closed = y_target - (1.0 - theta) * y_prev;
    // Projected gradient ascent on the buyer's utility.
    Vec x = Vec::Constant(2, 0.5);
    const Vec base = (1.0 - theta) * y_prev;
    auto util = [&](const Vec& xx) { return pricing_value(env, base + xx) - prices.dot(xx); };
    double fx = util(x);
    double step = 1.0;
    for (int it = 0; it < 4000; ++it) {
      const Vec g = pricing_value_grad(env, base + x) - prices;
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        Vec cand = (x + step * g).cwiseMax(1e-12);
        const double fc = util(cand);
        if (fc > fx + 1e-14) {
          x = std::move(cand);
          fx = fc;
          moved = true;
          step *= 1.3;
          break;
        }
        step *= 0.5;
      }
      if (!moved && step < 1e-14) break;
    }
    worst_br = std::max(worst_br, (x - closed).norm());
  }
  c.require(worst_br <= 1e-4, "best-response oracle matches closed form: max gap " + num(worst_br) +
                                  " <= 1e-4 (50 cases)");

  const RunRecord& rec = cache.pricing();
  c.require(rec.summary.extras.at("max_gap_violation") <= 1e-9,
            "per-round surrogate gap within 2L||dy||^beta (max violation " +
                num(rec.summary.extras.at("max_gap_violation")) + ")");
  c.require(rec.summary.bound_ratio <= 1.0,
            "Hoelder run regret ratio " + num(rec.summary.bound_ratio) + " <= 1 at T=4096");
  return c.result;
}

CriterionResult criterion_steering(SuiteCache&) {
  Check c(11, "steering");
  const RunRecord fixed = run_preset(R"({"preset":"steering-fixed-game","T":10000,"seed":1})");
  const double T = 10000.0;
  const double avg = fixed.summary.extras.at("optimizer_average_reward");
  const double best = fixed.summary.extras.at("best_profile_average");
  c.require(avg >= best - 5.0 / std::sqrt(T),
            "fixed game: average reward " + num(avg) + " >= " + num(best) + " - 5/sqrt(T)");
  c.require(fixed.summary.extras.at("learner_regret") <=
                fixed.summary.extras.at("learner_regret_bound") + 1e-9,
            "fixed game: learner regret " + num(fixed.summary.extras.at("learner_regret")) +
                " <= 2*R_B*G_B*sqrt(T) = " +
                num(fixed.summary.extras.at("learner_regret_bound")));

  const RunRecord drift = run_preset(R"({"preset":"steering-drifting-game","T":10000,"seed":1})");
  c.require(drift.summary.extras.at("learner_regret") <=
                drift.summary.extras.at("learner_regret_bound") + 1e-9,
            "drifting game: learner regret within its bound");
  c.require(drift.summary.extras.at("max_disturbance_ratio") <= 1.0 + 1e-9,
            "drifting game: every |w_t| <= theta*eps_t (max ratio " +
                num(drift.summary.extras.at("max_disturbance_ratio")) + ")");
  c.require(drift.summary.final_regret <= drift.summary.bound,
            "drifting game: regret " + num(drift.summary.final_regret) +
                " <= inner bound + sqrt(2)*L*eps_total/(1-alpha) = " + num(drift.summary.bound));
  c.note("eps_total = " + num(drift.summary.extras.at("eps_total")));
  return c.result;
}

CriterionResult criterion_determinism(SuiteCache&) {
  Check c(12, "determinism");
  const std::vector<std::string> configs = {
      R"({"preset":"oen-ftrl-d1","T":256,"seed":1})",
      R"({"preset":"boundary-push","T":200,"controller":"oen_ftrl_ap","seed":1})",
      R"({"preset":"radial-push-ap","T":400,"seed":1})",
      R"({"preset":"pin1d-uap","T":1000,"seed":1})",
      R"({"preset":"prop2-state-targeting","T":200,"seed":1})",
      R"({"preset":"probing-const","T":1024,"seed":1})",
      R"({"preset":"nested-bco","T":1024,"seed":3})",
      R"({"preset":"rec-eird","T":256,"seed":1})",
      R"({"preset":"pricing-ces","T":4096,"seed":1})",
      R"({"preset":"steering-fixed-game","T":2000,"seed":1})",
      R"({"preset":"steering-drifting-game","T":2000,"seed":1})",
  };
  for (const std::string& cfg_text : configs) {
    const ScenarioConfig cfg = parse_config_text(cfg_text);
    const RunRecord a = run_scenario(cfg, cfg.seeds[0]);
    const RunRecord b = run_scenario(cfg, cfg.seeds[0]);
    Json ja = a.summary_json(), jb = b.summary_json();
    ja.erase("wall_time_ms");
    jb.erase("wall_time_ms");
    const bool same = a.csv() == b.csv() && ja.dump() == jb.dump();
    c.require(same, a.scenario + ": identical bytes across repeated runs");
  }
  return c.result;
}

}  // namespace

AcceptanceReport run_acceptance(const std::string& filter) {
  SuiteCache cache;
  using Fn = std::function<CriterionResult(SuiteCache&)>;
  const std::vector<std::pair<std::string, Fn>> criteria = {
      {"oen-ftrl-bound", criterion_oen_ftrl_bound},
      {"feasibility-suite", criterion_feasibility},
      {"boundary-push-threshold", criterion_boundary_push},
      {"bounded-disturbance-sandwich", criterion_radial_push},
      {"unbounded-disturbance-sandwich", criterion_pin1d},
      {"policy-separation", criterion_prop2},
      {"probing-oco", criterion_probing},
      {"nested-bco", criterion_nested_bco},
      {"recommendations", criterion_recommendations},
      {"pricing", criterion_pricing},
      {"steering", criterion_steering},
      {"determinism", criterion_determinism},
  };

  AcceptanceReport report;
  std::ostringstream out;
  int id = 0;
  for (const auto& [name, fn] : criteria) {
    ++id;
    if (!filter.empty() && name.find(filter) == std::string::npos) continue;
    CriterionResult res;
    try {
      res = fn(cache);
    } catch (const std::exception& e) {
      res.id = id;
      res.name = name;
      res.pass = false;
      res.details.push_back(std::string("  FAIL exception: ") + e.what());
    }
    if (!res.pass) ++report.failures;
    out << (res.pass ? "[PASS] " : "[FAIL] ") << res.id << ". " << res.name << "\n";
    for (const auto& d : res.details) out << d << "\n";
    report.results.push_back(std::move(res));
  }
  out << (report.failures == 0 ? "ACCEPTANCE: all criteria passed\n"
                               : "ACCEPTANCE: " + std::to_string(report.failures) +
                                     " criteria failed\n");
  report.text = out.str();
  return report;
}

}  // namespace nestctl
