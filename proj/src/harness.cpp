#include "nestctl/harness.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <future>
#include <set>
#include <sstream>

namespace nestctl {

namespace {

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string config_hash(const Json& canonical) {
  const std::string s = canonical.dump();  // nlohmann objects iterate sorted
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

ScenarioConfig parse_config(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  check_keys(j,
             {"preset", "T", "seed", "seeds", "out", "controller", "model", "loss", "adversary",
              "benchmark", "overrides"},
             "top level");
  ScenarioConfig cfg;
  if (j.contains("preset")) {
    cfg.preset = j.at("preset").get<std::string>();
  } else if (!j.contains("model")) {
    throw std::invalid_argument("config: need either 'preset' or an explicit 'model'");
  }
  if (j.contains("seeds")) {
    for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
  } else if (j.contains("seed")) {
    cfg.seeds.push_back(j.at("seed").get<std::uint64_t>());
  } else {
    cfg.seeds.push_back(1);
  }
  if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  cfg.resolved = j;
  return cfg;
}

ScenarioConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  return parse_config(j);
}

namespace {

std::vector<Vec> comparator_grid(const ConvexBody& body, double rel_resolution = 0.01) {
  std::vector<Vec> pts;
  const int dim = body.dim();
  if (dim > 2) return pts;  // high-dimensional audits need an analytic minimizer
  const double R = body.circumradius();
  const double step = std::max(rel_resolution * R, 1e-6);
  if (dim == 1) {
    for (double x = -R; x <= R + 1e-12; x += step) {
      Vec p(1);
      p[0] = x;
      if (body.contains(p, 1e-9)) pts.push_back(p);
    }
    return pts;
  }
  const int per_axis = int(2.0 * R / step) + 1;
  const int cap = 250;  // keep grids bounded for big bodies
  const double eff_step = per_axis > cap ? 2.0 * R / cap : step;
  for (double x = -R; x <= R + 1e-12; x += eff_step)
    for (double y = -R; y <= R + 1e-12; y += eff_step) {
      Vec p(2);
      p << x, y;
      if (body.contains(p, 1e-9)) pts.push_back(p);
    }
  return pts;
}

// Gradient descent comparator polish for time-varying streams.
Vec descend_total(const LossStream& losses, const ConvexBody& body, Vec start, int T) {
  Vec y = body.project(std::move(start));
  double step = 0.1 * std::max(body.circumradius(), 1e-6);
  auto total = [&](const Vec& p) { return losses.total(p, T); };
  double fy = total(y);
  for (int it = 0; it < 120; ++it) {
    Vec g = Vec::Zero(y.size());
    for (int t = 1; t <= T; ++t) g += losses.grad(t, y);
    bool moved = false;
    for (int bt = 0; bt < 20; ++bt) {
      Vec cand = body.project(y - (step / std::max(g.norm(), 1e-12)) * g);
      const double fc = total(cand);
      if (fc < fy - 1e-12) {
        y = std::move(cand);
        fy = fc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return y;
}

}  // namespace

double audit_regret(const TrajectoryLog& log, const LossStream& losses, const ConvexBody& body,
                    const std::string& benchmark, const std::optional<Vec>& analytic_minimizer) {
  const int T = int(log.rows.size());
  if (T == 0 || benchmark == "none") return 0.0;
  double realized = 0.0;
  for (const auto& row : log.rows) realized += losses.value(row.t, row.state);

  std::vector<Vec> comparators;
  if (analytic_minimizer) comparators.push_back(*analytic_minimizer);
  comparators.push_back(body.project(Vec::Zero(body.dim())));
  if (benchmark != "analytic_minimizer") {
    auto grid = comparator_grid(body);
    comparators.insert(comparators.end(), grid.begin(), grid.end());
    comparators.push_back(descend_total(losses, body, comparators.front(), T));
  }
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& c : comparators) best = std::min(best, losses.total(c, T));
  return realized - best;
}

std::string RunRecord::csv() const {
  std::ostringstream out;
  const int dim = log.rows.empty() ? 0 : int(log.rows.front().state.size());
  out << "t";
  for (int i = 0; i < dim; ++i) out << ",target_" << i;
  const int adim = log.rows.empty() ? 0 : int(log.rows.front().action.size());
  for (int i = 0; i < adim; ++i) out << ",action_" << i;
  for (int i = 0; i < dim; ++i) out << ",state_" << i;
  out << ",w_norm,loss,cum_regret,residual,feasible\n";

  // Per-row cumulative regret against the best fixed comparator total,
  // prorated by round.
  const double per_round_best =
      log.rows.empty() ? 0.0 : (summary.total_loss - summary.final_regret) / double(log.rows.size());
  double cum_loss = 0.0;
  int t = 0;
  for (const auto& row : log.rows) {
    ++t;
    cum_loss += row.loss;
    out << row.t;
    for (int i = 0; i < dim; ++i) out << ',' << fmt_double(row.target[i]);
    for (int i = 0; i < adim; ++i) out << ',' << fmt_double(row.action[i]);
    for (int i = 0; i < dim; ++i) out << ',' << fmt_double(row.state[i]);
    out << ',' << fmt_double(row.disturbance.norm());
    out << ',' << fmt_double(row.loss);
    out << ',' << fmt_double(cum_loss - per_round_best * t);
    out << ',' << fmt_double(row.residual);
    out << ',' << (row.feasible ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

Json RunRecord::summary_json() const {
  Json j;
  j["scenario"] = scenario;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["controller"] = log.controller;
  j["rounds"] = log.rows.size();
  j["eta"] = log.eta;
  j["delta"] = log.delta;
  j["step_bound"] = log.step_bound;
  j["total_loss"] = summary.total_loss;
  j["regret"] = summary.final_regret;
  j["bound"] = summary.bound;
  j["bound_ratio"] = summary.bound_ratio;
  j["wall_time_ms"] = summary.wall_time_ms;
  j["failed_feasibility"] = summary.failed_feasibility;
  j["cap_violation"] = summary.cap_violation;
  for (const auto& [k, v] : summary.extras) j["extras"][k] = v;
  return j;
}

RunRecord run_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  ScenarioParts parts = build_scenario(config, seed);
  RunRecord rec;
  rec.scenario = parts.name;
  rec.config_hash = nestctl::config_hash(config.resolved);
  rec.seed = seed;

  const auto start = std::chrono::steady_clock::now();
  if (parts.controller == "oen_ftrl") {
    rec.log = run_controller_with_adversary("oen_ftrl", parts.model, *parts.losses,
                                            parts.adversary, parts.cfg);
  } else if (parts.controller == "oen_ftrl_ap") {
    rec.log = oen_ftrl_ap_run(parts.model, *parts.losses, parts.adversary, parts.cfg);
  } else if (parts.controller == "oen_ftrl_uap") {
    rec.log = oen_ftrl_uap_run(parts.model, *parts.losses, parts.adversary, parts.cfg);
  } else if (parts.controller == "probing_oco") {
    rec.log = probing_oco_run(parts.model, *parts.losses, parts.cfg);
  } else if (parts.controller == "nested_bco") {
    rec.log = nested_bco_run(parts.model, *parts.losses, parts.cfg);
  } else if (parts.controller == "state_targeting") {
    rec.log = state_targeting_run(parts.model, *parts.losses, parts.target_yhat, parts.cfg.horizon);
  } else if (parts.controller == "linear_policy") {
    rec.log = linear_policy_run(parts.model, *parts.losses, parts.linear_K, parts.cfg.horizon);
  } else {
    throw std::invalid_argument("config: unknown controller '" + parts.controller + "'");
  }
  const auto end = std::chrono::steady_clock::now();

  RunSummary& s = rec.summary;
  for (const auto& row : rec.log.rows) s.total_loss += row.loss;
  s.final_regret = audit_regret(rec.log, *parts.losses, parts.model.state_space, parts.benchmark,
                                parts.analytic_minimizer);
  s.bound = parts.bound;
  s.failed_feasibility = rec.log.failed_feasibility;
  s.cap_violation = rec.log.cap_violation;
  if (parts.custom_audit) parts.custom_audit(rec.log, s);
  s.bound_ratio = s.bound > 0.0 ? s.final_regret / s.bound : 0.0;
  s.wall_time_ms = std::chrono::duration<double, std::milli>(end - start).count();
  return rec;
}

std::vector<RunRecord> run_scenario_all_seeds(const ScenarioConfig& config) {
  std::vector<RunRecord> out;
  if (config.seeds.size() == 1) {
    out.push_back(run_scenario(config, config.seeds[0]));
    return out;
  }
  std::vector<std::future<RunRecord>> futures;
  futures.reserve(config.seeds.size());
  for (std::uint64_t s : config.seeds)
    futures.push_back(std::async(std::launch::async, [&config, s] { return run_scenario(config, s); }));
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace nestctl
