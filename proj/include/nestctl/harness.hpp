#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nestctl/controllers.hpp"

#include "json.hpp"

namespace nestctl {

using Json = nlohmann::json;

struct RunSummary {
  double total_loss = 0.0;
  double final_regret = 0.0;
  double bound = 0.0;        // pinned theoretical bound (0 when none applies)
  double bound_ratio = 0.0;  // regret / bound
  double wall_time_ms = 0.0;
  bool failed_feasibility = false;
  bool cap_violation = false;
  std::map<std::string, double> extras;
};

struct RunRecord {
  std::string scenario;
  std::string config_hash;
  std::uint64_t seed = 0;
  TrajectoryLog log;
  RunSummary summary;

  std::string csv() const;  // fixed columns, full precision
  Json summary_json() const;
};

// Everything needed to execute and audit one scenario.
struct ScenarioParts {
  std::string name;
  DynamicsModel model;
  LossStreamPtr losses;
  DisturbanceAdversary adversary = DisturbanceAdversary::none();
  ControllerConfig cfg;
  std::string controller = "oen_ftrl";
  Mat linear_K;    // linear_policy
  Vec target_yhat; // state_targeting

  std::string benchmark = "best_fixed_state_grid";
  std::optional<Vec> analytic_minimizer;
  double bound = 0.0;
  // Environment-specific post-run audit; may overwrite regret/bound and add extras.
  std::function<void(const TrajectoryLog&, RunSummary&)> custom_audit;
};

struct ScenarioConfig {
  std::string preset;  // empty when fully explicit
  Json resolved;       // canonical config the hash covers
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
};

// Strict parsing: unknown keys are rejected with a diagnostic naming the key.
ScenarioConfig parse_config(const Json& j);
ScenarioConfig parse_config_text(const std::string& text);

std::vector<std::pair<std::string, std::string>> list_scenarios();  // (name, description)

// Builds the executable parts for a resolved config (preset + overrides).
ScenarioParts build_scenario(const ScenarioConfig& config, std::uint64_t seed);

RunRecord run_scenario(const ScenarioConfig& config, std::uint64_t seed);
std::vector<RunRecord> run_scenario_all_seeds(const ScenarioConfig& config);

// Total realized loss minus the best fixed comparator; comparators come from
// a grid over the state space plus the analytic minimizer when present.
double audit_regret(const TrajectoryLog& log, const LossStream& losses, const ConvexBody& body,
                    const std::string& benchmark,
                    const std::optional<Vec>& analytic_minimizer = std::nullopt);

std::string config_hash(const Json& canonical);

// Acceptance suite.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> details;
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;
  int failures = 0;
  std::string text;  // one pass/fail line per criterion plus details
};

AcceptanceReport run_acceptance(const std::string& filter = "");

}  // namespace nestctl
