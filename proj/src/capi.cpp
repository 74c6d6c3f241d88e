#include "nestctl.h"

#include <cstring>
#include <string>

#include "nestctl/harness.hpp"

struct nestctl_sim {
  nestctl::ScenarioConfig config;
};

struct nestctl_run {
  nestctl::RunRecord record;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int fail(nestctl_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    return fail(NESTCTL_EINVAL, e.what());
  } catch (const std::runtime_error& e) {
    return fail(NESTCTL_ERUN, e.what());
  } catch (const std::exception& e) {
    return fail(NESTCTL_EINTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

int nestctl_config_parse(const char* json_text, nestctl_sim_t* out) {
  if (!json_text || !out) return fail(NESTCTL_EINVAL, "null argument");
  return guarded([&] {
    try {
      auto config = nestctl::parse_config_text(json_text);
      *out = new nestctl_sim{std::move(config)};
      return int(NESTCTL_OK);
    } catch (const std::invalid_argument& e) {
      if (std::string(e.what()).find("JSON parse error") != std::string::npos)
        return fail(NESTCTL_EPARSE, e.what());
      throw;
    }
  });
}

void nestctl_sim_free(nestctl_sim_t sim) { delete sim; }

int nestctl_sim_seed_count(nestctl_sim_t sim, size_t* out) {
  if (!sim || !out) return fail(NESTCTL_EINVAL, "null argument");
  *out = sim->config.seeds.size();
  return NESTCTL_OK;
}

int nestctl_run_scenario(nestctl_sim_t sim, size_t index, int has_seed_override,
                         uint64_t seed_override, nestctl_run_t* out) {
  if (!sim || !out) return fail(NESTCTL_EINVAL, "null argument");
  return guarded([&] {
    uint64_t seed;
    if (has_seed_override) {
      seed = seed_override;
    } else {
      if (index >= sim->config.seeds.size())
        return fail(NESTCTL_EINVAL, "seed index out of range");
      seed = sim->config.seeds[index];
    }
    auto record = nestctl::run_scenario(sim->config, seed);
    *out = new nestctl_run{std::move(record)};
    return int(NESTCTL_OK);
  });
}

void nestctl_run_free(nestctl_run_t run) { delete run; }

int nestctl_run_csv(nestctl_run_t run, char** out) {
  if (!run || !out) return fail(NESTCTL_EINVAL, "null argument");
  return guarded([&] {
    *out = dup_string(run->record.csv());
    return int(NESTCTL_OK);
  });
}

int nestctl_run_summary_json(nestctl_run_t run, char** out) {
  if (!run || !out) return fail(NESTCTL_EINVAL, "null argument");
  return guarded([&] {
    *out = dup_string(run->record.summary_json().dump(2));
    return int(NESTCTL_OK);
  });
}

int nestctl_run_regret(nestctl_run_t run, double* regret, double* bound) {
  if (!run) return fail(NESTCTL_EINVAL, "null argument");
  if (regret) *regret = run->record.summary.final_regret;
  if (bound) *bound = run->record.summary.bound;
  return NESTCTL_OK;
}

int nestctl_run_seed(nestctl_run_t run, uint64_t* seed) {
  if (!run || !seed) return fail(NESTCTL_EINVAL, "null argument");
  *seed = run->record.seed;
  return NESTCTL_OK;
}

int nestctl_list_scenarios(char** out) {
  if (!out) return fail(NESTCTL_EINVAL, "null argument");
  return guarded([&] {
    nestctl::Json j = nestctl::Json::array();
    for (const auto& [name, desc] : nestctl::list_scenarios()) {
      nestctl::Json e;
      e["name"] = name;
      e["description"] = desc;
      j.push_back(e);
    }
    *out = dup_string(j.dump(2));
    return int(NESTCTL_OK);
  });
}

int nestctl_run_acceptance(const char* filter, int* failures, char** report) {
  return guarded([&] {
    const auto rep = nestctl::run_acceptance(filter ? filter : "");
    if (failures) *failures = rep.failures;
    if (report) *report = dup_string(rep.text);
    return int(NESTCTL_OK);
  });
}

const char* nestctl_last_error(void) { return g_last_error.c_str(); }

void nestctl_string_free(char* s) { std::free(s); }

}  // extern "C"
