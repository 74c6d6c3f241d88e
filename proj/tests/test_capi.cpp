#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <string>

#include "json.hpp"
#include "nestctl.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  nestctl_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("C API: parse, run, fetch outputs") {
  nestctl_sim_t sim = nullptr;
  REQUIRE(nestctl_config_parse(R"({"preset":"oen-ftrl-d1","T":32,"seed":4})", &sim) == NESTCTL_OK);
  size_t seeds = 0;
  CHECK(nestctl_sim_seed_count(sim, &seeds) == NESTCTL_OK);
  CHECK(seeds == 1);

  nestctl_run_t run = nullptr;
  REQUIRE(nestctl_run_scenario(sim, 0, 0, 0, &run) == NESTCTL_OK);

  char* csv = nullptr;
  REQUIRE(nestctl_run_csv(run, &csv) == NESTCTL_OK);
  const std::string csv_text = take(csv);
  CHECK(csv_text.rfind("t,target_0", 0) == 0);

  char* summary = nullptr;
  REQUIRE(nestctl_run_summary_json(run, &summary) == NESTCTL_OK);
  const auto j = nlohmann::json::parse(take(summary));
  CHECK(j.at("rounds").get<int>() == 32);
  CHECK(j.at("scenario").get<std::string>() == "oen-ftrl-d1");

  double regret = -1.0, bound = -1.0;
  CHECK(nestctl_run_regret(run, &regret, &bound) == NESTCTL_OK);
  CHECK(regret <= bound);

  uint64_t seed = 0;
  CHECK(nestctl_run_seed(run, &seed) == NESTCTL_OK);
  CHECK(seed == 4);

  nestctl_run_free(run);

  // Seed override path.
  nestctl_run_t run2 = nullptr;
  REQUIRE(nestctl_run_scenario(sim, 0, 1, 9, &run2) == NESTCTL_OK);
  uint64_t seed2 = 0;
  nestctl_run_seed(run2, &seed2);
  CHECK(seed2 == 9);
  nestctl_run_free(run2);

  nestctl_sim_free(sim);
}

TEST_CASE("C API: determinism across repeated runs") {
  nestctl_sim_t sim = nullptr;
  REQUIRE(nestctl_config_parse(R"({"preset":"nested-bco","T":1024,"seed":6})", &sim) == NESTCTL_OK);
  std::string first, second;
  for (std::string* out : {&first, &second}) {
    nestctl_run_t run = nullptr;
    REQUIRE(nestctl_run_scenario(sim, 0, 0, 0, &run) == NESTCTL_OK);
    char* csv = nullptr;
    REQUIRE(nestctl_run_csv(run, &csv) == NESTCTL_OK);
    *out = take(csv);
    nestctl_run_free(run);
  }
  CHECK(first == second);
  nestctl_sim_free(sim);
}

TEST_CASE("C API: error codes and messages") {
  nestctl_sim_t sim = nullptr;
  CHECK(nestctl_config_parse("{broken", &sim) == NESTCTL_EPARSE);
  CHECK(std::strlen(nestctl_last_error()) > 0);

  CHECK(nestctl_config_parse(R"({"preset":"oen-ftrl-d1","nope":1})", &sim) == NESTCTL_EINVAL);
  CHECK(std::string(nestctl_last_error()).find("nope") != std::string::npos);

  CHECK(nestctl_config_parse(nullptr, &sim) == NESTCTL_EINVAL);

  REQUIRE(nestctl_config_parse(R"({"preset":"no-such-preset"})", &sim) == NESTCTL_OK);
  nestctl_run_t run = nullptr;
  CHECK(nestctl_run_scenario(sim, 0, 0, 0, &run) == NESTCTL_EINVAL);
  nestctl_sim_free(sim);
}

TEST_CASE("C API: scenario listing") {
  char* text = nullptr;
  REQUIRE(nestctl_list_scenarios(&text) == NESTCTL_OK);
  const auto j = nlohmann::json::parse(take(text));
  CHECK(j.is_array());
  CHECK(j.size() >= 10);
  bool found = false;
  for (const auto& e : j)
    if (e.at("name") == "pricing-ces") found = true;
  CHECK(found);
}
