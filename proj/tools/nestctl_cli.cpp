// Command-line front end; talks to the library through the C API only.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "nestctl.h"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  nestctl_string_free(s);
  return out;
}

int run_command(const std::string& config_path, bool has_seed, uint64_t seed,
                std::string out_dir) {
  if (out_dir.empty()) {
    if (const char* env = std::getenv("NESTCTL_OUT")) out_dir = env;
  }

  nestctl_sim_t sim = nullptr;
  const std::string text = read_file(config_path);
  if (nestctl_config_parse(text.c_str(), &sim) != NESTCTL_OK) {
    std::cerr << "config error: " << nestctl_last_error() << "\n";
    return 2;
  }

  size_t n_seeds = 1;
  nestctl_sim_seed_count(sim, &n_seeds);
  if (has_seed) n_seeds = 1;

  int status = 0;
  for (size_t i = 0; i < n_seeds; ++i) {
    nestctl_run_t run = nullptr;
    const int rc = nestctl_run_scenario(sim, i, has_seed ? 1 : 0, seed, &run);
    if (rc != NESTCTL_OK) {
      std::cerr << "run error: " << nestctl_last_error() << "\n";
      status = 3;
      break;
    }
    char* summary = nullptr;
    nestctl_run_summary_json(run, &summary);
    std::string summary_text = take_string(summary);
    std::cout << summary_text << "\n";

    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      uint64_t used_seed = 0;
      nestctl_run_seed(run, &used_seed);
      char* csv = nullptr;
      nestctl_run_csv(run, &csv);
      const std::string stem =
          std::filesystem::path(config_path).stem().string() + "_seed" + std::to_string(used_seed);
      write_file(std::filesystem::path(out_dir) / (stem + ".csv"), csv);
      nestctl_string_free(csv);
      write_file(std::filesystem::path(out_dir) / (stem + ".json"), summary_text.c_str());
    }
    nestctl_run_free(run);
  }
  nestctl_sim_free(sim);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nestctl: online nonlinear control simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool has_seed = false;
  auto* run = app.add_subcommand("run", "run a scenario from a JSON config");
  run->add_option("--config", config_path, "config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "output directory (default $NESTCTL_OUT)");

  std::string filter;
  auto* accept = app.add_subcommand("accept", "run the acceptance suite");
  accept->add_option("--filter", filter, "only criteria whose name contains this substring");

  auto* list = app.add_subcommand("list-scenarios", "list named scenario presets");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    has_seed = seed_opt->count() > 0;
    return run_command(config_path, has_seed, seed, out_dir);
  }
  if (accept->parsed()) {
    int failures = 0;
    char* report = nullptr;
    if (nestctl_run_acceptance(filter.empty() ? nullptr : filter.c_str(), &failures, &report) !=
        NESTCTL_OK) {
      std::cerr << "acceptance error: " << nestctl_last_error() << "\n";
      return 2;
    }
    std::cout << take_string(report);
    return failures == 0 ? 0 : 1;
  }
  if (list->parsed()) {
    char* text = nullptr;
    if (nestctl_list_scenarios(&text) != NESTCTL_OK) {
      std::cerr << "error: " << nestctl_last_error() << "\n";
      return 2;
    }
    std::cout << take_string(text) << "\n";
    return 0;
  }
  return 0;
}
