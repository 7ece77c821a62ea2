#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mrnav/runner.hpp"

namespace {

using namespace mrnav;

ScenarioConfig base_config() {
  ScenarioConfig cfg;
  cfg.robot_count = 4;
  cfg.duration = 120.0;
  return cfg;
}

EnvironmentKind parse_env(const std::string& s) {
  if (s == "forest") return EnvironmentKind::kForest;
  if (s == "maze") return EnvironmentKind::kMaze;
  throw CLI::ValidationError("--env", "expected forest or maze");
}

void print_summary(const ScenarioConfig& cfg, const RunResult& res) {
  const MetricsReport& m = res.metrics;
  std::printf(
      "%-9s %-6s seed=%llu tasks=%d deadlock=%.3f collision=%.3f "
      "completion=%.3f avg_duration=%.2fs fallbacks=%ld plan_failures=%d\n",
      cfg.modules.label().c_str(),
      cfg.environment == EnvironmentKind::kForest ? "forest" : "maze",
      static_cast<unsigned long long>(cfg.seed), m.task_count, m.deadlock_rate,
      m.collision_rate, m.completion_rate, m.avg_nav_duration,
      res.sbc_fallbacks, res.plan_failures);
}

// Flat key=value lines mirroring the run flags; '#' starts a comment.
void apply_config_file(ScenarioConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "env") {
      cfg.environment = parse_env(value);
    } else if (key == "dyn") {
      cfg.dynamic_obstacle_count = std::stoi(value);
    } else if (key == "robots") {
      cfg.robot_count = std::stoi(value);
    } else if (key == "modules") {
      cfg.modules = ModuleCombination::parse(value);
    } else if (key == "duration") {
      cfg.duration = std::stod(value);
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else if (key == "drop_probability") {
      cfg.drop_probability = std::stod(value);
    } else if (key == "delay_low") {
      cfg.delay_low = std::stod(value);
    } else if (key == "delay_high") {
      cfg.delay_high = std::stod(value);
    } else {
      throw CLI::ValidationError("--config", "unknown key " + key);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-tier multi-robot navigation simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one experiment");
  std::string env = "forest", modules = "LH+MH+SH", out, config_file;
  int dyn = 0, robots = 4;
  double duration = 120.0;
  uint64_t seed = 0;
  run->add_option("--env", env, "forest|maze");
  run->add_option("--dyn", dyn, "dynamic obstacle count");
  run->add_option("--robots", robots, "robot count");
  run->add_option("--modules", modules, "e.g. LH+MH+SH");
  run->add_option("--duration", duration, "simulated seconds");
  run->add_option("--seed", seed, "rng seed");
  run->add_option("--out", out, "output directory for CSV logs");
  run->add_option("--config", config_file, "key=value file mirroring flags");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Run the ablation suite");
  std::string suite = "paper", ablate_out = "ablation_out";
  int ablate_seeds = 1;
  uint64_t ablate_seed0 = 0;
  ablate->add_option("--suite", suite, "suite name (paper)");
  ablate->add_option("--out", ablate_out, "output directory");
  ablate->add_option("--seeds", ablate_seeds, "seeds per configuration");
  ablate->add_option("--seed0", ablate_seed0, "first seed");

  // longrun
  auto* longrun = app.add_subcommand("longrun", "Endurance run");
  double hours = 1.0;
  std::string longrun_out;
  uint64_t longrun_seed = 0;
  longrun->add_option("--hours", hours, "simulated hours");
  longrun->add_option("--seed", longrun_seed, "rng seed");
  longrun->add_option("--out", longrun_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ScenarioConfig cfg = base_config();
      if (!config_file.empty()) apply_config_file(cfg, config_file);
      if (run->count("--env")) cfg.environment = parse_env(env);
      if (run->count("--dyn")) cfg.dynamic_obstacle_count = dyn;
      if (run->count("--robots")) cfg.robot_count = robots;
      if (run->count("--modules")) {
        cfg.modules = ModuleCombination::parse(modules);
      }
      if (run->count("--duration")) cfg.duration = duration;
      if (run->count("--seed")) cfg.seed = seed;
      const RunResult res = run_experiment(cfg, out);
      print_summary(cfg, res);
    } else if (ablate->parsed()) {
      if (suite != "paper") {
        std::cerr << "unknown suite: " << suite << "\n";
        return 1;
      }
      const std::array<const char*, 7> combos = {
          "LH", "MH", "SH", "LH+MH", "LH+SH", "MH+SH", "LH+MH+SH"};
      std::ostringstream all;
      bool first = true;
      for (const char* env_name : {"forest", "maze"}) {
        for (int dyn_count : {0, 150}) {
          for (const char* combo : combos) {
            for (int s = 0; s < ablate_seeds; ++s) {
              ScenarioConfig cfg = base_config();
              cfg.environment = parse_env(env_name);
              cfg.dynamic_obstacle_count = dyn_count;
              cfg.modules = ModuleCombination::parse(combo);
              cfg.seed = ablate_seed0 + uint64_t(s);
              const std::string dir =
                  ablate_out + "/" + env_name + "_dyn" +
                  std::to_string(dyn_count) + "_" + cfg.modules.label() +
                  "_seed" + std::to_string(cfg.seed);
              const RunResult res = run_experiment(cfg, dir);
              print_summary(cfg, res);
              std::ifstream metrics(dir + "/metrics.csv");
              std::string line;
              int row = 0;
              while (std::getline(metrics, line)) {
                if (row++ == 0 && !first) continue;
                all << line << '\n';
              }
              first = false;
            }
          }
        }
      }
      std::filesystem::create_directories(ablate_out);
      std::ofstream(ablate_out + "/summary.csv") << all.str();
    } else if (longrun->parsed()) {
      ScenarioConfig cfg = base_config();
      cfg.dynamic_obstacle_count = 100;
      cfg.duration = hours * 3600.0;
      cfg.seed = longrun_seed;
      const RunResult res = run_experiment(cfg, longrun_out);
      print_summary(cfg, res);
      if (res.metrics.collision_event_count > 0 ||
          res.metrics.deadlocked_robots > 0) {
        std::cerr << "endurance run saw collisions or deadlocks\n";
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
