#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mtrl/experiments.hpp"

namespace {

const std::vector<std::string> kKinds{"pce", "omerm", "bandit-ucb",
                                      "bandit-ratio", "validate"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation lab for multi-task tabular RL pre-training and "
               "fine-tuning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mtrl::kVersion));

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::vector<std::string> overrides;
  bool seed_set = false, out_set = false;

  for (const std::string& kind : kKinds) {
    CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--out", out_dir, "output directory (overrides the config)")
        ->each([&](const std::string&) { out_set = true; });
    sub->add_option("--override", overrides,
                    "dotted config override, e.g. algo.n_cap=1024")
        ->take_all();
  }
  std::vector<std::string> report_inputs;
  CLI::App* rep = app.add_subcommand("report", "aggregate output CSVs");
  rep->add_option("inputs", report_inputs, "CSV files to aggregate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rep->parsed()) {
      std::cout << mtrl::report_text(report_inputs);
      return 0;
    }
    std::string kind;
    for (const std::string& k : kKinds)
      if (app.get_subcommand(k)->parsed()) kind = k;

    std::vector<std::string> ovs = overrides;
    if (seed_set) ovs.push_back("master_seed=" + std::to_string(seed));
    if (out_set) ovs.push_back("out_dir=" + out_dir);
    ovs.push_back("experiment=" + kind);

    mtrl::ExperimentConfig cfg = mtrl::load_config(config_path, ovs);
    auto t0 = std::chrono::steady_clock::now();
    mtrl::RunResult result = mtrl::run(cfg);
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    mtrl::write_run_files(cfg, result, secs);
    for (const auto& d : result.deviations)
      std::cout << "deviation: " << d << "\n";
    for (const auto& n : result.notes) std::cout << n << "\n";
    std::cout << "outputs in " << cfg.out_dir << "\n";
    return 0;
  } catch (const mtrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
