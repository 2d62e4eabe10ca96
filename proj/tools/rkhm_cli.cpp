#include "rkhm/experiments.hpp"
#include "rkhm/serialize.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <set>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"operator-valued kernel toolkit"};
  std::string command, config_path, out_dir = "out";
  long long seed_opt = -1;
  app.add_option("command", command,
                 "one of: selftest, pca-functional, pca-trace, koopman, interaction, mmd, "
                 "quantum-check")
      ->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed_opt, "RNG seed (overrides config)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  static const std::set<std::string> known = {
      "selftest", "pca-functional", "pca-trace", "koopman", "interaction", "mmd", "quantum-check"};

  rkhm::ExperimentConfig cfg;
  try {
    if (!known.count(command)) throw std::invalid_argument("unknown command: " + command);
    cfg.command = command;
    cfg.params = rkhm::json::object();
    if (!config_path.empty()) {
      cfg.params = rkhm::json::parse(rkhm::read_file(config_path));
      if (!cfg.params.is_object()) throw std::invalid_argument("config root must be an object");
    }
    if (seed_opt >= 0)
      cfg.seed = static_cast<uint64_t>(seed_opt);
    else if (cfg.params.contains("seed"))
      cfg.seed = cfg.params.at("seed").get<uint64_t>();
    else
      cfg.seed = 42;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    rkhm::ExperimentReport report = rkhm::run_experiment(cfg);
    rkhm::json manifest = rkhm::emit_outputs(report, out_dir);
    std::cout << report.summary.dump(2) << "\n";
    std::cout << "wrote " << manifest["files"].size() << " files to " << out_dir << "\n";
    if (!report.ok) {
      std::cerr << "numerical checks failed (see summary.json)\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 2;
  }
}
