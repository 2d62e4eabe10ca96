#pragma once

#include "rkhm/serialize.hpp"

namespace rkhm {

struct ExperimentConfig {
  std::string command; // selftest, pca-functional, pca-trace, koopman,
                       // interaction, mmd, quantum-check
  uint64_t seed = 42;
  json params;         // parsed config file; {} picks the defaults
};

struct CsvTable {
  std::vector<std::string> headers;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  json summary;
  std::vector<std::pair<std::string, CsvTable>> tables; // file stem -> table
  bool ok = true;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// writes summary.json, one CSV per table, and manifest.json with content
// hashes; returns the manifest
json emit_outputs(const ExperimentReport& report, const std::string& dir);

} // namespace rkhm
