#pragma once

#include <string>

#include "sulab/config.hpp"

namespace sulab {

// Parse-and-check pass over an experiment config; throws ConfigInvalid naming
// the first failing field. Does not run anything.
void validate_experiment(const Config& cfg);

// Full pipeline. Writes run.jsonl, records.csv, identity.csv, neck.csv,
// profile.csv, metrics.csv and summary.json into out_dir (plus experiment
// specific tables). Returns false when summary.json was flagged partial.
bool run_experiment(const Config& cfg, const std::string& out_dir);

// Rebuild summary.json in run_dir from the emitted logs and tables.
void report_run(const std::string& run_dir);

}  // namespace sulab
