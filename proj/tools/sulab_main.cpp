#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "sulab/config.hpp"
#include "sulab/error.hpp"
#include "sulab/experiment.hpp"

namespace {

std::string default_out_dir(const std::string& config_path) {
  return (std::filesystem::path("runs") /
          std::filesystem::path(config_path).stem())
      .string();
}

void print_headline(const std::string& run_dir) {
  std::ifstream in(std::filesystem::path(run_dir) / "summary.json");
  if (!in) return;
  nlohmann::json s = nlohmann::json::parse(in, nullptr, false);
  if (s.is_discarded()) return;
  std::cout << "experiment:  " << s.value("experiment", "?") << "\n";
  std::cout << "halt_reason: " << s.value("halt_reason", "") << "\n";
  std::cout << "partial:     " << (s.value("partial", false) ? "yes" : "no") << "\n";
  if (s.contains("records")) {
    const auto& rec = s["records"];
    auto seq = [&](const char* key) {
      std::string out;
      if (!rec.contains(key)) return out;
      for (const auto& v : rec[key]) {
        if (!out.empty()) out += ", ";
        out += v.is_number() ? v.dump() : "null";
      }
      return out;
    };
    std::cout << "alpha:       [" << seq("alpha") << "]\n";
    std::cout << "lambda:      [" << seq("lambda_alpha") << "]\n";
    std::cout << "mu_hat:      [" << seq("mu_hat") << "]\n";
    std::cout << "nu_hat:      [" << seq("nu_hat") << "]\n";
  }
  if (s.contains("metrics")) {
    const auto& m = s["metrics"];
    for (const char* key : {"identity_rel_defect", "defect_trend", "length_ratio",
                            "length_ratio_mu_corrected", "neck_geodesic_median"})
      if (m.contains(key)) std::cout << key << ": " << m[key].dump() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sulab: alpha-energy laboratory for maps into embedded surfaces"};
  app.require_subcommand(1);
  app.footer("Set SULAB_THREADS to control worker threads (default 1).");

  std::string config_path, out_dir, run_dir;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (default runs/<config stem>)");

  CLI::App* validate = app.add_subcommand("validate", "check a config without running");
  validate->add_option("config", config_path, "config file")->required();

  CLI::App* report = app.add_subcommand("report", "rebuild summary.json from a run dir");
  report->add_option("run_dir", run_dir, "existing run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const sulab::Config cfg = sulab::Config::parse_file(config_path);
      if (out_dir.empty()) out_dir = default_out_dir(config_path);
      const bool complete = sulab::run_experiment(cfg, out_dir);
      std::cout << "run dir: " << out_dir << "\n";
      std::cout << "status:  " << (complete ? "complete" : "partial") << "\n";
      print_headline(out_dir);
    } else if (validate->parsed()) {
      const sulab::Config cfg = sulab::Config::parse_file(config_path);
      sulab::validate_experiment(cfg);
      std::cout << "ok: " << config_path << "\n";
    } else if (report->parsed()) {
      sulab::report_run(run_dir);
      print_headline(run_dir);
    }
  } catch (const sulab::ConfigInvalid& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const sulab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
