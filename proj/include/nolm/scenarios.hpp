#pragma once

// End-to-end scenario runners. Each writes its CSV series (and, for tomography,
// count files and density matrices) into an output directory and returns a summary
// whose every headline metric carries a tolerance band and verdict.

#include "nolm/config.hpp"
#include "nolm/tomography.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace nolm::experiments {

inline constexpr int kSummarySchemaVersion = 1;

struct Check {
  std::string name;
  std::string reference_id;
  double value = 0.0;
  double reference = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string kind;
  bool pass = false;
};

struct RunSummary {
  Scenario scenario = Scenario::Contrast;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> files;
  nlohmann::json config = nlohmann::json::object();
  double wall_time_s = 0.0;  // kept out of summary.json so reruns are byte-identical

  bool all_pass() const;
  // Adds a check against the reference table entry `reference_id`.
  void check(const std::string& name, const std::string& reference_id, double value);
  nlohmann::json to_json() const;
};

RunSummary run_contrast(const ExperimentConfig& c, const std::filesystem::path& out);
RunSummary run_window(const ExperimentConfig& c, const std::filesystem::path& out);
RunSummary run_background(const ExperimentConfig& c, const std::filesystem::path& out);
RunSummary run_switch_tomography(const ExperimentConfig& c, const std::filesystem::path& out);
RunSummary run_sep_colors(const ExperimentConfig& c, const std::filesystem::path& out);
RunSummary run_tdm_demux(const ExperimentConfig& c, const std::filesystem::path& out);
RunSummary run_eye(const ExperimentConfig& c, const std::filesystem::path& out);

// Dispatches on c.scenario, times the run, and writes summary.json and timing.txt.
RunSummary run_scenario(const ExperimentConfig& c, const std::filesystem::path& out);

// Density matrix, metrics and uncertainties as written by the tomography scenarios.
nlohmann::json density_matrix_json(const tomo::ReconstructionResult& r);

// Reconstructs a counts CSV (see count_io.hpp) and writes rho.json into `out`.
tomo::ReconstructionResult reconstruct_counts_file(const std::string& csv_path, int n_resamples,
                                                   std::uint64_t seed,
                                                   const std::filesystem::path& out);

}  // namespace nolm::experiments
