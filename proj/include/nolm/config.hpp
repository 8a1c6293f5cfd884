#pragma once

// Scenario configuration: a single JSON document overlaid on per-scenario defaults.
// Unknown keys are rejected with their JSON path.

#include "nolm/source_model.hpp"
#include "nolm/switch_model.hpp"
#include "nolm/tomography.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nolm::experiments {

enum class Scenario { Contrast, Window, Background, SwitchTomo, SepColors, TdmDemux, Eye };

inline constexpr Scenario kAllScenarios[] = {Scenario::Contrast,   Scenario::Window,
                                             Scenario::Background, Scenario::SwitchTomo,
                                             Scenario::SepColors,  Scenario::TdmDemux,
                                             Scenario::Eye};

// CLI spelling, e.g. "switch-tomo".
const char* to_string(Scenario s);
// Accepts the CLI spelling or the upper-case enum spelling (SWITCH_TOMO).
Scenario parse_scenario(const std::string& name);

struct ContrastSweep {
  std::vector<double> lengths_m{100.0, 500.0};
  double energy_min_nj = 0.0;
  double energy_max_nj = 5.0;
  double energy_step_nj = 0.05;
  // Mean photons per probe pulse in the single-photon measurement.
  double photons_per_pulse = 0.05;
  double gate_ps = 1000.0;
};

struct WindowSweep {
  std::vector<double> lengths_m{2.0, 100.0, 500.0};
  double delay_min_ps = -600.0;
  double delay_max_ps = 1400.0;
  double delay_step_ps = 5.0;
};

struct BackgroundSweep {
  std::vector<double> lengths_m{100.0, 250.0, 500.0, 750.0, 1000.0};
  std::vector<double> edfa_settings_mw{50.0, 100.0, 150.0, 200.0, 250.0};
  double nj_per_mw = 0.01;  // linear EDFA-setting calibration
  std::int64_t n_pulses = 1000000000;
  double gate_ps = 200.0;
  double gated_length_m = 500.0;
};

struct SwitchTomoSweep {
  std::vector<double> lengths_m{100.0, 500.0};
  std::int64_t n_pulses = 600000000;
  double gate_ps = 1000.0;
  int n_resamples = 100;
};

struct SepColorsSweep {
  std::vector<double> edfa_settings_mw{0.0,   25.0,  50.0,  75.0,  100.0, 125.0,
                                       150.0, 175.0, 200.0, 225.0, 250.0};
  double nj_per_mw = 0.01;
  // Fractional excess of the 1545-nm color over the 1555-nm one.
  double color_imbalance = 0.0;
};

struct TdmSweep {
  double window_delay_ps = 225.0;
  std::int64_t n_pulses = 3000000000;
  int n_resamples = 100;
};

struct EyeSweep {
  double delay_min_ps = 0.0;
  double delay_max_ps = 700.0;
  double delay_step_ps = 2.5;
  std::int64_t n_pulses = 100000000;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::Contrast;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  // Disables every noise source and source imperfection.
  bool ideal = false;
  switching::SwitchConfig switch_config;
  source::SourceConfig source;
  tomo::NoiseParams noise;
  switching::TestPulseShape probe;

  ContrastSweep contrast;
  WindowSweep window;
  BackgroundSweep background;
  SwitchTomoSweep switch_tomo;
  SepColorsSweep sep_colors;
  TdmSweep tdm;
  EyeSweep eye;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  // Noise and source settings with `ideal` applied.
  tomo::NoiseParams effective_noise() const;
  source::SourceConfig effective_source() const;
};

ExperimentConfig default_config(Scenario s);

// Overlays `doc` on default_config(scenario). The scenario comes from `doc` or, when
// absent, from `expected`; a mismatch between the two is an error.
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<Scenario> expected);
ExperimentConfig load_config(const std::string& path, std::optional<Scenario> expected);

// The full effective configuration, including only the active scenario's sweep.
nlohmann::json to_json(const ExperimentConfig& c);

}  // namespace nolm::experiments
