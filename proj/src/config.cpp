#include "nolm/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <type_traits>
#include <set>
#include <stdexcept>

namespace nolm::experiments {
namespace {

using nlohmann::json;

// Reads fields from one JSON object and remembers which keys were used, so leftovers
// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::invalid_argument(path_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      const json& v = j_.at(key);
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
          throw std::invalid_argument("expected a nonnegative integer");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      throw std::invalid_argument(path_ + "." + key + ": " + e.what());
    }
  }

  void get_list(const char* key, std::vector<double>& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty()) {
      throw std::invalid_argument(path_ + "." + key + ": expected a non-empty array of numbers");
    }
    out.clear();
    for (const auto& x : v) {
      if (!x.is_number()) throw std::invalid_argument(path_ + "." + key + ": expected numbers");
      out.push_back(x.get<double>());
    }
  }

  std::optional<ObjectReader> child(const char* key) {
    used_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return ObjectReader(j_.at(key), path_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw std::invalid_argument(path_ + "." + key + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_pump(ObjectReader& r, switching::PumpPulse& p) {
  r.get("fwhm_ps", p.fwhm_ps);
  r.get("energy_nj", p.energy_nj);
  r.get("center_ps", p.center_ps);
  std::string shape = p.shape == switching::PumpShape::Gaussian ? "gaussian" : "sampled";
  r.get("shape", shape);
  if (shape == "gaussian") {
    p.shape = switching::PumpShape::Gaussian;
  } else if (shape == "sampled") {
    p.shape = switching::PumpShape::Sampled;
  } else {
    throw std::invalid_argument("switch.pump.shape: expected \"gaussian\" or \"sampled\"");
  }
  if (auto s = r.child("samples")) {
    s->get("t0_ps", p.sampled.t0_ps);
    s->get("step_ps", p.sampled.step_ps);
    s->get_list("values", p.sampled.values);
    s->finish();
  }
}

void read_switch(ObjectReader& r, switching::SwitchConfig& c) {
  r.get("length_m", c.fiber.length_m);
  r.get("inv_gv_signal_ps_per_m", c.fiber.inv_gv_signal_ps_per_m);
  r.get("walkoff_ps_per_m", c.fiber.walkoff_ps_per_m);
  r.get("e_pi_nj", c.e_pi_nj);
  r.get("extinction", c.extinction);
  r.get("loss_t_db", c.loss_t_db);
  r.get("loss_r_db", c.loss_r_db);
  r.get("raman_per_m", c.raman_per_m);
  r.get("raman_per_ps", c.raman_per_ps);
  r.get("grid_step_ps", c.grid_step_ps);
  if (auto p = r.child("pump")) {
    read_pump(*p, c.pump);
    p->finish();
  }
}

void read_source(ObjectReader& r, source::SourceConfig& c) {
  r.get("pump_fwhm_ps", c.pump_fwhm_ps);
  r.get("rep_rate_mhz", c.rep_rate_mhz);
  r.get("pair_prob_per_pulse", c.pair_prob_per_pulse);
  r.get("delta_t_ps", c.delta_t_ps);
  r.get("c1_over_c2", c.c1_over_c2);
  r.get("t0_ps", c.t0_ps);
  r.get("pair_tangle", c.pair_tangle);
  r.get("pair_white_noise", c.pair_white_noise);
  r.get("grid_step_ps", c.grid_step_ps);
}

void read_noise(ObjectReader& r, tomo::NoiseParams& n) {
  r.get("dark_prob_per_gate", n.dark_prob_per_gate);
  r.get("background_prob_per_gate", n.background_prob_per_gate);
  r.get("efficiency_signal", n.efficiency_signal);
  r.get("efficiency_idler", n.efficiency_idler);
  r.get("switch_background_prob", n.switch_background_prob);
}

void read_probe(ObjectReader& r, switching::TestPulseShape& p) {
  r.get("core_fwhm_ps", p.core_fwhm_ps);
  r.get("total_width_ps", p.total_width_ps);
  r.get("tail_fraction", p.tail_fraction);
  r.get("tail_decay_ps", p.tail_decay_ps);
}

void read_sweep(ObjectReader& r, ExperimentConfig& c) {
  switch (c.scenario) {
    case Scenario::Contrast: {
      auto& s = c.contrast;
      r.get_list("lengths_m", s.lengths_m);
      r.get("energy_min_nj", s.energy_min_nj);
      r.get("energy_max_nj", s.energy_max_nj);
      r.get("energy_step_nj", s.energy_step_nj);
      r.get("photons_per_pulse", s.photons_per_pulse);
      r.get("gate_ps", s.gate_ps);
      break;
    }
    case Scenario::Window: {
      auto& s = c.window;
      r.get_list("lengths_m", s.lengths_m);
      r.get("delay_min_ps", s.delay_min_ps);
      r.get("delay_max_ps", s.delay_max_ps);
      r.get("delay_step_ps", s.delay_step_ps);
      break;
    }
    case Scenario::Background: {
      auto& s = c.background;
      r.get_list("lengths_m", s.lengths_m);
      r.get_list("edfa_settings_mw", s.edfa_settings_mw);
      r.get("nj_per_mw", s.nj_per_mw);
      r.get("n_pulses", s.n_pulses);
      r.get("gate_ps", s.gate_ps);
      r.get("gated_length_m", s.gated_length_m);
      break;
    }
    case Scenario::SwitchTomo: {
      auto& s = c.switch_tomo;
      r.get_list("lengths_m", s.lengths_m);
      r.get("n_pulses", s.n_pulses);
      r.get("gate_ps", s.gate_ps);
      r.get("n_resamples", s.n_resamples);
      break;
    }
    case Scenario::SepColors: {
      auto& s = c.sep_colors;
      r.get_list("edfa_settings_mw", s.edfa_settings_mw);
      r.get("nj_per_mw", s.nj_per_mw);
      r.get("color_imbalance", s.color_imbalance);
      break;
    }
    case Scenario::TdmDemux: {
      auto& s = c.tdm;
      r.get("window_delay_ps", s.window_delay_ps);
      r.get("n_pulses", s.n_pulses);
      r.get("n_resamples", s.n_resamples);
      break;
    }
    case Scenario::Eye: {
      auto& s = c.eye;
      r.get("delay_min_ps", s.delay_min_ps);
      r.get("delay_max_ps", s.delay_max_ps);
      r.get("delay_step_ps", s.delay_step_ps);
      r.get("n_pulses", s.n_pulses);
      break;
    }
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_lengths(const std::vector<double>& l, const char* name) {
  require(!l.empty(), std::string(name) + " must not be empty");
  for (double v : l) require(v >= 0.0, std::string(name) + " must be nonnegative");
}

void require_range(double lo, double hi, double step, const char* name) {
  require(step > 0.0, std::string(name) + " step must be positive");
  require(hi >= lo, std::string(name) + " max must not be below min");
  require((hi - lo) / step <= 1e6, std::string(name) + " has too many points");
}

json switch_json(const switching::SwitchConfig& c) {
  json pump = {{"fwhm_ps", c.pump.fwhm_ps},
               {"energy_nj", c.pump.energy_nj},
               {"center_ps", c.pump.center_ps},
               {"shape", c.pump.shape == switching::PumpShape::Gaussian ? "gaussian" : "sampled"}};
  if (c.pump.shape == switching::PumpShape::Sampled) {
    pump["samples"] = {{"t0_ps", c.pump.sampled.t0_ps},
                       {"step_ps", c.pump.sampled.step_ps},
                       {"values", c.pump.sampled.values}};
  }
  return {{"length_m", c.fiber.length_m},
          {"inv_gv_signal_ps_per_m", c.fiber.inv_gv_signal_ps_per_m},
          {"walkoff_ps_per_m", c.fiber.walkoff_ps_per_m},
          {"e_pi_nj", c.e_pi_nj},
          {"extinction", c.extinction},
          {"loss_t_db", c.loss_t_db},
          {"loss_r_db", c.loss_r_db},
          {"raman_per_m", c.raman_per_m},
          {"raman_per_ps", c.raman_per_ps},
          {"grid_step_ps", c.grid_step_ps},
          {"pump", pump}};
}

json sweep_json(const ExperimentConfig& c) {
  switch (c.scenario) {
    case Scenario::Contrast: {
      const auto& s = c.contrast;
      return {{"lengths_m", s.lengths_m},         {"energy_min_nj", s.energy_min_nj},
              {"energy_max_nj", s.energy_max_nj}, {"energy_step_nj", s.energy_step_nj},
              {"photons_per_pulse", s.photons_per_pulse}, {"gate_ps", s.gate_ps}};
    }
    case Scenario::Window: {
      const auto& s = c.window;
      return {{"lengths_m", s.lengths_m},
              {"delay_min_ps", s.delay_min_ps},
              {"delay_max_ps", s.delay_max_ps},
              {"delay_step_ps", s.delay_step_ps}};
    }
    case Scenario::Background: {
      const auto& s = c.background;
      return {{"lengths_m", s.lengths_m}, {"edfa_settings_mw", s.edfa_settings_mw},
              {"nj_per_mw", s.nj_per_mw}, {"n_pulses", s.n_pulses},
              {"gate_ps", s.gate_ps},     {"gated_length_m", s.gated_length_m}};
    }
    case Scenario::SwitchTomo: {
      const auto& s = c.switch_tomo;
      return {{"lengths_m", s.lengths_m},
              {"n_pulses", s.n_pulses},
              {"gate_ps", s.gate_ps},
              {"n_resamples", s.n_resamples}};
    }
    case Scenario::SepColors: {
      const auto& s = c.sep_colors;
      return {{"edfa_settings_mw", s.edfa_settings_mw},
              {"nj_per_mw", s.nj_per_mw},
              {"color_imbalance", s.color_imbalance}};
    }
    case Scenario::TdmDemux: {
      const auto& s = c.tdm;
      return {{"window_delay_ps", s.window_delay_ps},
              {"n_pulses", s.n_pulses},
              {"n_resamples", s.n_resamples}};
    }
    case Scenario::Eye: {
      const auto& s = c.eye;
      return {{"delay_min_ps", s.delay_min_ps},
              {"delay_max_ps", s.delay_max_ps},
              {"delay_step_ps", s.delay_step_ps},
              {"n_pulses", s.n_pulses}};
    }
  }
  return json::object();
}

}  // namespace

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Contrast: return "contrast";
    case Scenario::Window: return "window";
    case Scenario::Background: return "background";
    case Scenario::SwitchTomo: return "switch-tomo";
    case Scenario::SepColors: return "sep-colors";
    case Scenario::TdmDemux: return "tdm-demux";
    case Scenario::Eye: return "eye";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  std::string n;
  for (char ch : name) n += ch == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (auto s : kAllScenarios) {
    if (n == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

void ExperimentConfig::validate() const {
  switch_config.validate();
  source.validate();
  noise.validate();
  probe.validate();
  source::SourceConfig eff = effective_source();
  eff.validate();
  switch (scenario) {
    case Scenario::Contrast:
      require_lengths(contrast.lengths_m, "sweep.lengths_m");
      require(contrast.energy_min_nj >= 0.0, "sweep.energy_min_nj must be nonnegative");
      require_range(contrast.energy_min_nj, contrast.energy_max_nj, contrast.energy_step_nj,
                    "sweep.energy");
      require(contrast.photons_per_pulse > 0.0, "sweep.photons_per_pulse must be positive");
      require(contrast.gate_ps > 0.0, "sweep.gate_ps must be positive");
      break;
    case Scenario::Window:
      require_lengths(window.lengths_m, "sweep.lengths_m");
      require_range(window.delay_min_ps, window.delay_max_ps, window.delay_step_ps, "sweep.delay");
      break;
    case Scenario::Background:
      require_lengths(background.lengths_m, "sweep.lengths_m");
      require(background.lengths_m.size() >= 2, "sweep.lengths_m needs two lengths for a slope fit");
      for (double v : background.edfa_settings_mw) {
        require(v > 0.0, "sweep.edfa_settings_mw must be positive (the pump must be on)");
      }
      require(background.nj_per_mw > 0.0, "sweep.nj_per_mw must be positive");
      require(background.n_pulses >= 0, "sweep.n_pulses must be nonnegative");
      require(background.gate_ps > 0.0, "sweep.gate_ps must be positive");
      require(background.gated_length_m >= 0.0, "sweep.gated_length_m must be nonnegative");
      break;
    case Scenario::SwitchTomo:
      require_lengths(switch_tomo.lengths_m, "sweep.lengths_m");
      require(switch_tomo.n_pulses > 0, "sweep.n_pulses must be positive");
      require(switch_tomo.gate_ps > 0.0, "sweep.gate_ps must be positive");
      require(switch_tomo.n_resamples >= 2, "sweep.n_resamples must be at least 2");
      break;
    case Scenario::SepColors:
      require(!sep_colors.edfa_settings_mw.empty(), "sweep.edfa_settings_mw must not be empty");
      for (double v : sep_colors.edfa_settings_mw) {
        require(v >= 0.0, "sweep.edfa_settings_mw must be nonnegative");
      }
      require(sep_colors.nj_per_mw > 0.0, "sweep.nj_per_mw must be positive");
      require(std::abs(sep_colors.color_imbalance) < 1.0, "sweep.color_imbalance must lie in (-1, 1)");
      break;
    case Scenario::TdmDemux:
      require(tdm.n_pulses > 0, "sweep.n_pulses must be positive");
      require(tdm.n_resamples >= 2, "sweep.n_resamples must be at least 2");
      break;
    case Scenario::Eye:
      require_range(eye.delay_min_ps, eye.delay_max_ps, eye.delay_step_ps, "sweep.delay");
      require(eye.n_pulses > 0, "sweep.n_pulses must be positive");
      break;
  }
}

tomo::NoiseParams ExperimentConfig::effective_noise() const {
  if (!ideal) return noise;
  tomo::NoiseParams n = noise;
  n.dark_prob_per_gate = 0.0;
  n.background_prob_per_gate = 0.0;
  n.switch_background_prob = 0.0;
  return n;
}

source::SourceConfig ExperimentConfig::effective_source() const {
  if (!ideal) return source;
  source::SourceConfig s = source;
  s.pair_tangle = 1.0;
  s.pair_white_noise = 0.0;
  return s;
}

ExperimentConfig default_config(Scenario s) {
  ExperimentConfig c;
  c.scenario = s;
  c.output_dir = std::string("out/") + to_string(s);
  c.noise.dark_prob_per_gate = 1e-5;
  c.noise.background_prob_per_gate = 1e-5;
  c.noise.efficiency_signal = 0.1;
  c.noise.efficiency_idler = 0.1;
  switch (s) {
    case Scenario::SwitchTomo:
      // Slightly imperfect pairs: the unswitched state's tangle is ~0.98.
      c.source.pair_tangle = 0.982;
      break;
    case Scenario::TdmDemux:
      c.source.pair_tangle = 0.99;
      c.source.pair_white_noise = 0.008;
      break;
    default:
      break;
  }
  return c;
}

ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<Scenario> expected) {
  ObjectReader root(doc, "config");
  std::string name;
  root.get("scenario", name);
  std::optional<Scenario> declared;
  if (!name.empty()) declared = parse_scenario(name);
  if (declared && expected && *declared != *expected) {
    throw std::invalid_argument(std::string("config.scenario is '") + to_string(*declared) +
                                "' but the '" + to_string(*expected) + "' scenario was requested");
  }
  if (!declared && !expected) throw std::invalid_argument("config.scenario is required");
  ExperimentConfig c = default_config(declared ? *declared : *expected);

  root.get("seed", c.seed);
  root.get("output_dir", c.output_dir);
  root.get("ideal", c.ideal);
  if (auto r = root.child("switch")) {
    read_switch(*r, c.switch_config);
    r->finish();
  }
  if (auto r = root.child("source")) {
    read_source(*r, c.source);
    r->finish();
  }
  if (auto r = root.child("noise")) {
    read_noise(*r, c.noise);
    r->finish();
  }
  if (auto r = root.child("probe")) {
    read_probe(*r, c.probe);
    r->finish();
  }
  if (auto r = root.child("sweep")) {
    read_sweep(*r, c);
    r->finish();
  }
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path, std::optional<Scenario> expected) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return parse_config(doc, expected);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  const auto& s = c.source;
  const auto& n = c.noise;
  const auto& p = c.probe;
  return {{"scenario", to_string(c.scenario)},
          {"seed", c.seed},
          {"output_dir", c.output_dir},
          {"ideal", c.ideal},
          {"switch", switch_json(c.switch_config)},
          {"source",
           {{"pump_fwhm_ps", s.pump_fwhm_ps},
            {"rep_rate_mhz", s.rep_rate_mhz},
            {"pair_prob_per_pulse", s.pair_prob_per_pulse},
            {"delta_t_ps", s.delta_t_ps},
            {"c1_over_c2", s.c1_over_c2},
            {"t0_ps", s.t0_ps},
            {"pair_tangle", s.pair_tangle},
            {"pair_white_noise", s.pair_white_noise},
            {"grid_step_ps", s.grid_step_ps}}},
          {"noise",
           {{"dark_prob_per_gate", n.dark_prob_per_gate},
            {"background_prob_per_gate", n.background_prob_per_gate},
            {"efficiency_signal", n.efficiency_signal},
            {"efficiency_idler", n.efficiency_idler},
            {"switch_background_prob", n.switch_background_prob}}},
          {"probe",
           {{"core_fwhm_ps", p.core_fwhm_ps},
            {"total_width_ps", p.total_width_ps},
            {"tail_fraction", p.tail_fraction},
            {"tail_decay_ps", p.tail_decay_ps}}},
          {"sweep", sweep_json(c)}};
}

}  // namespace nolm::experiments
