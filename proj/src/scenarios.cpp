#include "nolm/scenarios.hpp"

#include "nolm/count_io.hpp"
#include "nolm/output.hpp"
#include "nolm/reference_values.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace nolm::experiments {
namespace {

using nlohmann::json;
using quantum::DensityMatrix;
using switching::LoopSwitch;
using switching::SwitchConfig;

std::string length_tag(double length_m) { return "L" + format_number(length_m); }

void emit(RunSummary& s, const std::filesystem::path& out, const std::string& name,
          const std::string& contents) {
  write_file_atomic(out / name, contents);
  s.files.push_back(name);
}

std::vector<double> grid(double lo, double hi, double step) {
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
  return v;
}

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double f = (at - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + f * (y[i] - y[i - 1]);
}

SwitchConfig with_length(const SwitchConfig& base, double length_m) {
  SwitchConfig c = base;
  c.fiber.length_m = length_m;
  return c;
}

SwitchConfig with_energy(const SwitchConfig& base, double energy_nj) {
  SwitchConfig c = base;
  c.pump.energy_nj = energy_nj;
  return c;
}

// Delay of `signal` relative to the pump that maximizes its transmitted fraction.
std::pair<double, double> best_delay(const LoopSwitch& sw, const SampledProfile& signal,
                                     int exponent) {
  const double tau = sw.tau_s_ps();
  const auto delays = grid(-signal.t_last() - 50.0, tau - signal.t0_ps + 50.0, 1.0);
  const auto curve = switching::measured_window(sw, signal, exponent, delays);
  const auto it = std::max_element(curve.y.begin(), curve.y.end());
  return {delays[static_cast<std::size_t>(it - curve.y.begin())], *it};
}

json metrics_json(const quantum::EntanglementMetrics& m) {
  return {{"fidelity_max", m.fidelity_max}, {"tangle", m.tangle}, {"linear_entropy", m.linear_entropy}};
}

struct TomographyCase {
  std::string label;
  DensityMatrix state = DensityMatrix::maximally_mixed(4);
  double pair_prob = 0.0;
  tomo::NoiseParams noise;
  std::int64_t n_pulses = 0;
};

tomo::ReconstructionResult run_tomography(RunSummary& s, const std::filesystem::path& out,
                                          const TomographyCase& tc, std::uint64_t seed,
                                          int n_resamples) {
  const auto settings = tomo::standard_settings();
  Rng rng(seed);
  const auto records =
      tomo::simulate_counts(tc.state, settings, tc.n_pulses, tc.pair_prob, tc.noise, rng);
  emit(s, out, "counts_" + tc.label + ".csv", tomo::format_counts_csv(records, settings));
  tomo::UncertaintyOptions uo;
  uo.n_resamples = n_resamples;
  uo.seed = seed + 1000003;
  const auto r = tomo::reconstruct_with_uncertainties(records, settings, uo);
  emit(s, out, "rho_" + tc.label + ".json", density_matrix_json(r).dump(2) + "\n");
  s.details["cases"][tc.label] = {{"metrics", metrics_json(r.metrics)},
                                  {"uncertainties", metrics_json(r.metric_uncertainties)},
                                  {"resamples_used", r.n_resamples},
                                  {"pair_prob", tc.pair_prob},
                                  {"efficiency_idler", tc.noise.efficiency_idler},
                                  {"switch_background_prob", tc.noise.switch_background_prob}};
  return r;
}

DensityMatrix source_state(const source::MultiplexedStream& stream, source::SpatialMode mode,
                           const source::SourceConfig& src) {
  return source::apply_source_imperfection(source::project_and_trace(stream, mode), src);
}

// Both arms open; c_k^2 of each arm.
std::pair<double, double> arm_weights(const source::SourceConfig& src) {
  const auto pump = source::michelson_pump(src);
  return {std::pow(pump[0].amplitude, 4), std::pow(pump[1].amplitude, 4)};
}

SampledProfile window_over_stream(const SwitchConfig& cfg, const source::SourceConfig& src) {
  const double lo = src.t0_ps - 4.0 * src.pump_fwhm_ps - 100.0;
  const double hi = src.t0_ps + src.delta_t_ps + 4.0 * src.pump_fwhm_ps + 100.0;
  return switching::transmission_profile(switching::phase_profile(cfg), cfg.extinction, lo, hi);
}

}  // namespace

bool RunSummary::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void RunSummary::check(const std::string& name, const std::string& reference_id, double value) {
  const auto& ref = reference(reference_id);
  Check c;
  c.name = name;
  c.reference_id = reference_id;
  c.value = value;
  c.reference = ref.reference;
  c.lower = ref.lower;
  c.upper = ref.upper;
  c.kind = ref.kind;
  c.pass = std::isfinite(value) && value >= ref.lower && value <= ref.upper;
  checks.push_back(c);
}

nlohmann::json RunSummary::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks) {
    checks_json.push_back({{"name", c.name},
                           {"reference_id", c.reference_id},
                           {"value", c.value},
                           {"reference", c.reference},
                           {"lower", c.lower},
                           {"upper", std::isfinite(c.upper) ? json(c.upper) : json(nullptr)},
                           {"kind", c.kind},
                           {"pass", c.pass}});
  }
  return {{"schema_version", kSummarySchemaVersion},
          {"scenario", experiments::to_string(scenario)},
          {"seed", seed},
          {"reference_table_version", kReferenceTableVersion},
          {"verdict", all_pass() ? "pass" : "fail"},
          {"checks", checks_json},
          {"details", details},
          {"files", files},
          {"config", config}};
}

json density_matrix_json(const tomo::ReconstructionResult& r) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < 4; ++i) {
    json rr = json::array(), ii = json::array();
    for (int j = 0; j < 4; ++j) {
      rr.push_back(r.rho(i, j).real());
      ii.push_back(r.rho(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"schema_version", kSummarySchemaVersion},
          {"basis", {"HH", "HV", "VH", "VV"}},
          {"real", re},
          {"imag", im},
          {"metrics", metrics_json(r.metrics)},
          {"uncertainties", metrics_json(r.metric_uncertainties)},
          {"objective_value", r.objective_value},
          {"normalization", r.normalization},
          {"resamples_used", r.n_resamples},
          {"resamples_excluded", r.n_excluded}};
}

RunSummary run_contrast(const ExperimentConfig& c, const std::filesystem::path& out) {
  RunSummary s;
  const auto& sw = c.contrast;
  const auto probe = switching::test_pulse(c.probe, c.switch_config.grid_step_ps);
  const auto energies = grid(sw.energy_min_nj, sw.energy_max_nj, sw.energy_step_nj);
  const double surv_t = switching::survival_probability(c.switch_config.loss_t_db);
  const double surv_r = switching::survival_probability(c.switch_config.loss_r_db);
  const double mu = sw.photons_per_pulse;

  for (double length : sw.lengths_m) {
    const SwitchConfig base = with_length(c.switch_config, length);
    // Probe timing is set once, at full switching energy, as an experimenter would.
    const LoopSwitch at_epi(with_energy(base, base.e_pi_nj));
    const double d1 = best_delay(at_epi, probe, 1).first;
    const double d2 = best_delay(at_epi, probe, 2).first;
    const double background =
        c.ideal ? 0.0 : switching::raman_probability_per_pulse(base, sw.gate_ps);

    CsvWriter classical("pump_energy_nj,p_transmit,p_reflect,contrast");
    CsvWriter single("pump_energy_nj,p_transmit,p_reflect,contrast");
    double peak1 = -1.0, peak1_e = 0.0, peak2 = -1.0, peak2_e = 0.0, zero1 = 0.0;
    for (double e : energies) {
      const LoopSwitch loop(with_energy(base, e));
      const double t1 = switching::measured_window(loop, probe, 1, std::vector<double>{d1}).y[0];
      const double pt1 = t1 * surv_t, pr1 = (1.0 - t1) * surv_r;
      classical.row() << e << pt1 << pr1 << pt1 / pr1;
      if (pt1 / pr1 > peak1) {
        peak1 = pt1 / pr1;
        peak1_e = e;
      }
      if (e == 0.0) zero1 = pt1 / pr1;

      // Raman photons from the pump (only when it is on) split evenly between ports.
      const double t2 = switching::measured_window(loop, probe, 2, std::vector<double>{d2}).y[0];
      const double b = e > 0.0 ? background : 0.0;
      const double pt2 = t2 * surv_t + 0.5 * b / mu;
      const double pr2 = (1.0 - t2) * surv_r + 0.5 * b / mu;
      single.row() << e << pt2 << pr2 << pt2 / pr2;
      if (pt2 / pr2 > peak2) {
        peak2 = pt2 / pr2;
        peak2_e = e;
      }
    }
    const std::string tag = length_tag(length);
    emit(s, out, "contrast_classical_" + tag + ".csv", classical.str());
    emit(s, out, "contrast_single_photon_" + tag + ".csv", single.str());
    s.details[tag] = {{"classical_peak", peak1},
                      {"classical_peak_energy_nj", peak1_e},
                      {"single_photon_peak", peak2},
                      {"single_photon_peak_energy_nj", peak2_e},
                      {"probe_delay_classical_ps", d1},
                      {"probe_delay_single_photon_ps", d2},
                      {"background_per_pulse", background}};

    if (length == 500.0) {
      s.check("classical_peak_contrast_L500", "contrast.classical_peak_500m", peak1);
      s.check("classical_peak_energy_L500", "contrast.classical_peak_energy_500m_nj", peak1_e);
      s.check("single_photon_peak_contrast_L500", "contrast.single_photon_peak_500m", peak2);
    }
    if (length == 100.0) {
      s.check("classical_peak_contrast_L100", "contrast.classical_peak_100m", peak1);
    }
    if (energies.front() == 0.0) {
      const double eps = base.extinction;
      s.check("zero_energy_baseline_" + tag, "contrast.zero_energy_baseline_ratio",
              zero1 / (eps * surv_t / ((1.0 - eps) * surv_r)));
    }
  }
  return s;
}

RunSummary run_window(const ExperimentConfig& c, const std::filesystem::path& out) {
  RunSummary s;
  const auto& sw = c.window;
  const auto probe = switching::test_pulse(c.probe, c.switch_config.grid_step_ps);
  const double probe_fwhm = fwhm(probe);
  const auto delays = grid(sw.delay_min_ps, sw.delay_max_ps, sw.delay_step_ps);
  CsvWriter fits(
      "length_m,tau_fit_ps,intrinsic_fwhm_ps,model_intrinsic_fwhm_ps,fwhm_exp1_ps,fwhm_exp2_ps,"
      "broadening_exp1_ps,broadening_exp2_ps,fit_relative_residual");
  for (double length : sw.lengths_m) {
    const SwitchConfig cfg = with_length(c.switch_config, length);
    const LoopSwitch loop(cfg);
    const std::string tag = length_tag(length);
    double widths[2] = {0.0, 0.0};
    Curve exp1;
    for (int exponent : {1, 2}) {
      const auto curve = switching::measured_window(loop, probe, exponent, delays);
      // Widths are taken above the far-delay leakage floor, which is comparable to the
      // switched signal for very short loops.
      const auto [lo, hi] = std::minmax_element(curve.y.begin(), curve.y.end());
      Curve switched = curve;
      for (double& y : switched.y) y = (y - *lo) / (*hi - *lo);
      CsvWriter csv("delay_ps,normalized_response,transmitted_fraction");
      for (std::size_t i = 0; i < delays.size(); ++i) {
        csv.row() << delays[i] << switched.y[i] << curve.y[i];
      }
      emit(s, out, "window_" + tag + "_exp" + std::to_string(exponent) + ".csv", csv.str());
      widths[exponent - 1] = fwhm(switched);
      if (exponent == 1) exp1 = curve;
    }
    const auto fit = switching::deconvolve_window(exp1, probe, 1, cfg);
    const double model_fwhm = switching::intrinsic_window_fwhm(cfg);
    fits.row() << length << fit.tau_s_ps << fit.intrinsic_fwhm_ps << model_fwhm << widths[0]
               << widths[1] << widths[0] - fit.intrinsic_fwhm_ps << widths[1] - fit.intrinsic_fwhm_ps
               << fit.relative_rms_residual;
    s.details[tag] = {{"tau_fit_ps", fit.tau_s_ps},
                      {"intrinsic_fwhm_ps", fit.intrinsic_fwhm_ps},
                      {"fwhm_exp1_ps", widths[0]},
                      {"fwhm_exp2_ps", widths[1]}};
    if (length == 100.0 || length == 500.0) {
      const std::string suffix = length == 100.0 ? "100m" : "500m";
      s.check("intrinsic_fwhm_" + tag, "window.intrinsic_fwhm_" + suffix, fit.intrinsic_fwhm_ps);
      s.check("broadening_exp1_" + tag, "window.broadening_" + suffix,
              widths[0] - fit.intrinsic_fwhm_ps);
    }
    if (length == 2.0) {
      s.check("fwhm_exp1_over_probe_" + tag, "window.short_loop_fwhm_over_probe",
              widths[0] / probe_fwhm);
    }
  }
  s.details["probe_fwhm_ps"] = probe_fwhm;
  emit(s, out, "window_fits.csv", fits.str());
  return s;
}

RunSummary run_background(const ExperimentConfig& c, const std::filesystem::path& out) {
  RunSummary s;
  const auto& sw = c.background;
  CsvWriter csv("edfa_setting_mw,pump_energy_nj,length_m,n_pulses,counts,background_prob");
  std::vector<double> xs, ys;
  std::uint64_t index = 0;
  for (double length : sw.lengths_m) {
    for (double setting : sw.edfa_settings_mw) {
      const SwitchConfig cfg = with_energy(with_length(c.switch_config, length), setting * sw.nj_per_mw);
      Rng rng = derive_rng(c.seed, index++);
      const auto b = switching::raman_background(cfg, sw.n_pulses, std::nullopt, rng);
      const double p = sw.n_pulses > 0 ? static_cast<double>(b.sampled_counts) / static_cast<double>(sw.n_pulses) : 0.0;
      csv.row() << setting << cfg.pump.energy_nj << length << sw.n_pulses << b.sampled_counts << p;
      xs.push_back(length);
      ys.push_back(p);
    }
  }
  emit(s, out, "background.csv", csv.str());

  // Ordinary least squares with intercept.
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  const double intercept = (sy - slope * sx) / n;

  const SwitchConfig gated = with_length(c.switch_config, sw.gated_length_m);
  Rng rng = derive_rng(c.seed, index);
  const auto g = switching::raman_background(gated, sw.n_pulses, sw.gate_ps, rng);
  const double gp = sw.n_pulses > 0 ? static_cast<double>(g.sampled_counts) / static_cast<double>(sw.n_pulses) : 0.0;
  CsvWriter gcsv("length_m,gate_ps,n_pulses,counts,background_prob,rate_per_ps");
  gcsv.row() << sw.gated_length_m << sw.gate_ps << sw.n_pulses << g.sampled_counts << gp
             << gp / sw.gate_ps;
  emit(s, out, "background_gated.csv", gcsv.str());

  s.details = {{"slope_per_m", slope}, {"intercept", intercept}, {"gated_prob_per_pulse", gp}};
  s.check("raman_slope_per_m", "background.raman_slope_per_m", slope);
  s.check("gated_rate_per_ps", "background.gated_rate_per_ps", gp / sw.gate_ps);
  return s;
}

RunSummary run_switch_tomography(const ExperimentConfig& c, const std::filesystem::path& out) {
  RunSummary s;
  const auto& sw = c.switch_tomo;
  const auto src = c.effective_source();
  const auto noise = c.effective_noise();
  const auto stream =
      source::sfwm_channels(source::michelson_pump(src, source::MichelsonArms::FirstOnly), src);
  const DensityMatrix state = source_state(stream, source::SpatialMode::T, src);
  const auto& pair_profile = stream.channels().front().temporal_profile;

  std::uint64_t index = 0;
  for (double length : sw.lengths_m) {
    const SwitchConfig cfg = with_length(c.switch_config, length);
    const std::string tag = length_tag(length);
    double fidelity[2] = {0, 0}, sigma[2] = {0, 0};
    for (int active = 0; active < 2; ++active) {
      TomographyCase tc;
      tc.label = tag + (active ? "_active_T" : "_passive_R");
      tc.state = state;
      tc.pair_prob = src.pair_prob_per_pulse;
      tc.n_pulses = sw.n_pulses;
      tc.noise = noise;
      double port;
      if (active) {
        // Pump timed for the largest overlap with the pair's temporal profile.
        port = best_delay(LoopSwitch(cfg), pair_profile, 1).second *
               switching::survival_probability(cfg.loss_t_db);
        if (!c.ideal) {
          tc.noise.switch_background_prob +=
              0.5 * switching::raman_probability_per_pulse(cfg, sw.gate_ps);
        }
      } else {
        port = (1.0 - cfg.extinction) * switching::survival_probability(cfg.loss_r_db);
      }
      tc.noise.efficiency_idler *= port;
      const auto r = run_tomography(s, out, tc, c.seed * 7919 + index++, sw.n_resamples);
      s.details["cases"][tc.label]["port_probability"] = port;
      fidelity[active] = r.metrics.fidelity_max;
      sigma[active] = r.metric_uncertainties.fidelity_max;
      s.check("fidelity_" + tc.label, "switch_tomo.fidelity", r.metrics.fidelity_max);
    }
    const double combined = std::hypot(sigma[0], sigma[1]);
    const double diff = std::abs(fidelity[1] - fidelity[0]);
    const double z = combined > 0.0 ? diff / combined
                                    : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    s.check("active_vs_passive_" + tag, "switch_tomo.active_passive_sigma", z);
  }
  s.details["source_state_fef"] = quantum::fully_entangled_fraction(state);
  return s;
}

RunSummary run_sep_colors(const ExperimentConfig& c, const std::filesystem::path& out) {
  RunSummary s;
  const auto& sw = c.sep_colors;
  const SwitchConfig& base = c.switch_config;
  const double surv_t = switching::survival_probability(base.loss_t_db);
  const double surv_r = switching::survival_probability(base.loss_r_db);
  const double tau = switching::walkoff(base.fiber).tau_s_ps;
  const double probe_time = base.pump.center_ps + 0.5 * tau;

  struct PortReading {
    double p_t, p_r, phi_t, phi_r;
  };
  // A CW signal sampled mid-window; each color acts alone since the pulses are
  // separated in time. Port powers are corrected for the known port losses.
  auto read = [&](double energy) {
    const LoopSwitch loop(with_energy(base, energy));
    const double t = loop.transmission_at(probe_time);
    PortReading r{t * surv_t, (1.0 - t) * surv_r, 0.0, 0.0};
    const double a = r.p_t / surv_t, b = r.p_r / surv_r;
    r.phi_t = switching::phase_from_port_powers(a, b);
    r.phi_r = 2.0 * std::acos(std::sqrt(b / (a + b)));
    return r;
  };

  CsvWriter csv(
      "edfa_setting_mw,p_T_1545,p_R_1545,p_T_1555,p_R_1555,phi_1545,phi_1555,phi_R_1545,phi_R_1555");
  std::vector<double> e_color, phi_a, phi_b, e_total;
  double disagreement = 0.0;
  for (double setting : sw.edfa_settings_mw) {
    const double total = setting * sw.nj_per_mw;
    const double ea = 0.5 * (1.0 + sw.color_imbalance) * total;
    const double eb = 0.5 * (1.0 - sw.color_imbalance) * total;
    const auto a = read(ea), b = read(eb);
    csv.row() << setting << a.p_t << a.p_r << b.p_t << b.p_r << a.phi_t << b.phi_t << a.phi_r
              << b.phi_r;
    disagreement = std::max({disagreement, std::abs(a.phi_t - a.phi_r), std::abs(b.phi_t - b.phi_r)});
    e_total.push_back(total);
    phi_a.push_back(a.phi_t);
    phi_b.push_back(b.phi_t);
  }
  emit(s, out, "sep_colors.csv", csv.str());

  // Each color alone at half the switching energy, and both together at E_pi.
  std::vector<double> ea_axis, eb_axis, sum;
  for (std::size_t i = 0; i < e_total.size(); ++i) {
    ea_axis.push_back(0.5 * (1.0 + sw.color_imbalance) * e_total[i]);
    eb_axis.push_back(0.5 * (1.0 - sw.color_imbalance) * e_total[i]);
    sum.push_back(phi_a[i] + phi_b[i]);
  }
  std::vector<std::size_t> order(e_total.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return e_total[x] < e_total[y]; });
  auto sorted = [&](const std::vector<double>& v) {
    std::vector<double> o;
    for (auto i : order) o.push_back(v[i]);
    return o;
  };
  const double half = 0.5 * base.e_pi_nj;
  const double pa = interpolate(sorted(ea_axis), sorted(phi_a), half);
  const double pb = interpolate(sorted(eb_axis), sorted(phi_b), half);
  const double ps = interpolate(sorted(e_total), sorted(sum), base.e_pi_nj);
  s.details = {{"phi_1545_at_half_epi", pa}, {"phi_1555_at_half_epi", pb}, {"summed_phi_at_epi", ps}};
  s.check("phase_1545_at_half_epi", "sep_colors.phase_per_color_half_epi", pa);
  s.check("phase_1555_at_half_epi", "sep_colors.phase_per_color_half_epi", pb);
  s.check("port_phase_disagreement", "sep_colors.port_phase_disagreement", disagreement);
  s.check("summed_phase_at_epi", "sep_colors.summed_phase_at_epi", ps);
  return s;
}

RunSummary run_tdm_demux(const ExperimentConfig& c, const std::filesystem::path& out) {
  RunSummary s;
  const auto& sw = c.tdm;
  const auto src = c.effective_source();
  const auto noise = c.effective_noise();
  const auto [w1, w2] = arm_weights(src);
  using source::MichelsonArms;
  using source::SpatialMode;

  const auto both = source::sfwm_channels(source::michelson_pump(src), src);
  SwitchConfig cfg = c.switch_config;
  cfg.pump.center_ps = sw.window_delay_ps;
  const auto demuxed = source::demultiplex(both, window_over_stream(cfg, src));

  // Ideal reference: perfect pairs, same weights.
  source::SourceConfig ideal_src = src;
  ideal_src.pair_tangle = 1.0;
  ideal_src.pair_white_noise = 0.0;
  const auto ideal_both = source::sfwm_channels(source::michelson_pump(ideal_src), ideal_src);
  const double ideal_mux =
      quantum::fully_entangled_fraction(source::project_and_trace(ideal_both, SpatialMode::T));
  const double ideal_demux = quantum::fully_entangled_fraction(source::project_and_trace(
      source::demultiplex(ideal_both, window_over_stream(cfg, ideal_src)), SpatialMode::T));

  struct Case {
    std::string label;
    source::MultiplexedStream stream;
    double weight;
    bool switched;
  };
  const std::vector<Case> cases = {
      {"a_channel1", source::sfwm_channels(source::michelson_pump(src, MichelsonArms::FirstOnly), src), w1, false},
      {"b_channel2", source::sfwm_channels(source::michelson_pump(src, MichelsonArms::SecondOnly), src), w2, false},
      {"c_multiplexed", both, 1.0, false},
      {"d_demultiplexed", demuxed, demuxed.weight_in(SpatialMode::T), true},
  };
  std::uint64_t index = 0;
  for (const auto& k : cases) {
    TomographyCase tc;
    tc.label = k.label;
    tc.state = source_state(k.stream, SpatialMode::T, src);
    tc.pair_prob = src.pair_prob_per_pulse * k.weight;
    tc.n_pulses = sw.n_pulses;
    tc.noise = noise;
    if (k.switched) tc.noise.efficiency_idler *= switching::survival_probability(cfg.loss_t_db);
    const auto r = run_tomography(s, out, tc, c.seed * 7919 + index++, sw.n_resamples);
    const double f = r.metrics.fidelity_max;
    if (k.label == "a_channel1") s.check("fef_channel1", "tdm.channel_fef", f);
    if (k.label == "b_channel2") s.check("fef_channel2", "tdm.channel_fef", f);
    if (k.label == "c_multiplexed") s.check("fef_multiplexed", "tdm.noisy_multiplexed_fef", f);
    if (k.label == "d_demultiplexed") s.check("fef_demultiplexed", "tdm.demultiplexed_fef", f);
  }
  s.check("ideal_multiplexed_fef", "tdm.ideal_multiplexed_fef", ideal_mux);

  const auto& ch = both.channels();
  const auto window = window_over_stream(cfg, src);
  s.details["ideal_multiplexed_fef"] = ideal_mux;
  s.details["ideal_demultiplexed_fef"] = ideal_demux;
  s.details["channel_weights"] = {w1, w2};
  s.details["window_overlap"] = {source::window_overlap(ch[0].temporal_profile, window),
                                 source::window_overlap(ch[1].temporal_profile, window)};
  return s;
}

RunSummary run_eye(const ExperimentConfig& c, const std::filesystem::path& out) {
  RunSummary s;
  const auto& sw = c.eye;
  const auto src = c.effective_source();
  const auto noise = c.effective_noise();
  const auto [w1, w2] = arm_weights(src);
  const auto both = source::sfwm_channels(source::michelson_pump(src), src);
  const auto& ch = both.channels();
  const double rate = src.pair_prob_per_pulse * noise.efficiency_signal * noise.efficiency_idler *
                      switching::survival_probability(c.switch_config.loss_t_db);

  const auto delays = grid(sw.delay_min_ps, sw.delay_max_ps, sw.delay_step_ps);
  std::vector<double> e1(delays.size()), e2(delays.size());
  CsvWriter csv("global_delay_ps,coincidences_ch1,coincidences_ch2,expected_ch1,expected_ch2");
  for (std::size_t i = 0; i < delays.size(); ++i) {
    SwitchConfig cfg = c.switch_config;
    cfg.pump.center_ps = delays[i];
    const auto window = window_over_stream(cfg, src);
    // One channel blocked at a time: each curve is that channel's transmitted pairs.
    const double n = static_cast<double>(sw.n_pulses);
    e1[i] = n * rate * w1 * source::window_overlap(ch[0].temporal_profile, window);
    e2[i] = n * rate * w2 * source::window_overlap(ch[1].temporal_profile, window);
    Rng rng = derive_rng(c.seed, i);
    const auto k1 = sample_poisson(e1[i], rng);
    const auto k2 = sample_poisson(e2[i], rng);
    csv.row() << delays[i] << k1 << k2 << e1[i] << e2[i];
  }
  emit(s, out, "eye.csv", csv.str());

  const double m1 = *std::max_element(e1.begin(), e1.end());
  const double m2 = *std::max_element(e2.begin(), e2.end());
  std::vector<double> n1(e1.size()), n2(e2.size());
  for (std::size_t i = 0; i < e1.size(); ++i) {
    n1[i] = e1[i] / m1;
    n2[i] = e2[i] / m2;
  }
  // Longest run of delays passing channel 1 (>= 95% of its peak) while blocking
  // channel 2 (<= 5% of its peak).
  std::size_t best_lo = 0, best_len = 0;
  for (std::size_t i = 0; i < delays.size();) {
    if (n1[i] >= 0.95 && n2[i] <= 0.05) {
      std::size_t j = i;
      while (j + 1 < delays.size() && n1[j + 1] >= 0.95 && n2[j + 1] <= 0.05) ++j;
      if (j - i + 1 > best_len) {
        best_lo = i;
        best_len = j - i + 1;
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  double optimal = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  if (best_len > 0) {
    optimal = 0.5 * (delays[best_lo] + delays[best_lo + best_len - 1]);
    ratio = interpolate(delays, e1, optimal) / interpolate(delays, e2, optimal);
  }
  double translate = 0.0;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    const double shifted = delays[i] + src.delta_t_ps;
    if (shifted > delays.back()) break;
    translate = std::max(translate, std::abs(n1[i] - interpolate(delays, n2, shifted)));
  }
  s.details = {{"eye_region_ps",
                best_len > 0 ? json{delays[best_lo], delays[best_lo + best_len - 1]} : json(nullptr)},
               {"channel_weights", {w1, w2}}};
  s.check("optimal_delay_ps", "eye.optimal_delay_ps", optimal);
  s.check("translate_error", "eye.translate_error", translate);
  s.check("channel_ratio_at_optimum", "eye.channel_ratio_at_optimum", ratio);
  return s;
}

RunSummary run_scenario(const ExperimentConfig& c, const std::filesystem::path& out) {
  c.validate();
  const auto start = std::chrono::steady_clock::now();
  RunSummary s;
  switch (c.scenario) {
    case Scenario::Contrast: s = run_contrast(c, out); break;
    case Scenario::Window: s = run_window(c, out); break;
    case Scenario::Background: s = run_background(c, out); break;
    case Scenario::SwitchTomo: s = run_switch_tomography(c, out); break;
    case Scenario::SepColors: s = run_sep_colors(c, out); break;
    case Scenario::TdmDemux: s = run_tdm_demux(c, out); break;
    case Scenario::Eye: s = run_eye(c, out); break;
  }
  s.scenario = c.scenario;
  s.seed = c.seed;
  s.config = to_json(c);
  s.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file_atomic(out / "summary.json", s.to_json().dump(2) + "\n");
  write_file_atomic(out / "timing.txt", "wall_time_s " + format_number(s.wall_time_s) + "\n");
  return s;
}

tomo::ReconstructionResult reconstruct_counts_file(const std::string& csv_path, int n_resamples,
                                                   std::uint64_t seed,
                                                   const std::filesystem::path& out) {
  const auto table = tomo::read_counts_csv(csv_path);
  tomo::UncertaintyOptions uo;
  uo.n_resamples = n_resamples;
  uo.seed = seed;
  const auto r = tomo::reconstruct_with_uncertainties(table.records, table.settings, uo);
  write_file_atomic(out / "rho.json", density_matrix_json(r).dump(2) + "\n");
  return r;
}

}  // namespace nolm::experiments
