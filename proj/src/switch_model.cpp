#include "nolm/switch_model.hpp"

#include "nolm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nolm::switching {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

double pump_margin_ps(const PumpPulse& pump) { return 4.0 * pump.fwhm_ps; }

}  // namespace

WalkoffBreakdown walkoff(const FiberParams& fiber) {
  require(fiber.length_m >= 0.0, "walkoff: fiber length must be nonnegative");
  require(fiber.inv_gv_signal_ps_per_m > 0.0, "walkoff: inverse group velocities must be positive");
  require(fiber.walkoff_ps_per_m >= 0.0, "walkoff: the pump must not outrun the signal");
  WalkoffBreakdown w;
  w.tau_s_ps = fiber.length_m * fiber.walkoff_ps_per_m;
  w.t_prime_ps = fiber.length_m * fiber.inv_gv_pump_ps_per_m();
  w.delta_x_m = w.tau_s_ps / fiber.inv_gv_signal_ps_per_m;
  return w;
}

Regime regime(double tau_s_ps, double tau_p_ps) {
  require(tau_s_ps >= 0.0 && tau_p_ps >= 0.0, "regime: times must be nonnegative");
  if (std::abs(tau_s_ps - tau_p_ps) <= kRegimeTolerance * tau_p_ps) return Regime::Critical;
  return tau_s_ps < tau_p_ps ? Regime::Matched : Regime::Walkthrough;
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Matched: return "matched";
    case Regime::Critical: return "critical";
    case Regime::Walkthrough: return "walkthrough";
  }
  return "?";
}

void PumpPulse::validate() const {
  require(fwhm_ps > 0.0, "pump.fwhm_ps must be positive");
  require(energy_nj >= 0.0, "pump.energy_nj must be nonnegative");
  if (shape == PumpShape::Sampled) {
    require(!sampled.empty(), "pump.sampled profile is empty");
    require(sampled.step_ps > 0.0, "pump.sampled step must be positive");
    for (double v : sampled.values) require(v >= 0.0, "pump.sampled profile must be nonnegative");
    require(sampled.area() > 0.0, "pump.sampled profile must have positive area");
  }
}

SampledProfile PumpPulse::unit_area_profile(double step_ps) const {
  validate();
  if (shape == PumpShape::Gaussian) {
    return gaussian_profile(center_ps, fwhm_ps, step_ps, pump_margin_ps(*this));
  }
  // Sampled shapes carry times relative to center_ps.
  const auto n = static_cast<std::size_t>(
      std::floor((sampled.t_last() - sampled.t0_ps) / step_ps)) + 1;
  auto p = make_profile(center_ps + sampled.t0_ps, step_ps, n);
  for (std::size_t i = 0; i < n; ++i) p.values[i] = sampled.at(sampled.t0_ps + static_cast<double>(i) * step_ps);
  return normalized_to_unit_area(p);
}

void SwitchConfig::validate() const {
  require(fiber.length_m >= 0.0, "switch.fiber.length_m must be nonnegative");
  require(fiber.inv_gv_signal_ps_per_m > 0.0, "switch.fiber.inv_gv_signal_ps_per_m must be positive");
  require(fiber.walkoff_ps_per_m >= 0.0, "switch.fiber.walkoff_ps_per_m must be nonnegative");
  pump.validate();
  require(e_pi_nj > 0.0, "switch.e_pi_nj must be positive");
  require(extinction >= 0.0 && extinction < 0.5, "switch.extinction must lie in [0, 0.5)");
  require(loss_t_db >= 0.0 && loss_r_db >= 0.0, "switch losses must be nonnegative");
  require(raman_per_m >= 0.0 && raman_per_ps >= 0.0, "switch Raman rates must be nonnegative");
  require(grid_step_ps > 0.0, "switch.grid_step_ps must be positive");
  require(grid_step_ps <= pump.fwhm_ps / 5.0 + 1e-12,
          "switch.grid_step_ps must not exceed pump.fwhm_ps / 5");
}

double PhaseProfile::at(double t) const {
  if (phi.empty()) return 0.0;
  const double u = (t - t0_ps) / step_ps;
  if (u < 0.0 || u > static_cast<double>(phi.size() - 1)) return 0.0;
  const auto i = static_cast<std::size_t>(u);
  if (i + 1 >= phi.size()) return phi.back();
  return phi[i] + (u - static_cast<double>(i)) * (phi[i + 1] - phi[i]);
}

double PhaseProfile::max() const {
  return phi.empty() ? 0.0 : *std::max_element(phi.begin(), phi.end());
}

PhaseProfile phase_profile(const PumpPulse& pump, double tau_s_ps, double e_pi_nj, double step_ps) {
  require(tau_s_ps >= 0.0, "phase_profile: walkoff time must be nonnegative");
  require(e_pi_nj > 0.0, "phase_profile: E_pi must be positive");
  require(step_ps > 0.0 && step_ps <= pump.fwhm_ps / 5.0 + 1e-12,
          "phase_profile: grid step too coarse to resolve the pump");
  const SampledProfile p = pump.unit_area_profile(step_ps);

  // Running integral of the pump on its own grid (trapezoid), normalized to 1.
  std::vector<double> cumulative(p.size(), 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + 0.5 * step_ps * (p.values[i - 1] + p.values[i]);
  }
  const double total = cumulative.back();
  require(total > 0.0, "phase_profile: pump has no area");
  for (double& c : cumulative) c /= total;
  const SampledProfile cum{p.t0_ps, step_ps, cumulative};

  const auto extra = static_cast<std::size_t>(std::ceil(tau_s_ps / step_ps));
  PhaseProfile out;
  out.t0_ps = p.t0_ps;
  out.step_ps = step_ps;
  out.phi.resize(p.size() + extra + 1);
  const double scale = std::numbers::pi * pump.energy_nj / e_pi_nj;
  auto cum_at = [&](double t) {
    if (t <= cum.t0_ps) return 0.0;
    if (t >= cum.t_last()) return 1.0;
    return cum.at(t);
  };
  for (std::size_t i = 0; i < out.phi.size(); ++i) {
    const double t = out.t0_ps + static_cast<double>(i) * step_ps;
    out.phi[i] = std::max(0.0, scale * (cum_at(t) - cum_at(t - tau_s_ps)));
  }
  return out;
}

PhaseProfile phase_profile(const SwitchConfig& config) {
  config.validate();
  return phase_profile(config.pump, walkoff(config.fiber).tau_s_ps, config.e_pi_nj,
                       config.grid_step_ps);
}

double transmission(double phi, double extinction) {
  const double s = std::sin(0.5 * phi);
  return extinction + (1.0 - 2.0 * extinction) * s * s;
}

SampledProfile transmission_profile(const PhaseProfile& phase, double extinction) {
  require(extinction >= 0.0 && extinction < 0.5, "transmission_profile: extinction must lie in [0, 0.5)");
  SampledProfile out{phase.t0_ps, phase.step_ps, std::vector<double>(phase.phi.size())};
  for (std::size_t i = 0; i < phase.phi.size(); ++i) out.values[i] = transmission(phase.phi[i], extinction);
  return out;
}

SampledProfile transmission_profile(const PhaseProfile& phase, double extinction, double t_lo_ps,
                                    double t_hi_ps) {
  require(extinction >= 0.0 && extinction < 0.5, "transmission_profile: extinction must lie in [0, 0.5)");
  require(t_hi_ps > t_lo_ps, "transmission_profile: empty span");
  const double step = phase.step_ps;
  const double k_lo = std::floor((t_lo_ps - phase.t0_ps) / step);
  const double k_hi = std::ceil((t_hi_ps - phase.t0_ps) / step);
  const auto n = static_cast<std::size_t>(k_hi - k_lo) + 1;
  auto out = make_profile(phase.t0_ps + k_lo * step, step, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<long long>(k_lo) + static_cast<long long>(i);
    const double phi =
        (k >= 0 && static_cast<std::size_t>(k) < phase.phi.size()) ? phase.phi[static_cast<std::size_t>(k)] : 0.0;
    out.values[i] = transmission(phi, extinction);
  }
  return out;
}

const char* to_string(Port p) {
  switch (p) {
    case Port::T: return "T";
    case Port::R: return "R";
    case Port::Lost: return "lost";
  }
  return "?";
}

double survival_probability(double loss_db) {
  require(loss_db >= 0.0, "loss must be nonnegative");
  return std::pow(10.0, -loss_db / 10.0);
}

LoopSwitch::LoopSwitch(SwitchConfig config)
    : LoopSwitch(config, (config.validate(), walkoff(config.fiber).tau_s_ps)) {}

LoopSwitch::LoopSwitch(SwitchConfig config, double tau_s_ps)
    : config_(std::move(config)), tau_s_ps_(tau_s_ps) {
  config_.validate();
  phase_ = phase_profile(config_.pump, tau_s_ps_, config_.e_pi_nj, config_.grid_step_ps);
}

double LoopSwitch::transmission_at(double t_ps) const {
  return transmission(phase_.at(t_ps), config_.extinction);
}

PortProbabilities LoopSwitch::port_probabilities(double arrival_ps) const {
  const double t = transmission_at(arrival_ps);
  PortProbabilities p;
  p.t = t * survival_probability(config_.loss_t_db);
  p.r = (1.0 - t) * survival_probability(config_.loss_r_db);
  p.lost = 1.0 - p.t - p.r;
  return p;
}

Port LoopSwitch::route(double arrival_ps, Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const bool to_t = u(rng) < transmission_at(arrival_ps);
  const double survive = survival_probability(to_t ? config_.loss_t_db : config_.loss_r_db);
  if (u(rng) >= survive) return Port::Lost;
  return to_t ? Port::T : Port::R;
}

Port route(double arrival_ps, const SwitchConfig& config, Rng& rng) {
  return LoopSwitch(config).route(arrival_ps, rng);
}

double contrast(const SampledProfile& probe, const LoopSwitch& sw) {
  double through = 0.0;
  double reflected = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    require(probe.values[i] >= 0.0, "contrast: probe must be nonnegative");
    const double t = sw.transmission_at(probe.time(i));
    through += probe.values[i] * t;
    reflected += probe.values[i] * (1.0 - t);
  }
  require(through + reflected > 0.0, "contrast: probe has zero area");
  return through / reflected;
}

double contrast(const SampledProfile& probe, const SwitchConfig& config) {
  return contrast(probe, LoopSwitch(config));
}

Curve measured_window(const LoopSwitch& sw, const SampledProfile& signal, int exponent,
                      std::span<const double> delays) {
  require(!delays.empty(), "measured_window: empty delay list");
  require(exponent == 1 || exponent == 2, "measured_window: exponent must be 1 or 2");
  const SampledProfile weight = powered(signal, exponent);
  Curve c;
  c.x.assign(delays.begin(), delays.end());
  c.y.resize(delays.size());
  const double total = std::accumulate(weight.values.begin(), weight.values.end(), 0.0);
  for (std::size_t k = 0; k < delays.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) {
      if (weight.values[i] == 0.0) continue;
      acc += weight.values[i] * sw.transmission_at(weight.time(i) + delays[k]);
    }
    c.y[k] = acc / total;
  }
  return c;
}

Curve measured_window(const SwitchConfig& config, const SampledProfile& signal, int exponent,
                      std::span<const double> delays) {
  return measured_window(LoopSwitch(config), signal, exponent, delays);
}

namespace {

double switched_fwhm(const LoopSwitch& sw) {
  const auto& ph = sw.phase();
  const double margin = 10.0 * sw.config().pump.fwhm_ps;
  const double lo = ph.t0_ps - margin;
  const double hi = ph.t0_ps + static_cast<double>(ph.phi.size()) * ph.step_ps + margin;
  SampledProfile t = transmission_profile(ph, sw.config().extinction, lo, hi);
  for (double& v : t.values) v -= sw.config().extinction;
  return fwhm(t);
}

}  // namespace

double intrinsic_window_fwhm(const SwitchConfig& config) { return switched_fwhm(LoopSwitch(config)); }

WindowFit deconvolve_window(const Curve& measured, const SampledProfile& signal, int exponent,
                            const SwitchConfig& model, double max_relative_residual) {
  require(measured.x.size() == measured.y.size() && measured.x.size() >= 3,
          "deconvolve_window: measured curve needs at least three points");
  model.validate();
  const double peak = *std::max_element(measured.y.begin(), measured.y.end());
  require(peak > 0.0, "deconvolve_window: measured curve has no positive peak");

  struct Eval {
    double sse;
    double amplitude;
  };
  auto evaluate = [&](double tau) {
    const LoopSwitch sw(model, std::max(tau, 0.0));
    const Curve m = measured_window(sw, signal, exponent, measured.x);
    double my = 0.0, mm = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < m.y.size(); ++i) {
      my += m.y[i] * measured.y[i];
      mm += m.y[i] * m.y[i];
      yy += measured.y[i] * measured.y[i];
    }
    const double a = mm > 0.0 ? my / mm : 0.0;
    return Eval{std::max(yy - a * my, 0.0), a};
  };

  // The measured width bounds the walkoff time from above.
  const double span = measured.x.back() - measured.x.front();
  double upper = span;
  try {
    upper = std::min(span, 2.0 * fwhm(measured) + 10.0 * model.pump.fwhm_ps);
  } catch (const std::runtime_error&) {
  }
  constexpr int kScan = 64;
  std::vector<double> taus(kScan + 1), sse(kScan + 1);
  std::size_t best = 0;
  for (int i = 0; i <= kScan; ++i) {
    taus[i] = upper * i / kScan;
    sse[i] = evaluate(taus[i]).sse;
    if (sse[i] < sse[best]) best = static_cast<std::size_t>(i);
  }
  double tau = taus[best];
  if (best > 0 && best < static_cast<std::size_t>(kScan)) {
    try {
      const auto r = opt::minimize_scalar([&](double t) { return evaluate(t).sse; }, taus[best - 1],
                                          taus[best], taus[best + 1], 1e-3 * model.grid_step_ps);
      if (r.value <= sse[best]) tau = r.x[0];
    } catch (const std::invalid_argument&) {
      // flat bracket; keep the scan optimum
    }
  }
  const Eval e = evaluate(tau);
  WindowFit fit;
  fit.tau_s_ps = tau;
  fit.amplitude = e.amplitude;
  fit.relative_rms_residual = std::sqrt(e.sse / static_cast<double>(measured.y.size())) / peak;
  if (!(fit.relative_rms_residual <= max_relative_residual)) {
    throw std::runtime_error("deconvolve_window: fit did not converge (relative RMS residual " +
                             std::to_string(fit.relative_rms_residual) + ")");
  }
  fit.intrinsic_fwhm_ps = switched_fwhm(LoopSwitch(model, tau));
  return fit;
}

double raman_probability_per_pulse(const SwitchConfig& config, std::optional<double> gate_ps) {
  const double ungated = config.raman_per_m * config.fiber.length_m;
  if (!gate_ps) return ungated;
  require(*gate_ps >= 0.0, "raman_background: gate must be nonnegative");
  return std::min(ungated, config.raman_per_ps * *gate_ps);
}

RamanBackground raman_background(const SwitchConfig& config, std::int64_t n_pulses,
                                 std::optional<double> gate_ps, Rng& rng) {
  require(n_pulses >= 0, "raman_background: n_pulses must be nonnegative");
  RamanBackground b;
  b.expected = static_cast<double>(n_pulses) * raman_probability_per_pulse(config, gate_ps);
  b.sampled_counts = sample_poisson(b.expected, rng);
  return b;
}

double phase_from_port_powers(double p_t, double p_r) {
  require(p_t >= 0.0 && p_r >= 0.0, "phase_from_port_powers: powers must be nonnegative");
  require(p_t + p_r > 0.0, "phase_from_port_powers: both powers are zero");
  return 2.0 * std::asin(std::sqrt(p_t / (p_t + p_r)));
}

void TestPulseShape::validate() const {
  require(core_fwhm_ps > 0.0, "probe.core_fwhm_ps must be positive");
  require(total_width_ps > 1.5 * core_fwhm_ps, "probe.total_width_ps must exceed 1.5 core FWHM");
  require(tail_fraction >= 0.0 && tail_fraction < 1.0, "probe.tail_fraction must lie in [0, 1)");
  require(tail_decay_ps > 0.0, "probe.tail_decay_ps must be positive");
}

SampledProfile test_pulse(const TestPulseShape& shape, double step_ps) {
  shape.validate();
  const double start = shape.center_ps - 1.5 * shape.core_fwhm_ps;
  const auto n = static_cast<std::size_t>(std::floor(shape.total_width_ps / step_ps)) + 1;
  const double sigma = shape.core_fwhm_ps / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  auto core = make_profile(start, step_ps, n);
  auto tail = make_profile(start, step_ps, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = core.time(i) - shape.center_ps;
    core.values[i] = std::exp(-0.5 * dt * dt / (sigma * sigma));
    tail.values[i] = dt >= 0.0 ? std::exp(-dt / shape.tail_decay_ps) : 0.0;
  }
  const double ca = core.area();
  const double ta = tail.area();
  auto out = make_profile(start, step_ps, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = (1.0 - shape.tail_fraction) * core.values[i] / ca +
                    (ta > 0.0 ? shape.tail_fraction * tail.values[i] / ta : 0.0);
  }
  return out;
}

}  // namespace nolm::switching
