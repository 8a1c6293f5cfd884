#pragma once

// Sagnac-loop (NOLM) switch driven by cross-phase modulation from a walking-off
// C-band pump. The switching window is the pump's temporal profile convolved with a
// square of width equal to the walkoff time.

#include "nolm/profile.hpp"
#include "nolm/random.hpp"

#include <cstdint>
#include <optional>

namespace nolm::switching {

inline constexpr double kDefaultWalkoffPsPerM = 1.7;
// Group delay of standard fiber near 1310 nm; only the signal/pump difference matters.
inline constexpr double kSignalInverseGroupVelocityPsPerM = 4893.0;

// The pump's inverse group velocity is held as an offset from the signal's so that
// the walkoff rate is exact rather than a difference of two large numbers.
struct FiberParams {
  double length_m = 100.0;
  double inv_gv_signal_ps_per_m = kSignalInverseGroupVelocityPsPerM;
  double walkoff_ps_per_m = kDefaultWalkoffPsPerM;  // 1/v_p - 1/v_s

  static FiberParams standard(double length_m) { return FiberParams{length_m}; }
  double inv_gv_pump_ps_per_m() const { return inv_gv_signal_ps_per_m + walkoff_ps_per_m; }
};

struct WalkoffBreakdown {
  double t_prime_ps = 0.0;  // pump transit time L / v_p
  double delta_x_m = 0.0;   // distance the signal gains on the pump
  double tau_s_ps = 0.0;    // walkoff time
};

// t' = L / v_p = (L + dx) / v_s and tau_s = dx / v_s = L / v_p - L / v_s.
// Throws on negative length, non-positive inverse velocities, or a pump faster than
// the signal.
WalkoffBreakdown walkoff(const FiberParams& fiber);

enum class Regime { Matched, Critical, Walkthrough };

inline constexpr double kRegimeTolerance = 1e-6;
Regime regime(double tau_s_ps, double tau_p_ps);
const char* to_string(Regime r);

enum class PumpShape { Gaussian, Sampled };

struct PumpPulse {
  double center_ps = 0.0;
  double fwhm_ps = 5.0;
  double energy_nj = 2.5;
  PumpShape shape = PumpShape::Gaussian;
  SampledProfile sampled;  // used when shape == Sampled; any grid, resampled as needed

  // Unit-area temporal profile on a grid of the given step, aligned to center_ps.
  SampledProfile unit_area_profile(double step_ps) const;
  void validate() const;
};

struct SwitchConfig {
  FiberParams fiber;
  PumpPulse pump;
  double e_pi_nj = 2.5;
  // Residual routing leakage. 1/151 puts the peak classical contrast at 150:1.
  double extinction = 1.0 / 151.0;
  double loss_t_db = 0.0;
  double loss_r_db = 0.0;
  double raman_per_m = 4e-7;
  double raman_per_ps = 2e-7;
  double grid_step_ps = 0.5;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Accumulated cross phase (radians) sampled on a uniform grid.
struct PhaseProfile {
  double t0_ps = 0.0;
  double step_ps = 0.5;
  std::vector<double> phi;

  double at(double t) const;  // zero outside the sampled span
  double max() const;
  SampledProfile as_profile() const { return {t0_ps, step_ps, phi}; }
};

// phi(t) = pi (E / E_pi) * integral_{t - tau_s}^{t} P(s) ds for the unit-area pump P.
PhaseProfile phase_profile(const PumpPulse& pump, double tau_s_ps, double e_pi_nj, double step_ps);
PhaseProfile phase_profile(const SwitchConfig& config);

// T = eps + (1 - 2 eps) sin^2(phi / 2)
double transmission(double phi, double extinction);
SampledProfile transmission_profile(const PhaseProfile& phase, double extinction);
// Transmission sampled over [t_lo, t_hi]; phi = 0 (passive reflection) outside the phase span.
SampledProfile transmission_profile(const PhaseProfile& phase, double extinction, double t_lo_ps,
                                    double t_hi_ps);

enum class Port { T, R, Lost };
const char* to_string(Port p);

double survival_probability(double loss_db);

struct PortProbabilities {
  double t = 0.0;
  double r = 0.0;
  double lost = 0.0;
};

// A switch with its phase profile computed once.
class LoopSwitch {
 public:
  explicit LoopSwitch(SwitchConfig config);
  // Overrides the walkoff time implied by the fiber (used when fitting windows).
  LoopSwitch(SwitchConfig config, double tau_s_ps);

  const SwitchConfig& config() const { return config_; }
  const PhaseProfile& phase() const { return phase_; }
  double tau_s_ps() const { return tau_s_ps_; }

  double transmission_at(double t_ps) const;
  PortProbabilities port_probabilities(double arrival_ps) const;
  Port route(double arrival_ps, Rng& rng) const;

 private:
  SwitchConfig config_;
  double tau_s_ps_;
  PhaseProfile phase_;
};

Port route(double arrival_ps, const SwitchConfig& config, Rng& rng);

// Port-T over port-R energy for a probe intensity profile (absolute times).
double contrast(const SampledProfile& probe, const SwitchConfig& config);
double contrast(const SampledProfile& probe, const LoopSwitch& sw);

// For each delay d: integral of signal(t - d)^exponent T(t) dt over integral of signal^exponent.
Curve measured_window(const SwitchConfig& config, const SampledProfile& signal, int exponent,
                      std::span<const double> delays);
Curve measured_window(const LoopSwitch& sw, const SampledProfile& signal, int exponent,
                      std::span<const double> delays);

struct WindowFit {
  double tau_s_ps = 0.0;
  double amplitude = 0.0;
  double intrinsic_fwhm_ps = 0.0;
  double relative_rms_residual = 0.0;
};

// Fits walkoff time and amplitude of the measured-window model to a measured curve,
// holding the pump shape, pump energy, E_pi and extinction of `model` fixed. Throws
// std::runtime_error when the best fit leaves a relative RMS residual above
// `max_relative_residual`.
WindowFit deconvolve_window(const Curve& measured, const SampledProfile& signal, int exponent,
                            const SwitchConfig& model, double max_relative_residual = 0.05);

// FWHM of the transmission window T(t) implied by the config.
double intrinsic_window_fwhm(const SwitchConfig& config);

struct RamanBackground {
  double expected = 0.0;
  std::int64_t sampled_counts = 0;
};

// Expected background photons over n_pulses: per-pulse probability raman_per_m * L,
// capped by raman_per_ps * gate when a gate is given.
double raman_probability_per_pulse(const SwitchConfig& config, std::optional<double> gate_ps);
RamanBackground raman_background(const SwitchConfig& config, std::int64_t n_pulses,
                                 std::optional<double> gate_ps, Rng& rng);

// phi = 2 asin(sqrt(p_t / (p_t + p_r)))
double phase_from_port_powers(double p_t, double p_r);

// Classical 1305-nm test pulse: Gaussian core plus a one-sided exponential tail,
// truncated to a fixed total width.
struct TestPulseShape {
  double core_fwhm_ps = 100.0;
  double total_width_ps = 370.0;
  double tail_fraction = 0.10;
  double tail_decay_ps = 100.0;
  double center_ps = 0.0;
  void validate() const;
};

// Unit-area profile; support starts 1.5 core FWHM ahead of the core center.
SampledProfile test_pulse(const TestPulseShape& shape, double step_ps);

}  // namespace nolm::switching
