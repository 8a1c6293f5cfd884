#pragma once

// Dual-channel time-division-multiplexed entangled-pair source. The five-qubit state
// (signal/idler polarization, shared time bin, idler spatial mode) is held in factored
// form: one weighted channel per (time bin, spatial mode) carrying a two-qubit
// polarization ket and the pair-emission temporal profile.

#include "nolm/profile.hpp"
#include "nolm/quantum.hpp"

#include <vector>

namespace nolm::source {

struct SourceConfig {
  double pump_fwhm_ps = 100.0;
  double rep_rate_mhz = 50.0;
  double pair_prob_per_pulse = 0.001;
  double delta_t_ps = 300.0;
  double c1_over_c2 = 1.25;
  // Center of the leading time bin on the pump-clock axis.
  double t0_ps = 300.0;
  // Tangle of each branch state cos(t)|HH> +/- sin(t)|VV>; 1 gives exact Bell states.
  double pair_tangle = 1.0;
  // White-noise admixture applied to reconstructed-from-source polarization states.
  double pair_white_noise = 0.0;
  double grid_step_ps = 0.5;

  void validate() const;
};

enum class SpatialMode { T, R };
const char* to_string(SpatialMode m);

struct PumpChannel {
  double t_center_ps = 0.0;
  double amplitude = 0.0;  // sqrt(c_k)
  quantum::PolarizationKet jones = quantum::PolarizationKet::horizontal();
};

struct EntangledChannel {
  double t_center_ps = 0.0;
  double weight = 0.0;  // c_k^2
  quantum::PolarizationKet pol_state = quantum::bell_state(quantum::BellState::PhiPlus);
  SampledProfile temporal_profile;
  SpatialMode spatial_mode = SpatialMode::T;
};

class MultiplexedStream {
 public:
  // Validates weights (nonnegative, summing to 1 within 1e-9), two-qubit states,
  // positive-area profiles, and bins at least 1 ps apart within each spatial mode.
  explicit MultiplexedStream(std::vector<EntangledChannel> channels);

  const std::vector<EntangledChannel>& channels() const { return channels_; }
  double weight_in(SpatialMode mode) const;
  double total_weight() const;

 private:
  std::vector<EntangledChannel> channels_;
};

enum class MichelsonArms { Both, FirstOnly, SecondOnly };

// Two pump pulses at t0 and t0 + delta_t with amplitudes sqrt(c1), sqrt(c2)
// (c1^2 + c2^2 = 1, c1/c2 from the config) and polarizations (H+V)/sqrt2 and
// (H+iV)/sqrt2. A blocked arm yields a zero-amplitude channel.
std::vector<PumpChannel> michelson_pump(const SourceConfig& config,
                                        MichelsonArms arms = MichelsonArms::Both);

// Pair-emission density: pointwise square of the pump intensity, unit area.
SampledProfile temporal_pair_density(const SampledProfile& pump_intensity);

// Channel at each pump bin with weight c_k^2 (renormalized over open arms). Only the
// two pump polarizations produced by michelson_pump are supported.
MultiplexedStream sfwm_channels(const std::vector<PumpChannel>& pump, const SourceConfig& config);

// Overlap p_k of each channel's profile with the window T(t): a T-mode part with weight
// w_k p_k and an R-mode part with weight w_k (1 - p_k). Throws if the window's sampled
// span does not cover every channel's support.
MultiplexedStream demultiplex(const MultiplexedStream& stream, const SampledProfile& window);

// Overlap of a unit-area temporal profile with a transmission window.
double window_overlap(const SampledProfile& profile, const SampledProfile& window);

// Incoherent mixture of the branch states found in `mode` (time bins traced out).
quantum::DensityMatrix project_and_trace(const MultiplexedStream& stream, SpatialMode mode);

// Applies the configured white-noise admixture to a source-derived state.
quantum::DensityMatrix apply_source_imperfection(const quantum::DensityMatrix& rho,
                                                 const SourceConfig& config);

}  // namespace nolm::source
