#include "nolm/reference_values.hpp"

#include <limits>
#include <numbers>
#include <stdexcept>

namespace nolm::experiments {

const std::vector<ReferenceValue>& reference_table() {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kPi = std::numbers::pi;
  static const std::vector<ReferenceValue> table = {
      {"contrast.classical_peak_500m", 150.0, 148.5, 151.5, "calibrated",
       "peak classical contrast, 500-m loop (sets the extinction)"},
      {"contrast.classical_peak_energy_500m_nj", 2.5, 2.4, 2.6, "measured",
       "pump energy of the classical contrast peak, 500-m loop"},
      {"contrast.single_photon_peak_500m", 120.0, 100.0, 150.0, "measured",
       "peak single-photon contrast, 500-m loop"},
      {"contrast.classical_peak_100m", 9.2, 4.6, 15.0, "measured",
       "peak classical contrast with the tailed probe, 100-m loop (factor-2 band, below 15)"},
      {"contrast.zero_energy_baseline_ratio", 1.0, 1.0 - 1e-9, 1.0 + 1e-9, "derived",
       "contrast without pump divided by eps/(1-eps)"},
      {"window.intrinsic_fwhm_100m", 180.0, 162.0, 198.0, "measured",
       "deconvolved intrinsic window FWHM, 100-m loop (ps)"},
      {"window.intrinsic_fwhm_500m", 900.0, 810.0, 990.0, "measured",
       "deconvolved intrinsic window FWHM, 500-m loop (ps)"},
      {"window.broadening_100m", 175.0, 150.0, 200.0, "measured",
       "exponent-1 measured FWHM minus intrinsic FWHM, 100-m loop (ps)"},
      {"window.broadening_500m", 175.0, 150.0, 200.0, "measured",
       "exponent-1 measured FWHM minus intrinsic FWHM, 500-m loop (ps)"},
      {"window.short_loop_fwhm_over_probe", 1.0, 0.9, 1.1, "derived",
       "exponent-1 measured FWHM over probe FWHM, 2-m loop"},
      {"background.raman_slope_per_m", 4e-7, 3.96e-7, 4.04e-7, "measured",
       "fitted background probability per pulse per meter"},
      {"background.gated_rate_per_ps", 2e-7, 1.9e-7, 2.1e-7, "measured",
       "gated background probability per ps of gate"},
      {"switch_tomo.fidelity", 0.995, 0.99, 1.0, "measured",
       "fully entangled fraction of each reconstructed state"},
      {"switch_tomo.active_passive_sigma", 0.0, 0.0, 2.0, "measured",
       "|F(active) - F(passive)| in units of the combined standard deviation"},
      {"sep_colors.phase_per_color_half_epi", kPi / 2, 0.99 * kPi / 2, 1.01 * kPi / 2, "derived",
       "phase from one color at half the switching energy (rad)"},
      {"sep_colors.port_phase_disagreement", 0.0, 0.0, 1e-9, "derived",
       "largest |phase from T port - phase from R port| (rad)"},
      {"sep_colors.summed_phase_at_epi", kPi, 0.99 * kPi, 1.01 * kPi, "measured",
       "sum of both colors' phases at total energy E_pi (rad)"},
      {"tdm.ideal_multiplexed_fef", 0.6098, 0.6097, 0.6099, "derived",
       "Bell-diagonal fully entangled fraction of the ideal multiplexed state"},
      {"tdm.noisy_multiplexed_fef", 0.589, 0.569, 0.609, "measured",
       "reconstructed fully entangled fraction, both channels"},
      {"tdm.demultiplexed_fef", 0.986, 0.98, 1.0, "measured",
       "reconstructed fully entangled fraction after demultiplexing"},
      {"tdm.channel_fef", 0.995, 0.99, 1.0, "measured",
       "reconstructed fully entangled fraction of a single channel"},
      {"eye.optimal_delay_ps", 225.0, 200.0, 250.0, "measured",
       "midpoint of the delay region passing channel 1 and blocking channel 2 (ps)"},
      {"eye.translate_error", 0.0, 0.0, 1e-3, "derived",
       "max difference between normalized channel curves shifted by the bin spacing"},
      {"eye.channel_ratio_at_optimum", 50.0, 50.0, kInf, "derived",
       "channel-1 to channel-2 transmitted coincidences at the optimal delay"},
  };
  return table;
}

const ReferenceValue& reference(const std::string& id) {
  for (const auto& r : reference_table()) {
    if (r.id == id) return r;
  }
  throw std::out_of_range("unknown reference value: " + id);
}

}  // namespace nolm::experiments
