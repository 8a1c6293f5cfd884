#pragma once

// Polarization analyzers, coincidence counting with accidental subtraction, and
// maximum-likelihood two-qubit state reconstruction.
//
// Each arm is a QWP followed by an HWP and a PBS whose transmitted (H) port is
// detected. The analyzer therefore projects onto Q^dagger H^dagger |H>.

#include "nolm/optimize.hpp"
#include "nolm/quantum.hpp"
#include "nolm/random.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nolm::tomo {

using quantum::DensityMatrix;
using quantum::JonesOperator;

// Fast axis at theta from horizontal. QWP = R(t) diag(1, -i) R(-t) and
// HWP = R(t) diag(1, -1) R(-t), with no extra global phase.
JonesOperator jones_qwp(double theta_deg);
JonesOperator jones_hwp(double theta_deg);

struct AnalyzerSetting {
  double qwp_signal_deg = 0.0;
  double hwp_signal_deg = 0.0;
  double qwp_idler_deg = 0.0;
  double hwp_idler_deg = 0.0;
  void validate() const;
};

enum class AnalyzerState { H, V, D, A, R, L };
inline constexpr std::array<AnalyzerState, 6> kAnalyzerStates = {
    AnalyzerState::H, AnalyzerState::V, AnalyzerState::D,
    AnalyzerState::A, AnalyzerState::R, AnalyzerState::L};
const char* to_string(AnalyzerState s);

struct WaveplateAngles {
  double qwp_deg = 0.0;
  double hwp_deg = 0.0;
};
WaveplateAngles analyzer_angles(AnalyzerState s);

// Rank-1 projector selected by one arm's waveplates.
Eigen::Matrix2cd arm_projector(double qwp_deg, double hwp_deg);
Eigen::Matrix4cd setting_projector(const AnalyzerSetting& s);

// The 6 x 6 product grid over {H, V, D, A, R, L}; index = 6 * signal + idler.
std::vector<AnalyzerSetting> standard_settings();
std::string standard_setting_label(std::size_t index);

struct NoiseParams {
  double dark_prob_per_gate = 0.0;
  double background_prob_per_gate = 0.0;
  double efficiency_signal = 1.0;
  double efficiency_idler = 1.0;
  // Extra per-gate noise on the idler arm only (switch-generated Raman photons).
  double switch_background_prob = 0.0;
  void validate() const;
};

struct CountRecord {
  int setting_id = 0;
  std::int64_t n_pulses = 0;
  std::int64_t coincidences_raw = 0;
  std::int64_t singles_signal = 0;
  std::int64_t singles_idler = 0;
  double accidentals_est = 0.0;
  double coincidences_corrected = 0.0;
};

struct ExpectedCounts {
  double coincidences = 0.0;
  double accidentals = 0.0;  // part of `coincidences` from uncorrelated clicks
  double singles_signal = 0.0;
  double singles_idler = 0.0;
};

// Per-pulse click probabilities are the pair term plus dark and background noise.
// Coincidences are the correlated pair term plus the accidental floor
// n (d_s d_i + d_s q_i + q_s d_i), with q the pair-photon click probability per arm;
// multi-pair emission is neglected.
ExpectedCounts expected_counts(const DensityMatrix& rho, const AnalyzerSetting& setting,
                               std::int64_t n_pulses, double pair_prob, const NoiseParams& noise);

// Poisson draws of singles and coincidences per setting, followed by accidental
// subtraction. Deterministic given the rng state.
std::vector<CountRecord> simulate_counts(const DensityMatrix& rho,
                                         const std::vector<AnalyzerSetting>& settings,
                                         std::int64_t n_pulses, double pair_prob,
                                         const NoiseParams& noise, Rng& rng);

// Noise-free expected coincidences used directly as counts (corrected = expected).
std::vector<CountRecord> analytic_counts(const DensityMatrix& rho,
                                         const std::vector<AnalyzerSetting>& settings,
                                         std::int64_t n_pulses, double pair_prob);

// accidentals = singles_s * singles_i / n_pulses; corrected = raw - accidentals.
CountRecord subtract_accidentals(CountRecord record);

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MleOptions {
  std::size_t random_starts = 2;
  std::uint64_t seed = 7;
  opt::GradientOptions optimizer{};
};

struct ReconstructionResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed(4);
  double objective_value = 0.0;
  double normalization = 0.0;  // fitted counts scale N (per unit n_pulses ratio)
  quantum::EntanglementMetrics metrics;
  quantum::EntanglementMetrics metric_uncertainties;
  int n_resamples = 0;
  int n_excluded = 0;
};

// Minimizes sum_v (s_v Tr(A P_v) - n_v)^2 / (2 max(s_v Tr(A P_v), 0.5)) over
// A = M^dagger M, M lower triangular. rho = A / Tr A and N = Tr A. s_v is the record's
// n_pulses relative to the first record. Records are matched to settings by setting_id.
// Throws ConvergenceError if no start converges.
ReconstructionResult mle_reconstruct(const std::vector<CountRecord>& records,
                                     const std::vector<AnalyzerSetting>& settings,
                                     const MleOptions& options = {});

// The objective above for a given state and normalization (exposed for tests).
double mle_objective(const DensityMatrix& rho, double normalization,
                     const std::vector<CountRecord>& records,
                     const std::vector<AnalyzerSetting>& settings);

// The objective in factor form, A = scale * M^dagger M(t), with its analytic gradient
// written to `grad` when non-null (exposed for tests).
double factor_objective(const std::vector<double>& t, double scale,
                        const std::vector<CountRecord>& records,
                        const std::vector<AnalyzerSetting>& settings, std::vector<double>* grad);

struct UncertaintyOptions {
  int n_resamples = 100;
  std::uint64_t seed = 1;
  // When false the observed counts are reused unchanged, giving zero spread.
  bool resample = true;
  MleOptions mle{};
};

struct MetricUncertainty {
  quantum::EntanglementMetrics sigma;
  int n_used = 0;
  int n_excluded = 0;
};

// Parametric bootstrap: raw coincidences and singles are redrawn as Poisson with the
// observed value as mean (resample i uses seed + i), accidentals are re-estimated and
// the state re-reconstructed. Reports the sample standard deviation of each metric.
// Resamples that fail to converge are excluded; more than 10% exclusions throws.
MetricUncertainty uncertainties_mc(const std::vector<CountRecord>& records,
                                   const std::vector<AnalyzerSetting>& settings,
                                   const UncertaintyOptions& options = {});

// mle_reconstruct followed by uncertainties_mc, filled into one result.
ReconstructionResult reconstruct_with_uncertainties(const std::vector<CountRecord>& records,
                                                    const std::vector<AnalyzerSetting>& settings,
                                                    const UncertaintyOptions& options = {});

// Lower-triangular Cholesky-style parameterization used by the reconstruction:
// 4 real diagonal entries followed by real/imaginary pairs of the 6 strictly lower ones.
inline constexpr std::size_t kParameterCount = 16;
Eigen::Matrix4cd parameters_to_factor(const std::vector<double>& t);
Eigen::Matrix4cd parameters_to_state(const std::vector<double>& t);  // M^dagger M / Tr

}  // namespace nolm::tomo
