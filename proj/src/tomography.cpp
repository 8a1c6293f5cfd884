#include "nolm/tomography.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>

namespace nolm::tomo {
namespace {

using quantum::Complex;

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kPredictionFloor = 0.5;

Eigen::Matrix2cd rotation(double theta_deg) {
  const double c = std::cos(theta_deg * kDeg);
  const double s = std::sin(theta_deg * kDeg);
  Eigen::Matrix2cd r;
  r << c, -s, s, c;
  return r;
}

Eigen::Matrix2cd retarder(double theta_deg, Complex slow_phase) {
  Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
  d(0, 0) = 1.0;
  d(1, 1) = slow_phase;
  return rotation(theta_deg) * d * rotation(-theta_deg);
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(what);
}

void require_probability(double v, const char* what) {
  if (!(v >= 0.0 && v < 1.0)) throw std::invalid_argument(what);
}

struct PreparedRecord {
  Eigen::Matrix4cd projector;
  double ratio = 1.0;  // n_pulses relative to the first record
  double counts = 0.0;
};

std::vector<PreparedRecord> prepare(const std::vector<CountRecord>& records,
                                    const std::vector<AnalyzerSetting>& settings) {
  if (records.empty()) throw std::invalid_argument("mle_reconstruct: no records");
  const double n_ref = static_cast<double>(records.front().n_pulses);
  std::vector<PreparedRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (r.setting_id < 0 || static_cast<std::size_t>(r.setting_id) >= settings.size()) {
      throw std::invalid_argument("mle_reconstruct: record references an unknown setting");
    }
    if (r.n_pulses <= 0) throw std::invalid_argument("mle_reconstruct: n_pulses must be positive");
    require_finite(r.coincidences_corrected, "mle_reconstruct: non-finite corrected count");
    out.push_back({setting_projector(settings[static_cast<std::size_t>(r.setting_id)]),
                   static_cast<double>(r.n_pulses) / n_ref, r.coincidences_corrected});
  }
  return out;
}

// Pauli-product basis for Hermitian 4x4 matrices.
std::array<Eigen::Matrix4cd, 16> pauli_basis() {
  std::array<Eigen::Matrix2cd, 4> s;
  s[0] = Eigen::Matrix2cd::Identity();
  s[1] << 0, 1, 1, 0;
  s[2] << 0, Complex(0, -1), Complex(0, 1), 0;
  s[3] << 1, 0, 0, -1;
  std::array<Eigen::Matrix4cd, 16> out;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      out[static_cast<std::size_t>(4 * a + b)] = Eigen::kroneckerProduct(s[a], s[b]) * 0.5;
    }
  }
  return out;
}

// Unconstrained least-squares estimate of N rho. Throws if the projectors do not span
// the Hermitian matrices.
Eigen::Matrix4cd linear_inversion(const std::vector<PreparedRecord>& data) {
  const auto basis = pauli_basis();
  Eigen::MatrixXd design(data.size(), 16);
  Eigen::VectorXd rhs(data.size());
  for (std::size_t v = 0; v < data.size(); ++v) {
    for (std::size_t k = 0; k < 16; ++k) {
      design(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(k)) =
          data[v].ratio * (basis[k] * data[v].projector).trace().real();
    }
    rhs(static_cast<Eigen::Index>(v)) = data[v].counts;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 16) {
    throw std::invalid_argument("mle_reconstruct: settings do not span 16 independent projectors");
  }
  const Eigen::VectorXd x = qr.solve(rhs);
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (std::size_t k = 0; k < 16; ++k) m += x(static_cast<Eigen::Index>(k)) * basis[k];
  return m;
}

constexpr std::array<std::pair<int, int>, 6> kLowerEntries = {
    {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}}};

std::vector<double> factor_to_parameters(const Eigen::Matrix4cd& m) {
  std::vector<double> t(kParameterCount);
  for (int i = 0; i < 4; ++i) t[static_cast<std::size_t>(i)] = m(i, i).real();
  for (std::size_t k = 0; k < kLowerEntries.size(); ++k) {
    const auto [i, j] = kLowerEntries[k];
    t[4 + 2 * k] = m(i, j).real();
    t[5 + 2 * k] = m(i, j).imag();
  }
  return t;
}

// Lower-triangular M with M^dagger M = b (b positive definite).
Eigen::Matrix4cd factor_of(const Eigen::Matrix4cd& b) {
  const Eigen::Matrix4cd j = Eigen::Matrix4cd::Identity().rowwise().reverse();
  Eigen::LLT<Eigen::Matrix4cd> llt(j * b * j);
  if (llt.info() != Eigen::Success) throw std::runtime_error("mle_reconstruct: factorization failed");
  const Eigen::Matrix4cd l = llt.matrixL();
  return (j * l * j).adjoint();
}

Eigen::Matrix4cd clipped(const Eigen::Matrix4cd& x, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (x + x.adjoint()));
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

class Objective {
 public:
  Objective(const std::vector<PreparedRecord>& data, double scale) : data_(data), scale_(scale) {}

  double operator()(std::span<const double> t, std::span<double> grad) const {
    const Eigen::Matrix4cd m = parameters_to_factor(std::vector<double>(t.begin(), t.end()));
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
    double f = 0.0;
    for (const auto& d : data_) {
      const Eigen::Matrix4cd mp = m * d.projector;
      const double k = scale_ * d.ratio;
      const double pred = k * (mp.cwiseProduct(m.conjugate())).sum().real();
      const double diff = pred - d.counts;
      double dfdp;
      if (pred > kPredictionFloor) {
        f += diff * diff / (2.0 * pred);
        dfdp = (pred * pred - d.counts * d.counts) / (2.0 * pred * pred);
      } else {
        f += diff * diff / (2.0 * kPredictionFloor);
        dfdp = diff / kPredictionFloor;
      }
      g += (2.0 * k * dfdp) * mp;
    }
    if (!grad.empty()) {
      for (int i = 0; i < 4; ++i) grad[static_cast<std::size_t>(i)] = g(i, i).real();
      for (std::size_t k = 0; k < kLowerEntries.size(); ++k) {
        const auto [i, j] = kLowerEntries[k];
        grad[4 + 2 * k] = g(i, j).real();
        grad[5 + 2 * k] = g(i, j).imag();
      }
    }
    return f;
  }

 private:
  const std::vector<PreparedRecord>& data_;
  double scale_;
};

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

JonesOperator jones_qwp(double theta_deg) {
  require_finite(theta_deg, "jones_qwp: angle must be finite");
  return JonesOperator(retarder(theta_deg, Complex(0.0, -1.0)));
}

JonesOperator jones_hwp(double theta_deg) {
  require_finite(theta_deg, "jones_hwp: angle must be finite");
  return JonesOperator(retarder(theta_deg, -1.0));
}

void AnalyzerSetting::validate() const {
  for (double a : {qwp_signal_deg, hwp_signal_deg, qwp_idler_deg, hwp_idler_deg}) {
    require_finite(a, "AnalyzerSetting: angles must be finite");
  }
}

const char* to_string(AnalyzerState s) {
  switch (s) {
    case AnalyzerState::H: return "H";
    case AnalyzerState::V: return "V";
    case AnalyzerState::D: return "D";
    case AnalyzerState::A: return "A";
    case AnalyzerState::R: return "R";
    case AnalyzerState::L: return "L";
  }
  return "?";
}

WaveplateAngles analyzer_angles(AnalyzerState s) {
  switch (s) {
    case AnalyzerState::H: return {0.0, 0.0};
    case AnalyzerState::V: return {0.0, 45.0};
    case AnalyzerState::D: return {45.0, 22.5};
    case AnalyzerState::A: return {45.0, -22.5};
    case AnalyzerState::R: return {45.0, 0.0};
    case AnalyzerState::L: return {-45.0, 0.0};
  }
  throw std::invalid_argument("analyzer_angles: unknown state");
}

Eigen::Matrix2cd arm_projector(double qwp_deg, double hwp_deg) {
  const Eigen::Matrix2cd q = jones_qwp(qwp_deg).matrix();
  const Eigen::Matrix2cd h = jones_hwp(hwp_deg).matrix();
  const Eigen::Vector2cd m = q.adjoint() * h.adjoint() * Eigen::Vector2cd(1.0, 0.0);
  return m * m.adjoint();
}

Eigen::Matrix4cd setting_projector(const AnalyzerSetting& s) {
  s.validate();
  return Eigen::kroneckerProduct(arm_projector(s.qwp_signal_deg, s.hwp_signal_deg),
                                 arm_projector(s.qwp_idler_deg, s.hwp_idler_deg));
}

std::vector<AnalyzerSetting> standard_settings() {
  std::vector<AnalyzerSetting> out;
  out.reserve(36);
  for (auto a : kAnalyzerStates) {
    for (auto b : kAnalyzerStates) {
      const auto sa = analyzer_angles(a);
      const auto sb = analyzer_angles(b);
      out.push_back({sa.qwp_deg, sa.hwp_deg, sb.qwp_deg, sb.hwp_deg});
    }
  }
  return out;
}

std::string standard_setting_label(std::size_t index) {
  if (index >= 36) throw std::out_of_range("standard_setting_label: index out of range");
  return std::string(to_string(kAnalyzerStates[index / 6])) + to_string(kAnalyzerStates[index % 6]);
}

void NoiseParams::validate() const {
  require_probability(dark_prob_per_gate, "noise.dark_prob_per_gate must lie in [0, 1)");
  require_probability(background_prob_per_gate, "noise.background_prob_per_gate must lie in [0, 1)");
  require_probability(switch_background_prob, "noise.switch_background_prob must lie in [0, 1)");
  if (!(efficiency_signal > 0.0 && efficiency_signal <= 1.0)) {
    throw std::invalid_argument("noise.efficiency_signal must lie in (0, 1]");
  }
  if (!(efficiency_idler > 0.0 && efficiency_idler <= 1.0)) {
    throw std::invalid_argument("noise.efficiency_idler must lie in (0, 1]");
  }
}

ExpectedCounts expected_counts(const DensityMatrix& rho, const AnalyzerSetting& setting,
                               std::int64_t n_pulses, double pair_prob, const NoiseParams& noise) {
  noise.validate();
  if (rho.dim() != 4) throw std::invalid_argument("expected_counts: two-qubit state required");
  if (n_pulses < 0) throw std::invalid_argument("expected_counts: negative pulse count");
  if (!(pair_prob >= 0.0 && pair_prob < 1.0)) {
    throw std::invalid_argument("expected_counts: pair_prob must lie in [0, 1)");
  }
  const Eigen::Matrix2cd ps = arm_projector(setting.qwp_signal_deg, setting.hwp_signal_deg);
  const Eigen::Matrix2cd pi = arm_projector(setting.qwp_idler_deg, setting.hwp_idler_deg);
  const Eigen::Matrix4cd& m = rho.matrix();
  const double joint = (m * Eigen::kroneckerProduct(ps, pi)).trace().real();
  const double marg_s =
      (m * Eigen::kroneckerProduct(ps, Eigen::Matrix2cd::Identity())).trace().real();
  const double marg_i =
      (m * Eigen::kroneckerProduct(Eigen::Matrix2cd::Identity(), pi)).trace().real();

  const double n = static_cast<double>(n_pulses);
  const double q_s = pair_prob * noise.efficiency_signal * marg_s;
  const double q_i = pair_prob * noise.efficiency_idler * marg_i;
  const double d_s = noise.dark_prob_per_gate + noise.background_prob_per_gate;
  const double d_i =
      noise.dark_prob_per_gate + noise.background_prob_per_gate + noise.switch_background_prob;

  ExpectedCounts e;
  e.accidentals = n * (d_s * d_i + d_s * q_i + q_s * d_i);
  e.coincidences =
      n * pair_prob * noise.efficiency_signal * noise.efficiency_idler * std::max(joint, 0.0) +
      e.accidentals;
  e.singles_signal = n * (q_s + d_s);
  e.singles_idler = n * (q_i + d_i);
  return e;
}

std::vector<CountRecord> simulate_counts(const DensityMatrix& rho,
                                         const std::vector<AnalyzerSetting>& settings,
                                         std::int64_t n_pulses, double pair_prob,
                                         const NoiseParams& noise, Rng& rng) {
  std::vector<CountRecord> out;
  out.reserve(settings.size());
  for (std::size_t v = 0; v < settings.size(); ++v) {
    const auto e = expected_counts(rho, settings[v], n_pulses, pair_prob, noise);
    CountRecord r;
    r.setting_id = static_cast<int>(v);
    r.n_pulses = n_pulses;
    r.coincidences_raw = sample_poisson(e.coincidences, rng);
    r.singles_signal = std::max(sample_poisson(e.singles_signal, rng), r.coincidences_raw);
    r.singles_idler = std::max(sample_poisson(e.singles_idler, rng), r.coincidences_raw);
    out.push_back(subtract_accidentals(r));
  }
  return out;
}

std::vector<CountRecord> analytic_counts(const DensityMatrix& rho,
                                         const std::vector<AnalyzerSetting>& settings,
                                         std::int64_t n_pulses, double pair_prob) {
  std::vector<CountRecord> out;
  out.reserve(settings.size());
  for (std::size_t v = 0; v < settings.size(); ++v) {
    const auto e = expected_counts(rho, settings[v], n_pulses, pair_prob, NoiseParams{});
    CountRecord r;
    r.setting_id = static_cast<int>(v);
    r.n_pulses = n_pulses;
    r.coincidences_raw = std::llround(e.coincidences);
    r.singles_signal = std::llround(e.singles_signal);
    r.singles_idler = std::llround(e.singles_idler);
    r.accidentals_est = 0.0;
    r.coincidences_corrected = e.coincidences;
    out.push_back(r);
  }
  return out;
}

CountRecord subtract_accidentals(CountRecord record) {
  if (record.n_pulses <= 0) throw std::invalid_argument("subtract_accidentals: n_pulses must be positive");
  record.accidentals_est = static_cast<double>(record.singles_signal) *
                           static_cast<double>(record.singles_idler) /
                           static_cast<double>(record.n_pulses);
  record.coincidences_corrected =
      static_cast<double>(record.coincidences_raw) - record.accidentals_est;
  return record;
}

Eigen::Matrix4cd parameters_to_factor(const std::vector<double>& t) {
  if (t.size() != kParameterCount) throw std::invalid_argument("parameters_to_factor: need 16 values");
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) m(i, i) = t[static_cast<std::size_t>(i)];
  for (std::size_t k = 0; k < kLowerEntries.size(); ++k) {
    const auto [i, j] = kLowerEntries[k];
    m(i, j) = Complex(t[4 + 2 * k], t[5 + 2 * k]);
  }
  return m;
}

Eigen::Matrix4cd parameters_to_state(const std::vector<double>& t) {
  const Eigen::Matrix4cd m = parameters_to_factor(t);
  const Eigen::Matrix4cd a = m.adjoint() * m;
  const double tr = a.trace().real();
  if (!(tr > 0.0)) throw std::domain_error("parameters_to_state: zero factor");
  return a / tr;
}

double mle_objective(const DensityMatrix& rho, double normalization,
                     const std::vector<CountRecord>& records,
                     const std::vector<AnalyzerSetting>& settings) {
  const auto data = prepare(records, settings);
  double f = 0.0;
  for (const auto& d : data) {
    const double pred = normalization * d.ratio * (rho.matrix() * d.projector).trace().real();
    const double diff = pred - d.counts;
    f += diff * diff / (2.0 * std::max(pred, kPredictionFloor));
  }
  return f;
}

double factor_objective(const std::vector<double>& t, double scale,
                        const std::vector<CountRecord>& records,
                        const std::vector<AnalyzerSetting>& settings, std::vector<double>* grad) {
  if (t.size() != kParameterCount) throw std::invalid_argument("factor_objective: need 16 values");
  const auto data = prepare(records, settings);
  const Objective objective(data, scale);
  std::vector<double> g(kParameterCount);
  const double f = objective(t, g);
  if (grad) *grad = g;
  return f;
}

ReconstructionResult mle_reconstruct(const std::vector<CountRecord>& records,
                                     const std::vector<AnalyzerSetting>& settings,
                                     const MleOptions& options) {
  const auto data = prepare(records, settings);

  // Parameters are O(1): the factor is scaled so that Tr(M^dagger M) ~ 1 at the optimum.
  double weight = 0.0;
  double total = 0.0;
  for (const auto& d : data) {
    weight += d.ratio * d.projector.trace().real() / 4.0;
    total += std::max(d.counts, 0.0);
  }
  const double scale = std::max(total / weight, 1.0);
  const Objective objective(data, scale);

  std::vector<std::vector<double>> starts;
  starts.push_back(factor_to_parameters(Eigen::Matrix4cd::Identity() * 0.5));
  {
    Eigen::Matrix4cd x = linear_inversion(data) / scale;
    const double tr = std::max(x.trace().real(), 1e-6);
    starts.push_back(factor_to_parameters(factor_of(clipped(x, 1e-3 * tr))));
  }
  Rng rng(options.seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  for (std::size_t k = 0; k < options.random_starts; ++k) {
    std::vector<double> t(kParameterCount);
    for (auto& v : t) v = normal(rng);
    starts.push_back(std::move(t));
  }

  const opt::ObjectiveWithGradient fn = [&objective](std::span<const double> t,
                                                     std::span<double> g) {
    return objective(t, g);
  };
  std::optional<opt::Result> best;
  std::size_t capped = 0;
  for (auto& s : starts) {
    auto r = opt::minimize_bfgs(fn, s, options.optimizer);
    if (!r.converged) {
      ++capped;
      continue;
    }
    if (!best || r.value < best->value) best = std::move(r);
  }
  if (!best) {
    throw ConvergenceError("mle_reconstruct: optimizer hit the iteration cap from every start (" +
                           std::to_string(capped) + " starts)");
  }

  const Eigen::Matrix4cd m = parameters_to_factor(best->x);
  const Eigen::Matrix4cd a = m.adjoint() * m;
  const double tr = a.trace().real();
  if (!(tr > 0.0)) throw ConvergenceError("mle_reconstruct: optimum collapsed to zero");
  Eigen::Matrix4cd rho = a / tr;
  rho = 0.5 * (rho + rho.adjoint());

  ReconstructionResult result;
  result.rho = DensityMatrix(rho);
  result.objective_value = best->value;
  result.normalization = scale * tr;
  result.metrics = quantum::entanglement_metrics(result.rho);
  return result;
}

MetricUncertainty uncertainties_mc(const std::vector<CountRecord>& records,
                                   const std::vector<AnalyzerSetting>& settings,
                                   const UncertaintyOptions& options) {
  if (options.n_resamples < 2) throw std::invalid_argument("uncertainties_mc: need at least 2 resamples");
  MetricUncertainty out;
  if (!options.resample) {
    out.n_used = options.n_resamples;
    return out;
  }
  std::vector<double> f, t, s;
  for (int i = 0; i < options.n_resamples; ++i) {
    Rng rng = derive_rng(options.seed, static_cast<std::uint64_t>(i));
    std::vector<CountRecord> resampled = records;
    for (auto& r : resampled) {
      r.coincidences_raw = sample_poisson(static_cast<double>(r.coincidences_raw), rng);
      r.singles_signal = sample_poisson(static_cast<double>(r.singles_signal), rng);
      r.singles_idler = sample_poisson(static_cast<double>(r.singles_idler), rng);
      r = subtract_accidentals(r);
    }
    try {
      const auto res = mle_reconstruct(resampled, settings, options.mle);
      f.push_back(res.metrics.fidelity_max);
      t.push_back(res.metrics.tangle);
      s.push_back(res.metrics.linear_entropy);
    } catch (const ConvergenceError&) {
      ++out.n_excluded;
    }
  }
  out.n_used = static_cast<int>(f.size());
  if (out.n_excluded * 10 > options.n_resamples) {
    throw ConvergenceError("uncertainties_mc: " + std::to_string(out.n_excluded) + " of " +
                           std::to_string(options.n_resamples) + " resamples failed to converge");
  }
  out.sigma = {sample_std(f), sample_std(t), sample_std(s)};
  return out;
}

ReconstructionResult reconstruct_with_uncertainties(const std::vector<CountRecord>& records,
                                                    const std::vector<AnalyzerSetting>& settings,
                                                    const UncertaintyOptions& options) {
  auto result = mle_reconstruct(records, settings, options.mle);
  if (options.n_resamples == 0) return result;
  const auto u = uncertainties_mc(records, settings, options);
  result.metric_uncertainties = u.sigma;
  result.n_resamples = u.n_used;
  result.n_excluded = u.n_excluded;
  return result;
}

}  // namespace nolm::tomo
