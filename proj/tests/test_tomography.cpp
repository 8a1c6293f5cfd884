#include <doctest.h>

#include "nolm/count_io.hpp"
#include "nolm/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace nolm;
using namespace nolm::tomo;
using quantum::BellState;
using quantum::Complex;
using quantum::PolarizationKet;

namespace {

const double kS = 1.0 / std::sqrt(2.0);

DensityMatrix random_state(Rng& rng, int rank) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd g(4, rank);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = Complex(n(rng), n(rng));
  Eigen::MatrixXcd m = g * g.adjoint();
  return DensityMatrix(m / m.trace().real());
}

double phase_free_distance(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  return 1.0 - std::abs(a.dot(b));
}

const DensityMatrix kPhiPlus = DensityMatrix::pure(quantum::bell_state(BellState::PhiPlus));

}  // namespace

TEST_CASE("waveplate matrices") {
  const Eigen::Matrix2cd h0 = jones_hwp(0.0).matrix();
  CHECK(std::abs(h0(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(h0(1, 1) + 1.0) < 1e-15);
  CHECK(std::abs(h0(0, 1)) < 1e-15);
  const Eigen::Vector2cd h(1.0, 0.0);
  CHECK(phase_free_distance(jones_hwp(22.5).matrix() * h, Eigen::Vector2cd(kS, kS)) < 1e-12);
  CHECK(phase_free_distance(jones_qwp(45.0).matrix() * h, Eigen::Vector2cd(kS, Complex(0, kS))) < 1e-12);
}

TEST_CASE("standard settings project onto the six cardinal states") {
  const auto settings = standard_settings();
  CHECK(settings.size() == 36);
  const std::vector<std::pair<AnalyzerState, PolarizationKet>> expected{
      {AnalyzerState::H, PolarizationKet::horizontal()},
      {AnalyzerState::V, PolarizationKet::vertical()},
      {AnalyzerState::D, PolarizationKet::diagonal()},
      {AnalyzerState::A, PolarizationKet::antidiagonal()},
      {AnalyzerState::R, PolarizationKet::right()},
      {AnalyzerState::L, PolarizationKet::left()}};
  for (const auto& [state, ket] : expected) {
    const auto a = analyzer_angles(state);
    const Eigen::Matrix2cd p = arm_projector(a.qwp_deg, a.hwp_deg);
    const Eigen::Matrix2cd target = ket.amplitudes() * ket.amplitudes().adjoint();
    CHECK((p - target).norm() < 1e-12);
  }
  auto proj = [](AnalyzerState s) {
    const auto a = analyzer_angles(s);
    return arm_projector(a.qwp_deg, a.hwp_deg);
  };
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  CHECK((proj(AnalyzerState::H) + proj(AnalyzerState::V) - id).norm() < 1e-12);
  CHECK((proj(AnalyzerState::D) + proj(AnalyzerState::A) - id).norm() < 1e-12);
  CHECK((proj(AnalyzerState::R) + proj(AnalyzerState::L) - id).norm() < 1e-12);
  CHECK((proj(AnalyzerState::D) * proj(AnalyzerState::R)).trace().real() == doctest::Approx(0.5));
  CHECK(standard_setting_label(1) == "HV");
  CHECK(standard_setting_label(35) == "LL");
}

TEST_CASE("expected coincidences") {
  const auto settings = standard_settings();
  NoiseParams noise;
  noise.efficiency_signal = 0.2;
  noise.efficiency_idler = 0.15;
  const std::int64_t n = 100000000;
  const double p = 0.001;
  CHECK(expected_counts(kPhiPlus, settings[1], n, p, noise).coincidences == doctest::Approx(0.0));
  CHECK(expected_counts(kPhiPlus, settings[14], n, p, noise).coincidences ==
        doctest::Approx(n * p * 0.2 * 0.15 * 0.5));
  Rng rng(8);
  const auto rho = random_state(rng, 3);
  double sum = 0.0;
  for (int i : {0, 1, 6, 7}) sum += expected_counts(rho, settings[i], n, p, noise).coincidences;
  CHECK(sum == doctest::Approx(n * p * 0.2 * 0.15));
}

TEST_CASE("accidental subtraction") {
  CountRecord r;
  r.n_pulses = 100000000;
  r.singles_signal = 10000;
  r.singles_idler = 10000;
  r.coincidences_raw = 5;
  const auto c = subtract_accidentals(r);
  CHECK(c.accidentals_est == doctest::Approx(1.0));
  CHECK(c.coincidences_corrected == doctest::Approx(4.0));
  r.singles_signal = 0;
  CHECK(subtract_accidentals(r).accidentals_est == 0.0);
  r.n_pulses = 0;
  CHECK_THROWS(subtract_accidentals(r));
}

TEST_CASE("accidental estimate is unbiased for an uncorrelated source with heavy background") {
  const auto settings = standard_settings();
  const auto rho = DensityMatrix::maximally_mixed(4);
  NoiseParams noise;
  noise.background_prob_per_gate = 0.01;
  noise.dark_prob_per_gate = 0.001;
  noise.efficiency_signal = 0.5;
  noise.efficiency_idler = 0.5;
  const std::int64_t n = 10000000;
  const double p = 0.001;
  const double truth = n * p * 0.25 * 0.25;
  std::vector<double> corrected;
  for (int run = 0; run < 100; ++run) {
    Rng rng = derive_rng(100, static_cast<std::uint64_t>(run));
    const auto recs = simulate_counts(rho, {settings[0]}, n, p, noise, rng);
    corrected.push_back(recs[0].coincidences_corrected);
  }
  double mean = 0.0;
  for (double v : corrected) mean += v;
  mean /= static_cast<double>(corrected.size());
  double var = 0.0;
  for (double v : corrected) var += (v - mean) * (v - mean);
  var /= static_cast<double>(corrected.size() - 1);
  CHECK(std::abs(mean - truth) < 3.0 * std::sqrt(var / static_cast<double>(corrected.size())));
}

TEST_CASE("simulation is deterministic given the seed") {
  const auto settings = standard_settings();
  NoiseParams noise;
  noise.dark_prob_per_gate = 1e-4;
  Rng a(5), b(5);
  const auto ra = simulate_counts(kPhiPlus, settings, 1000000, 0.01, noise, a);
  const auto rb = simulate_counts(kPhiPlus, settings, 1000000, 0.01, noise, b);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].coincidences_raw == rb[i].coincidences_raw);
    CHECK(ra[i].singles_idler == rb[i].singles_idler);
  }
}

TEST_CASE("parameterization always yields a valid state") {
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> t(kParameterCount);
    for (auto& v : t) v = n(rng);
    CHECK_NOTHROW(DensityMatrix(parameters_to_state(t)));
  }
}

TEST_CASE("MLE round trip on noiseless counts") {
  const auto settings = standard_settings();
  const auto recs = analytic_counts(kPhiPlus, settings, 100000000, 0.001);
  const auto r = mle_reconstruct(recs, settings);
  CHECK(quantum::trace_distance(r.rho, kPhiPlus) < 1e-3);
  double total = 0.0;
  for (const auto& c : recs) total += c.coincidences_corrected;
  CHECK(r.objective_value < 1e-12 * total);
  CHECK(r.normalization == doctest::Approx(1e5).epsilon(1e-3));
  CHECK(mle_objective(kPhiPlus, 1e5, recs, settings) < 1e-12 * total);

  Rng rng(12);
  for (int k = 0; k < 10; ++k) {
    const auto rho = random_state(rng, 1 + k % 4);
    const auto rr = mle_reconstruct(analytic_counts(rho, settings, 100000000, 0.001), settings);
    CHECK(quantum::trace_distance(rr.rho, rho) < 1e-3);
  }
}

TEST_CASE("equal counts reconstruct the maximally mixed state") {
  const auto settings = standard_settings();
  std::vector<CountRecord> recs(36);
  for (int i = 0; i < 36; ++i) {
    recs[static_cast<std::size_t>(i)].setting_id = i;
    recs[static_cast<std::size_t>(i)].n_pulses = 1000;
    recs[static_cast<std::size_t>(i)].coincidences_corrected = 2500.0;
  }
  const auto r = mle_reconstruct(recs, settings);
  CHECK(quantum::trace_distance(r.rho, DensityMatrix::maximally_mixed(4)) < 1e-3);
}

TEST_CASE("reconstruction is invariant to record order") {
  const auto settings = standard_settings();
  NoiseParams noise;
  noise.dark_prob_per_gate = 1e-5;
  Rng rng(77);
  const auto rho = random_state(rng, 2);
  auto recs = simulate_counts(rho, settings, 10000000, 0.001, noise, rng);
  const auto a = mle_reconstruct(recs, settings);
  std::reverse(recs.begin(), recs.end());
  std::rotate(recs.begin(), recs.begin() + 7, recs.end());
  const auto b = mle_reconstruct(recs, settings);
  CHECK(quantum::trace_distance(a.rho, b.rho) < 1e-6);
  for (double v : {a.metrics.fidelity_max, a.metrics.tangle, a.metrics.linear_entropy}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("objective gradient matches finite differences") {
  const auto settings = standard_settings();
  Rng rng(4);
  const auto rho = random_state(rng, 4);
  auto recs = simulate_counts(rho, settings, 1000000, 0.01, NoiseParams{}, rng);
  recs[3].coincidences_corrected = -1.5;
  std::normal_distribution<double> n(0.0, 0.5);
  for (double scale : {1e4, 1.0}) {  // 1.0 drives predictions below the 0.5-count floor
    std::vector<double> t(kParameterCount);
    for (auto& v : t) v = n(rng);
    std::vector<double> grad;
    factor_objective(t, scale, recs, settings, &grad);
    for (std::size_t k = 0; k < kParameterCount; ++k) {
      const double h = 1e-6;
      auto up = t, dn = t;
      up[k] += h;
      dn[k] -= h;
      const double fd = (factor_objective(up, scale, recs, settings, nullptr) -
                         factor_objective(dn, scale, recs, settings, nullptr)) /
                        (2 * h);
      CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("iteration cap produces an explicit convergence error") {
  const auto settings = standard_settings();
  Rng rng(1);
  const auto rho = random_state(rng, 4);
  auto recs = simulate_counts(rho, settings, 1000000, 0.01, NoiseParams{}, rng);
  MleOptions o;
  o.optimizer.max_iterations = 1;
  CHECK_THROWS_AS(mle_reconstruct(recs, settings, o), ConvergenceError);
}

TEST_CASE("under-determined settings are rejected") {
  const auto all = standard_settings();
  const std::vector<AnalyzerSetting> hv{all[0], all[1], all[6], all[7]};
  const auto recs = analytic_counts(kPhiPlus, hv, 1000000, 0.01);
  CHECK_THROWS_AS(mle_reconstruct(recs, hv), std::invalid_argument);
}

TEST_CASE("bootstrap uncertainties") {
  const auto settings = standard_settings();
  const auto recs = analytic_counts(kPhiPlus, settings, 100000000, 0.001);
  UncertaintyOptions off;
  off.resample = false;
  const auto z = uncertainties_mc(recs, settings, off);
  CHECK(z.sigma.fidelity_max == 0.0);
  CHECK(z.sigma.tangle == 0.0);
  CHECK_THROWS(uncertainties_mc(recs, settings, UncertaintyOptions{1}));
}

TEST_CASE("bootstrap spread scales as one over root counts") {
  const auto settings = standard_settings();
  const auto rho = quantum::depolarize(kPhiPlus, 0.08);
  NoiseParams noise;
  UncertaintyOptions o;
  o.n_resamples = 150;
  std::vector<double> ratio;
  for (std::uint64_t seed : {1u, 2u}) {
    Rng a = derive_rng(seed, 0);
    Rng b = derive_rng(seed, 1);
    const auto small = simulate_counts(rho, settings, 2000000, 0.001, noise, a);
    const auto large = simulate_counts(rho, settings, 4000000, 0.001, noise, b);
    o.seed = seed * 1000;
    const double s1 = uncertainties_mc(small, settings, o).sigma.fidelity_max;
    const double s2 = uncertainties_mc(large, settings, o).sigma.fidelity_max;
    ratio.push_back(s1 / s2);
  }
  const double mean = 0.5 * (ratio[0] + ratio[1]);
  CHECK(mean == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("count CSV round trip and validation") {
  const auto settings = standard_settings();
  NoiseParams noise;
  noise.dark_prob_per_gate = 1e-4;
  Rng rng(2);
  const auto recs = simulate_counts(kPhiPlus, settings, 1000000, 0.01, noise, rng);
  const std::string text = format_counts_csv(recs, settings);
  std::istringstream in(text);
  const auto table = parse_counts_csv(in);
  REQUIRE(table.records.size() == 36);
  for (std::size_t i = 0; i < 36; ++i) {
    CHECK(table.records[i].coincidences_raw == recs[i].coincidences_raw);
    CHECK(table.records[i].coincidences_corrected ==
          doctest::Approx(recs[i].coincidences_corrected).epsilon(1e-11));
    CHECK(table.settings[i].hwp_signal_deg == settings[i].hwp_signal_deg);
  }
  const auto a = mle_reconstruct(recs, settings);
  const auto b = mle_reconstruct(table.records, table.settings);
  CHECK(quantum::trace_distance(a.rho, b.rho) < 1e-6);

  std::istringstream bad_header("id,foo\n1,2\n");
  CHECK_THROWS_AS(parse_counts_csv(bad_header), std::runtime_error);
  std::istringstream bad_row(std::string(kCountCsvHeader) + "\n0,0,0,0,0,10,x,1,1,0,0\n");
  CHECK_THROWS_AS(parse_counts_csv(bad_row), std::runtime_error);
  std::istringstream dup(std::string(kCountCsvHeader) + "\n0,0,0,0,0,10,1,1,1,0,1\n0,0,0,0,0,10,1,1,1,0,1\n");
  CHECK_THROWS_AS(parse_counts_csv(dup), std::runtime_error);
}
