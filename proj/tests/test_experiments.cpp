#include <doctest.h>

#include "nolm/config.hpp"
#include "nolm/count_io.hpp"
#include "nolm/output.hpp"
#include "nolm/reference_values.hpp"
#include "nolm/scenarios.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <stdexcept>

#include <unistd.h>

using namespace nolm;
using namespace nolm::experiments;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("nolm-test-" + tag + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string error_of(const json& doc, std::optional<Scenario> expected) {
  try {
    parse_config(doc, expected);
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

const Check& check_named(const RunSummary& s, const std::string& name) {
  for (const auto& c : s.checks)
    if (c.name == name) return c;
  throw std::out_of_range(name);
}

}  // namespace

TEST_CASE("scenario names round trip") {
  for (Scenario s : kAllScenarios) {
    CHECK(parse_scenario(to_string(s)) == s);
  }
  CHECK(parse_scenario("SWITCH_TOMO") == Scenario::SwitchTomo);
  CHECK_THROWS_AS(parse_scenario("bogus"), std::invalid_argument);
}

TEST_CASE("default configs survive a json round trip") {
  for (Scenario s : kAllScenarios) {
    const auto c = default_config(s);
    CHECK_NOTHROW(c.validate());
    const json doc = to_json(c);
    CHECK(to_json(parse_config(doc, s)) == doc);
    CHECK(to_json(parse_config(doc, std::nullopt)) == doc);
  }
}

TEST_CASE("config parsing is strict") {
  CHECK(error_of({{"scenario", "contrast"}, {"switch", {{"lenght_m", 100}}}}, std::nullopt)
            .find("config.switch.lenght_m") != std::string::npos);
  CHECK(error_of({{"scenario", "contrast"}, {"colour", 1}}, std::nullopt).find("config.colour") !=
        std::string::npos);
  // Sweep keys belong to the active scenario only.
  CHECK(error_of({{"scenario", "contrast"}, {"sweep", {{"window_delay_ps", 225}}}}, std::nullopt)
            .find("window_delay_ps") != std::string::npos);
  CHECK(error_of({{"scenario", "eye"}}, Scenario::Contrast).find("eye") != std::string::npos);
  CHECK(error_of(json::object(), std::nullopt).find("scenario") != std::string::npos);
  CHECK(error_of({{"scenario", "contrast"}, {"switch", {{"extinction", 0.7}}}}, std::nullopt)
            .find("extinction") != std::string::npos);
  CHECK(error_of({{"scenario", "contrast"}, {"seed", -3}}, std::nullopt).find("seed") !=
        std::string::npos);
  CHECK(error_of({{"scenario", "contrast"}, {"seed", "7"}}, std::nullopt).find("seed") !=
        std::string::npos);

  const auto c = parse_config({{"scenario", "tdm-demux"}, {"seed", 9}, {"sweep", {{"window_delay_ps", 200}}}},
                              std::nullopt);
  CHECK(c.seed == 9);
  CHECK(c.tdm.window_delay_ps == 200.0);
  CHECK(c.source.pair_tangle == 0.99);
}

TEST_CASE("ideal mode removes noise and source imperfection") {
  auto c = default_config(Scenario::TdmDemux);
  c.ideal = true;
  const auto n = c.effective_noise();
  CHECK(n.dark_prob_per_gate == 0.0);
  CHECK(n.background_prob_per_gate == 0.0);
  CHECK(n.switch_background_prob == 0.0);
  CHECK(c.effective_source().pair_tangle == 1.0);
  CHECK(c.effective_source().pair_white_noise == 0.0);
}

TEST_CASE("reference table is well formed") {
  std::set<std::string> ids;
  for (const auto& r : reference_table()) {
    CHECK(ids.insert(r.id).second);
    CHECK(r.lower <= r.reference);
    CHECK(r.reference <= r.upper);
    CHECK((r.kind == "measured" || r.kind == "derived" || r.kind == "calibrated"));
  }
  CHECK_THROWS_AS(reference("no.such.value"), std::out_of_range);
}

TEST_CASE("contrast scenario on a reduced sweep") {
  TempDir dir("contrast");
  auto c = default_config(Scenario::Contrast);
  c.contrast.lengths_m = {500.0};
  c.contrast.energy_step_nj = 0.25;
  const auto s = run_scenario(c, dir.path);
  CHECK(check_named(s, "classical_peak_contrast_L500").value == doctest::Approx(150.0).epsilon(1e-3));
  CHECK(check_named(s, "classical_peak_energy_L500").value == doctest::Approx(2.5));
  CHECK(check_named(s, "zero_energy_baseline_L500").pass);
  CHECK(fs::exists(dir.path / "contrast_classical_L500.csv"));
  CHECK(fs::exists(dir.path / "contrast_single_photon_L500.csv"));

  const json summary = json::parse(slurp(dir.path / "summary.json"));
  CHECK(summary["schema_version"] == kSummarySchemaVersion);
  CHECK(summary["reference_table_version"] == kReferenceTableVersion);
  CHECK(summary["verdict"] == "pass");
  CHECK_FALSE(summary.dump().find("wall_time") != std::string::npos);
  CHECK(slurp(dir.path / "timing.txt").rfind("wall_time_s ", 0) == 0);
}

TEST_CASE("single-photon contrast without background equals the squared-probe ratio") {
  TempDir dir("contrast-ideal");
  auto c = default_config(Scenario::Contrast);
  c.ideal = true;
  c.contrast.lengths_m = {500.0};
  c.contrast.energy_min_nj = 2.5;
  c.contrast.energy_max_nj = 2.5;
  const auto s = run_contrast(c, dir.path);
  // No background: the single-photon peak is limited by the extinction alone.
  CHECK(s.details["L500"]["single_photon_peak"].get<double>() > 145.0);
}

TEST_CASE("window scenario recovers the walkoff time") {
  TempDir dir("window");
  auto c = default_config(Scenario::Window);
  c.window.lengths_m = {100.0};
  const auto s = run_window(c, dir.path);
  CHECK(s.details["L100"]["tau_fit_ps"].get<double>() == doctest::Approx(170.0).epsilon(1e-3));
  CHECK(check_named(s, "intrinsic_fwhm_L100").pass);
  const auto lines = slurp(dir.path / "window_L100_exp1.csv");
  CHECK(lines.rfind("delay_ps,normalized_response,transmitted_fraction\n", 0) == 0);
}

TEST_CASE("background scenario slope and gated rate") {
  TempDir dir("background");
  auto c = default_config(Scenario::Background);
  const auto s = run_background(c, dir.path);
  CHECK(check_named(s, "raman_slope_per_m").pass);
  CHECK(check_named(s, "gated_rate_per_ps").pass);
}

TEST_CASE("separated colors add their phases") {
  TempDir dir("sep");
  auto c = default_config(Scenario::SepColors);
  c.sep_colors.color_imbalance = 0.2;
  c.sep_colors.edfa_settings_mw = {0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0};
  const auto s = run_sep_colors(c, dir.path);
  // Each color reaches pi/2 at its own half switching energy; the imbalanced pair
  // still sums to pi at the full energy because the leakage bias is antisymmetric.
  CHECK(s.details["phi_1545_at_half_epi"].get<double>() == doctest::Approx(std::numbers::pi / 2).epsilon(2e-3));
  CHECK(s.details["phi_1555_at_half_epi"].get<double>() == doctest::Approx(std::numbers::pi / 2).epsilon(2e-3));
  CHECK(s.details["summed_phi_at_epi"].get<double>() == doctest::Approx(std::numbers::pi).epsilon(1e-6));
  CHECK(check_named(s, "port_phase_disagreement").pass);
}

TEST_CASE("ideal switch tomography preserves the entangled state") {
  TempDir dir("switch-ideal");
  auto c = default_config(Scenario::SwitchTomo);
  c.ideal = true;
  c.switch_tomo.lengths_m = {100.0};
  c.switch_tomo.n_resamples = 5;
  const auto s = run_switch_tomography(c, dir.path);
  CHECK(check_named(s, "fidelity_L100_passive_R").value > 0.999);
  CHECK(check_named(s, "fidelity_L100_active_T").value > 0.999);
  const auto table = tomo::read_counts_csv((dir.path / "counts_L100_active_T.csv").string());
  CHECK(table.records.size() == 36);
  const json rho = json::parse(slurp(dir.path / "rho_L100_active_T.json"));
  CHECK(rho["real"].size() == 4);
  CHECK(rho["resamples_used"] == 5);
}

TEST_CASE("eye scenario finds a delay that passes one channel only") {
  TempDir dir("eye");
  auto c = default_config(Scenario::Eye);
  c.eye.delay_step_ps = 5.0;
  const auto s = run_eye(c, dir.path);
  CHECK(check_named(s, "optimal_delay_ps").pass);
  CHECK(check_named(s, "translate_error").value < 1e-6);
  CHECK(check_named(s, "channel_ratio_at_optimum").value > 50.0);
}

TEST_CASE("reruns are byte identical and seeds matter") {
  TempDir a("det-a"), b("det-b"), d("det-d");
  auto c = default_config(Scenario::Eye);
  c.eye.delay_step_ps = 10.0;
  run_scenario(c, a.path);
  run_scenario(c, b.path);
  for (const char* f : {"eye.csv", "summary.json"}) {
    CHECK(slurp(a.path / f) == slurp(b.path / f));
  }
  c.seed = 2;
  run_scenario(c, d.path);
  CHECK(slurp(a.path / "eye.csv") != slurp(d.path / "eye.csv"));
}

TEST_CASE("reconstruct a counts file") {
  TempDir dir("reconstruct");
  const auto settings = tomo::standard_settings();
  const auto rho = quantum::DensityMatrix::pure(quantum::bell_state(quantum::BellState::PhiPlus));
  fs::create_directories(dir.path);
  write_file_atomic(dir.path / "counts.csv",
                    tomo::format_counts_csv(tomo::analytic_counts(rho, settings, 100000000, 0.001), settings));
  const auto r = reconstruct_counts_file((dir.path / "counts.csv").string(), 0, 1, dir.path);
  CHECK(r.metrics.fidelity_max == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fs::exists(dir.path / "rho.json"));
}
