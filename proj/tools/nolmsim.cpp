#include "nolm/config.hpp"
#include "nolm/output.hpp"
#include "nolm/reference_values.hpp"
#include "nolm/scenarios.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace nolm;
using namespace nolm::experiments;

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool ideal = false;
  bool quiet = false;
};

std::string bound(double v) { return std::isfinite(v) ? format_number(v) : "inf"; }

void print_summary(const RunSummary& s) {
  for (const auto& c : s.checks) {
    std::printf("%s  %-36s %-14s [%s, %s]  (%s)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                format_number(c.value).c_str(), bound(c.lower).c_str(), bound(c.upper).c_str(),
                c.kind.c_str());
  }
  std::printf("%s: %s (%.1f s)\n", to_string(s.scenario), s.all_pass() ? "pass" : "fail",
              s.wall_time_s);
}

int run(Scenario scenario, const RunOptions& o) {
  ExperimentConfig c =
      o.config_path.empty() ? default_config(scenario) : load_config(o.config_path, scenario);
  if (o.seed) c.seed = *o.seed;
  if (!o.out_dir.empty()) c.output_dir = o.out_dir;
  if (o.ideal) c.ideal = true;
  const auto s = run_scenario(c, c.output_dir);
  if (!o.quiet) print_summary(s);
  return s.all_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear-optical loop mirror switch and entangled-photon simulator"};
  app.require_subcommand(1);
  int exit_code = 0;

  std::vector<RunOptions> options(std::size(kAllScenarios));
  for (std::size_t i = 0; i < std::size(kAllScenarios); ++i) {
    const Scenario sc = kAllScenarios[i];
    auto* sub = app.add_subcommand(to_string(sc), std::string("Run the ") + to_string(sc) + " scenario");
    auto& o = options[i];
    sub->add_option("-c,--config", o.config_path, "JSON config (defaults used when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("-s,--seed", o.seed, "Root seed (overrides the config)");
    sub->add_option("-o,--out", o.out_dir, "Output directory (overrides the config)");
    sub->add_flag("--ideal", o.ideal, "Zero detector noise and use perfect pair states");
    sub->add_flag("-q,--quiet", o.quiet, "Suppress the verdict table");
    sub->callback([&, sc, i] { exit_code = run(sc, options[i]); });
  }

  std::string defaults_name;
  auto* defaults = app.add_subcommand("defaults", "Print the default config of a scenario");
  defaults->add_option("scenario", defaults_name, "Scenario name")->required();
  defaults->callback([&] {
    std::cout << to_json(default_config(parse_scenario(defaults_name))).dump(2) << "\n";
  });

  auto* refs = app.add_subcommand("references", "Print the reference values and tolerance bands");
  refs->callback([] {
    std::printf("table version %s\n", kReferenceTableVersion);
    for (const auto& r : reference_table()) {
      std::printf("%-44s %-12s [%s, %s]  %-10s %s\n", r.id.c_str(), format_number(r.reference).c_str(),
                  bound(r.lower).c_str(), bound(r.upper).c_str(), r.kind.c_str(), r.description.c_str());
    }
  });

  std::string counts_path, rec_out = ".";
  int resamples = 100;
  std::uint64_t rec_seed = 1;
  auto* rec = app.add_subcommand("reconstruct", "Reconstruct a two-qubit state from a counts CSV");
  rec->add_option("counts", counts_path, "Counts CSV")->required()->check(CLI::ExistingFile);
  rec->add_option("-o,--out", rec_out, "Directory for rho.json");
  rec->add_option("-n,--resamples", resamples, "Bootstrap resamples (0 disables)")
      ->check(CLI::NonNegativeNumber);
  rec->add_option("-s,--seed", rec_seed, "Bootstrap seed");
  rec->callback([&] {
    const auto r = experiments::reconstruct_counts_file(counts_path, resamples, rec_seed, rec_out);
    std::printf("fidelity_max   %s +- %s\n", format_number(r.metrics.fidelity_max).c_str(),
                format_number(r.metric_uncertainties.fidelity_max).c_str());
    std::printf("tangle         %s +- %s\n", format_number(r.metrics.tangle).c_str(),
                format_number(r.metric_uncertainties.tangle).c_str());
    std::printf("linear_entropy %s +- %s\n", format_number(r.metrics.linear_entropy).c_str(),
                format_number(r.metric_uncertainties.linear_entropy).c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
