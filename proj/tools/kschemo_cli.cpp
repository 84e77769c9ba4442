// kschemo: run, sweep, verify and report chemotaxis experiments.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kschemo/harness/config.hpp"
#include "kschemo/harness/report.hpp"
#include "kschemo/harness/scenario.hpp"
#include "kschemo/harness/sweep.hpp"
#include "kschemo/harness/verify.hpp"

namespace ks = kschemo::harness;

namespace {

std::string default_out() {
  if (const char* env = std::getenv("KSCHEMO_OUT"); env && *env) return env;
  return "kschemo_out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral attraction-repulsion chemotaxis simulator"};
  app.set_version_flag("--version", KSCHEMO_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = default_out();
  std::optional<std::uint64_t> seed;
  int parallel = 1;
  std::string suite = "all";

  auto* run = app.add_subcommand("run", "Run a single simulation and write its trace");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (default: $KSCHEMO_OUT or ./kschemo_out)");
  run->add_option("--seed", seed, "Override the config seed");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a [sweep] block");
  sweep->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--seed", seed, "Override the config seed");
  sweep->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run verification suites");
  verify->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  verify->add_option("--out", out_dir, "Output directory");
  verify->add_option("--seed", seed, "Override the config seed");
  std::vector<std::string> choices = ks::suite_names();
  choices.push_back("all");
  verify->add_option("--suite", suite, "Suite name or 'all'")->check(CLI::IsMember(choices));

  auto* report = app.add_subcommand("report", "Tabulate stored traces and reports");
  report->add_option("--out", out_dir, "Directory to read");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*report) {
      ks::render_report(out_dir, std::cout);
      return 0;
    }
    const std::string text = ks::read_text_file(config_path);

    if (*sweep) {
      ks::SweepSpec spec = ks::parse_sweep(text);
      if (seed) spec.base.seed = *seed;
      const ks::SweepSummary s = ks::run_sweep(spec, parallel, out_dir);
      ks::write_sweep_summary(s, std::cout);
      int bad = 0;
      for (const auto& r : s.rows) {
        if (r.status == "Error") std::cerr << "point " << r.index << " failed: " << r.error << "\n";
        if (!r.match) ++bad;
      }
      if (bad) std::cerr << bad << " point(s) did not match the expected regime behaviour\n";
      return (bad || s.any_error()) ? 1 : 0;
    }

    ks::SimConfig cfg = ks::parse_config(text, {"sweep"});
    if (seed) cfg.seed = *seed;

    if (*run) {
      const ks::ScenarioResult r = ks::run_scenario(cfg, out_dir);
      std::cout << "regime  " << kschemo::to_string(r.regime.tag) << " (" << r.regime.detail << ")\n"
                << "status  " << r.sim.trace.status.describe() << "\n"
                << "steps   " << r.sim.steps << ", t = " << r.sim.final_time << "\n"
                << "plateau " << r.plateau << ", max sup " << r.max_sup << "\n"
                << "trace   " << r.csv_path.string() << "\n";
      return 0;
    }

    std::vector<std::string> todo = suite == "all" ? ks::suite_names() : std::vector<std::string>{suite};
    bool ok = true;
    for (const auto& name : todo) {
      const ks::SuiteReport rep = ks::verify_suite(name, cfg, out_dir);
      std::cout << (rep.pass() ? "PASS " : "FAIL ") << name << "\n";
      for (const auto& c : rep.checks)
        std::cout << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << ": " << c.value << " " << c.relation
                  << " " << c.threshold << "\n";
      ok = ok && rep.pass();
    }
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
