// mstip: scenario runner for the crack-tip regularity toolkit.
//
//   mstip run --scenario FILE [--out REPORT] [--h-override H] [--seed N]
//   mstip run --preset NAME ...
//   mstip plot --kind growth|phi|ahlfors|chain (--report FILE | --scenario FILE | --preset NAME) [--out CSV]
//   mstip presets [--show NAME]
//   mstip validate --scenario FILE

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mstip/errors.hpp"
#include "mstip/report.hpp"
#include "mstip/scenario.hpp"

namespace {

using nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw mstip::ConfigError(path + ": cannot open for writing");
  out << text;
}

mstip::Scenario resolve(const std::string& scenario_path, const std::string& preset) {
  if (!scenario_path.empty() && !preset.empty()) throw mstip::ConfigError("give either --scenario or --preset");
  if (!preset.empty()) return mstip::parse_scenario(mstip::preset_json(preset));
  if (scenario_path.empty()) throw mstip::ConfigError("--scenario is required");
  return mstip::load_scenario(scenario_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crack-tip regularity experiments on cracked grids"};
  app.require_subcommand(1);

  std::string scenario_path, preset, out_path, report_path, kind, show;
  std::optional<double> h_override;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "Solve a scenario and write its JSON report");
  run->add_option("--scenario", scenario_path, "Scenario file (JSON)");
  run->add_option("--preset", preset, "Built-in scenario instead of a file");
  run->add_option("--out", out_path, "Report path (stdout if omitted)");
  run->add_option("--h-override", h_override, "Replace the grid spacing");
  run->add_option("--seed", seed, "Seed for sampled checks (chain pairs, Poincare calibration)");

  auto* plot = app.add_subcommand("plot", "Emit CSV plot data from a report");
  plot->add_option("--kind", kind, "growth, phi, ahlfors or chain")->required();
  plot->add_option("--report", report_path, "Existing report (JSON)");
  plot->add_option("--scenario", scenario_path, "Run this scenario first");
  plot->add_option("--preset", preset, "Run this preset first");
  plot->add_option("--out", out_path, "CSV path (stdout if omitted)");
  plot->add_option("--h-override", h_override, "Replace the grid spacing");
  plot->add_option("--seed", seed, "Seed for sampled checks");

  auto* presets = app.add_subcommand("presets", "List built-in scenarios");
  presets->add_option("--show", show, "Print the scenario document of one preset");

  auto* validate = app.add_subcommand("validate", "Check a scenario file without running it");
  validate->add_option("--scenario", scenario_path, "Scenario file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*presets) {
      if (show.empty()) {
        for (const auto& name : mstip::preset_names()) std::cout << name << '\n';
      } else {
        std::cout << mstip::preset_json(show).dump(2) << '\n';
      }
      return 0;
    }

    if (*validate) {
      const mstip::Scenario s = mstip::load_scenario(scenario_path);
      std::cout << scenario_path << ": ok (" << s.name << ")\n";
      return 0;
    }

    const mstip::RunOptions opts{h_override, seed};
    if (*run) {
      const mstip::RunResult res = mstip::run_scenario(resolve(scenario_path, preset), opts);
      write_text(out_path, res.report.dump(2) + "\n");
      if (res.exit_code != 0)
        std::cerr << "error in block '" << res.failed_block << "': " << res.message << '\n';
      return res.exit_code;
    }

    if (*plot) {
      ordered_json report;
      int code = 0;
      if (!report_path.empty()) {
        std::ifstream in(report_path);
        if (!in) throw mstip::ConfigError(report_path + ": cannot open report");
        try {
          report = ordered_json::parse(in);
        } catch (const ordered_json::parse_error& e) {
          throw mstip::ConfigError(report_path + ": " + e.what());
        }
      } else {
        mstip::RunResult res = mstip::run_scenario(resolve(scenario_path, preset), opts);
        report = std::move(res.report);
        code = res.exit_code;
      }
      write_text(out_path, mstip::emit_plotdata(report, kind));
      return code;
    }
  } catch (const mstip::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mstip::exit_code_for(e);
  }
  return 0;
}
