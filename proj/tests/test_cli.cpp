#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "mstip/errors.hpp"
#include "mstip/report.hpp"
#include "mstip/scenario.hpp"

using namespace mstip;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "mstip_cli_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(MSTIP_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json quick_doc() {
  json doc = preset_json("cracktip");
  doc["h"] = 0.01;
  doc["growth_radii"] = {0.4, 0.2, 0.1};
  doc["analyses"]["decompose"] = false;
  doc["analyses"]["chain"] = false;
  return doc;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("every preset parses and round-trips through JSON") {
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    const Scenario s = parse_scenario(preset_json(name));
    CHECK(s.name == name);
    const Scenario again = parse_scenario(to_json(s));
    CHECK(to_json(again) == to_json(s));
  }
  CHECK_THROWS_AS(preset_json("nope"), ConfigError);
}

TEST_CASE("scenario validation names the field") {
  auto message = [](const json& doc) {
    try {
      parse_scenario(doc);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  json doc = quick_doc();
  doc["radii"] = {0.1, 0.2, 0.4};
  CHECK(message(doc).starts_with("radii[1]"));

  doc = quick_doc();
  doc["colour"] = "red";
  CHECK(message(doc).find("colour") != std::string::npos);

  doc = quick_doc();
  doc["boundary"] = {{"kind", "affine"}, {"a", 1}, {"z", 2}};
  CHECK(message(doc).find("boundary") != std::string::npos);

  doc = quick_doc();
  doc["h"] = 0.05;
  CHECK(message(doc).starts_with("h"));

  doc = quick_doc();
  doc["radii"] = {0.4, 0.2};
  CHECK(message(doc).starts_with("radii"));

  doc = quick_doc();
  doc["crack"] = {{"preset", "tip"}, {"polylines", json::array()}};
  CHECK(message(doc).starts_with("crack"));

  doc = quick_doc();
  doc["crack"] = {{"polylines", {{{-1, 0}, {1, 0}}, {{0, -1}, {0, 1}}}}};
  CHECK(message(doc).starts_with("crack"));

  doc = quick_doc();
  doc["schema_version"] = 2;
  CHECK(message(doc).starts_with("schema_version"));

  CHECK(message(quick_doc()).empty());
}

TEST_CASE("preset key is merged under file keys") {
  const json doc = {{"schema_version", 1}, {"preset", "spider"}, {"name", "mine"}, {"h", 0.01}};
  const Scenario s = parse_scenario(doc);
  CHECK(s.name == "mine");
  CHECK(s.h == 0.01);
  CHECK(s.crack.preset == "spider");
  CHECK(s.analyses.decompose);
}

TEST_CASE("syntax errors report the line") {
  const fs::path p = write_file("broken.json", "{\n  \"schema_version\": 1,\n  \"h\": ,\n}\n");
  try {
    load_scenario(p.string());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_scenario((scratch_dir() / "missing.json").string()), ConfigError);
}

TEST_CASE("report layout and reproducibility") {
  const Scenario s = parse_scenario(quick_doc());
  const RunResult a = run_scenario(s);
  const RunResult b = run_scenario(s);
  CHECK(a.exit_code == 0);
  CHECK(strip_timings(a.report) == strip_timings(b.report));
  std::vector<std::string> keys;
  for (const auto& [k, v] : a.report.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"scenario", "solve", "phi", "classification", "ahlfors", "growth",
                                         "decomposition", "chain", "meta"});
  CHECK(a.report["decomposition"].is_null());
  CHECK(a.report["meta"]["status"] == "ok");
  CHECK(a.report["meta"].contains("timings"));
  CHECK_FALSE(strip_timings(a.report)["meta"].contains("timings"));
  CHECK(a.report["solve"]["relative_residual"].get<double>() <= 1e-10);
}

TEST_CASE("h override is validated") {
  const Scenario s = parse_scenario(quick_doc());
  CHECK(run_scenario(s, {1.0 / 96, 1}).report["solve"]["h"] == 1.0 / 96);
  CHECK_THROWS_AS(run_scenario(s, {0.2, 1}), ConfigError);
}

TEST_CASE("failing blocks become structured errors") {
  json doc = quick_doc();
  doc["center"] = {0.3, 0.3};  // not on the crack
  doc["radii"] = {0.5, 0.3, 0.2};
  doc["growth_radii"] = {0.5, 0.3, 0.2};
  const RunResult r = run_scenario(parse_scenario(doc));
  CHECK(r.exit_code == 3);
  CHECK(r.failed_block == "ahlfors");
  CHECK(r.report["ahlfors"]["error"]["type"] == "DomainError");
  CHECK(r.report["growth"].contains("slope"));  // later blocks still run
  CHECK(r.report["meta"]["status"] == "failed: ahlfors");
}

TEST_CASE("plot data") {
  const RunResult r = run_scenario(parse_scenario(quick_doc()));
  CHECK(first_line(emit_plotdata(r.report, "growth")) == "r,sup_diff");
  CHECK(first_line(emit_plotdata(r.report, "phi")) == "r,numerator,denominator,phi");
  CHECK(first_line(emit_plotdata(r.report, "ahlfors")) == "r,length_ratio,energy_ratio");
  const std::string growth = emit_plotdata(r.report, "growth");
  CHECK(std::count(growth.begin(), growth.end(), '\n') == 4);
  // Raw values, not logarithms.
  std::istringstream rows(growth);
  std::string line;
  std::getline(rows, line);
  std::getline(rows, line);
  CHECK(std::stod(line.substr(0, line.find(','))) == 0.4);
  CHECK_THROWS_AS(emit_plotdata(r.report, "chain"), DomainError);
  CHECK_THROWS_AS(emit_plotdata(r.report, "pie"), ConfigError);
}

TEST_CASE("cracktip preset report values") {
  const RunResult r = run_scenario(parse_scenario(preset_json("cracktip")));
  REQUIRE(r.exit_code == 0);
  CHECK(r.report["growth"]["slope"].get<double>() == doctest::Approx(0.5).epsilon(0.1));
  for (const auto& sample : r.report["phi"]["samples"])
    CHECK(sample["phi_r"].get<double>() == doctest::Approx(3 * std::numbers::pi / 2).epsilon(0.1));
  CHECK(r.report["classification"]["verdict"] == "Tip");
  CHECK(r.report["decomposition"]["N"] == 1);
  CHECK(r.report["decomposition"]["all_ok"] == true);
  CHECK(r.report["chain"]["all_sound"] == true);
  CHECK(emit_plotdata(r.report, "chain").starts_with("pair,direct,bound\n"));
}

TEST_CASE("spider preset has three groups") {
  const RunResult r = run_scenario(parse_scenario(preset_json("spider")));
  REQUIRE(r.exit_code == 0);
  CHECK(r.report["decomposition"]["N"] == 3);
  CHECK(r.report["decomposition"]["groups"].size() == 3);
}

TEST_CASE("binary exit codes") {
  json bad = quick_doc();
  bad["radii"] = {0.1, 0.2, 0.4};
  const fs::path bad_path = write_file("bad.json", bad.dump());
  const fs::path good_path = write_file("good.json", quick_doc().dump());
  const fs::path report = scratch_dir() / "report.json";
  const fs::path csv = scratch_dir() / "growth.csv";

  CHECK(run_binary("validate --scenario " + good_path.string()) == 0);
  CHECK(run_binary("validate --scenario " + bad_path.string()) == 2);
  CHECK(run_binary("run --scenario " + bad_path.string()) == 2);
  CHECK(run_binary("run --bogus") == 2);
  CHECK(run_binary("presets") == 0);
  CHECK(run_binary("presets --show nope") == 2);
  CHECK(run_binary("run --scenario " + good_path.string() + " --out " + report.string()) == 0);
  CHECK(run_binary("plot --kind growth --report " + report.string() + " --out " + csv.string()) == 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "r,sup_diff");
  CHECK(run_binary("plot --kind chain --report " + report.string()) == 3);

  json off = quick_doc();
  off["center"] = {0.3, 0.3};
  off["radii"] = {0.5, 0.3, 0.2};
  off["growth_radii"] = {0.5, 0.3, 0.2};
  CHECK(run_binary("run --scenario " + write_file("off.json", off.dump()).string()) == 3);
}
