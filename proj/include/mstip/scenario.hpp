#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mstip/geometry.hpp"
#include "mstip/harmonic_solver.hpp"

namespace mstip {

inline constexpr int kSchemaVersion = 1;

struct CrackSpec {
  std::string preset;  // tip, diameter, spider, two-cracks, none; empty when polylines are given
  double d = 0.5;      // two-cracks: distance from the tip to the far chord
  std::vector<std::vector<Point2>> polylines;
};

struct BoundarySpec {
  std::string kind = "cracktip";  // cracktip, affine, step, table
  double a = 1.0, b = 0.0, c = 0.0;
  double v = 1.0;
  std::vector<std::array<double, 3>> table;  // (x, y, value); rim nodes take the nearest entry
};

struct Analyses {
  bool phi = true;
  bool ahlfors = true;
  bool growth = true;
  bool decompose = false;
  bool chain = false;
};

struct Thresholds {
  double tau_jump = 5.0;
  double tau_tip = 1.0;
  double C_audit = 4.0;
};

struct Scenario {
  int schema_version = kSchemaVersion;
  std::string name;
  Disk domain{{0.0, 0.0}, 1.0};
  CrackSpec crack;
  BoundarySpec boundary;
  double h = 1.0 / 128.0;
  std::vector<double> radii;         // strictly decreasing
  std::vector<double> growth_radii;  // defaults to radii
  double lambda = 1.0;
  Point2 center;                     // analysis point
  Analyses analyses;
  double decompose_r = 0.1;
  double J_target = 64.0;
  int chain_pairs = 50;
  Thresholds thresholds;

  CrackSet build_crack() const;
  AnalyticSource boundary_source() const;
};

std::vector<std::string> preset_names();
// Full scenario document for a preset; throws ConfigError for unknown names.
nlohmann::ordered_json preset_json(const std::string& name);

// Resolves an optional "preset" key (file keys override it), checks every
// field and throws ConfigError naming the offending field.
Scenario parse_scenario(const nlohmann::json& doc);
// Reads and parses a file; JSON syntax errors are reported with their line.
Scenario load_scenario(const std::string& path);

nlohmann::ordered_json to_json(const Scenario& s);

// Checks the cross-field invariants (radii inside the domain, h below
// min radius / 8, ...). Called by parse_scenario and after overrides.
void validate(const Scenario& s);

}  // namespace mstip
