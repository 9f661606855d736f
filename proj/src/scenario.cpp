#include "mstip/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "mstip/errors.hpp"

namespace mstip {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Walks one JSON object, remembering which keys were read so leftovers can
// be reported as unknown fields.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError((where.empty() ? std::string("scenario") : where) + ": " + what);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return as_number(obj_.at(key), at(key));
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const json& v = obj_.at(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], at(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  Point2 point(const std::string& key, Point2 fallback) {
    if (!has(key)) return fallback;
    return as_point(obj_.at(key), at(key));
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.contains(key)) fail(at(key), "unknown field");
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, "must be finite");
    return d;
  }

  static Point2 as_point(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) fail(where, "expected [x, y]");
    return {as_number(v[0], where + "[0]"), as_number(v[1], where + "[1]")};
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

ordered_json point_json(Point2 p) { return ordered_json::array({p.x, p.y}); }

ordered_json base_preset(const std::string& name, const std::string& crack, const ordered_json& boundary) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = name;
  doc["domain"] = {{"center", {0.0, 0.0}}, {"radius", 1.0}};
  doc["crack"] = {{"preset", crack}};
  doc["boundary"] = boundary;
  doc["h"] = 1.0 / 128.0;
  doc["radii"] = {0.4, 0.2, 0.1};
  doc["growth_radii"] = {0.4, 0.2, 0.1, 0.05};
  doc["lambda"] = 1.0;
  doc["center"] = {0.0, 0.0};
  doc["analyses"] = {{"phi", true}, {"ahlfors", true}, {"growth", true}, {"decompose", false}, {"chain", false}};
  doc["decomposition"] = {{"r", 0.1}, {"J_target", 64.0}};
  doc["chain"] = {{"pairs", 50}};
  doc["thresholds"] = {{"tau_jump", 5.0}, {"tau_tip", 1.0}, {"C_audit", 4.0}};
  return doc;
}

}  // namespace

std::vector<std::string> preset_names() { return {"cracktip", "straight-jump", "spider", "diameter", "two-cracks"}; }

ordered_json preset_json(const std::string& name) {
  const ordered_json cracktip = {{"kind", "cracktip"}};
  const ordered_json step = {{"kind", "step"}, {"v", 1.0}};
  if (name == "cracktip") {
    auto doc = base_preset(name, "tip", cracktip);
    doc["analyses"]["decompose"] = true;
    doc["analyses"]["chain"] = true;
    return doc;
  }
  if (name == "straight-jump") return base_preset(name, "diameter", step);
  if (name == "spider") {
    auto doc = base_preset(name, "spider", cracktip);
    doc["analyses"]["decompose"] = true;
    doc["analyses"]["chain"] = true;
    return doc;
  }
  if (name == "diameter") {
    auto doc = base_preset(name, "diameter", step);
    doc["analyses"]["phi"] = false;
    doc["analyses"]["growth"] = false;
    doc["analyses"]["decompose"] = true;
    doc["analyses"]["chain"] = true;
    return doc;
  }
  if (name == "two-cracks") {
    auto doc = base_preset(name, "two-cracks", cracktip);
    doc["crack"]["d"] = 0.5;
    doc["analyses"]["decompose"] = true;
    return doc;
  }
  throw ConfigError("preset: unknown preset '" + name + "'");
}

CrackSet Scenario::build_crack() const {
  const Point2 c = domain.center;
  const double R = domain.radius;
  std::vector<Polyline> parts;
  try {
    if (crack.preset == "tip") {
      parts.emplace_back(std::vector<Point2>{c - Point2{R, 0.0}, c});
    } else if (crack.preset == "diameter") {
      parts.emplace_back(std::vector<Point2>{c - Point2{R, 0.0}, c + Point2{R, 0.0}});
    } else if (crack.preset == "spider") {
      for (double deg : {90.0, 210.0, 330.0}) {
        const double t = deg * std::numbers::pi / 180.0;
        parts.emplace_back(std::vector<Point2>{c, c + Point2{std::cos(t), std::sin(t)} * R});
      }
    } else if (crack.preset == "two-cracks") {
      parts.emplace_back(std::vector<Point2>{c - Point2{R, 0.0}, c});
      const double half = std::sqrt(R * R - crack.d * crack.d);
      parts.emplace_back(std::vector<Point2>{c + Point2{crack.d, -half}, c + Point2{crack.d, half}});
    } else if (crack.preset.empty()) {
      for (const auto& pts : crack.polylines) parts.emplace_back(pts);
    }
    return CrackSet(std::move(parts));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("crack: ") + e.what());
  }
}

AnalyticSource Scenario::boundary_source() const {
  if (boundary.kind == "cracktip") return cracktip_source();
  if (boundary.kind == "affine") return affine_source(boundary.a, boundary.b, boundary.c);
  if (boundary.kind == "step") return step_source(boundary.v);
  const auto table = boundary.table;
  return [table](Point2 q) {
    double best = std::numeric_limits<double>::infinity();
    double value = 0.0;
    for (const auto& row : table) {
      const double d = distance(q, {row[0], row[1]});
      if (d < best) {
        best = d;
        value = row[2];
      }
    }
    return value;
  };
}

Scenario parse_scenario(const json& input) {
  if (!input.is_object()) Fields::fail("", "expected a JSON object at the top level");
  json doc = input;
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) Fields::fail("preset", "expected a string");
    json merged = preset_json(doc["preset"].get<std::string>());
    doc.erase("preset");
    merged.merge_patch(doc);
    // A crack or boundary given in the file replaces the preset's wholesale.
    for (const char* key : {"crack", "boundary"})
      if (doc.contains(key)) merged[key] = doc[key];
    doc = std::move(merged);
  }

  Fields top(doc, "");
  Scenario s;
  if (!top.has("schema_version")) Fields::fail("schema_version", "missing");
  s.schema_version = top.integer("schema_version", 0);
  if (s.schema_version != kSchemaVersion)
    Fields::fail("schema_version", "unsupported version " + std::to_string(s.schema_version));
  s.name = top.string("name", "unnamed");

  if (top.has("domain")) {
    Fields f(top.raw("domain"), "domain");
    const Point2 c = f.point("center", {0.0, 0.0});
    const double R = f.number("radius", 1.0);
    if (!(R > 0.0)) Fields::fail("domain.radius", "must be positive");
    s.domain = Disk(c, R);
    f.finish();
  }

  if (!top.has("crack")) Fields::fail("crack", "missing");
  {
    Fields f(top.raw("crack"), "crack");
    const bool has_preset = f.has("preset");
    const bool has_lines = f.has("polylines");
    if (has_preset == has_lines) Fields::fail("crack", "give exactly one of 'preset' or 'polylines'");
    if (has_preset) {
      s.crack.preset = f.string("preset", "");
      static const std::set<std::string> known{"tip", "diameter", "spider", "two-cracks", "none"};
      if (!known.contains(s.crack.preset)) Fields::fail("crack.preset", "unknown crack preset '" + s.crack.preset + "'");
      if (s.crack.preset == "none") s.crack.preset.clear();
      s.crack.d = f.number("d", 0.5);
    } else {
      const json& lines = f.raw("polylines");
      if (!lines.is_array()) Fields::fail("crack.polylines", "expected an array of polylines");
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string where = "crack.polylines[" + std::to_string(i) + "]";
        if (!lines[i].is_array() || lines[i].size() < 2) Fields::fail(where, "expected at least two [x, y] points");
        std::vector<Point2> pts;
        for (std::size_t k = 0; k < lines[i].size(); ++k)
          pts.push_back(Fields::as_point(lines[i][k], where + "[" + std::to_string(k) + "]"));
        s.crack.polylines.push_back(std::move(pts));
      }
    }
    f.finish();
  }

  if (top.has("boundary")) {
    Fields f(top.raw("boundary"), "boundary");
    s.boundary.kind = f.string("kind", "cracktip");
    if (s.boundary.kind == "affine") {
      s.boundary.a = f.number("a", 1.0);
      s.boundary.b = f.number("b", 0.0);
      s.boundary.c = f.number("c", 0.0);
    } else if (s.boundary.kind == "step") {
      s.boundary.v = f.number("v", 1.0);
    } else if (s.boundary.kind == "table") {
      if (!f.has("values")) Fields::fail("boundary.values", "missing");
      const json& rows = f.raw("values");
      if (!rows.is_array() || rows.empty()) Fields::fail("boundary.values", "expected a non-empty array of [x, y, value]");
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string where = "boundary.values[" + std::to_string(i) + "]";
        if (!rows[i].is_array() || rows[i].size() != 3) Fields::fail(where, "expected [x, y, value]");
        s.boundary.table.push_back({Fields::as_number(rows[i][0], where), Fields::as_number(rows[i][1], where),
                                    Fields::as_number(rows[i][2], where)});
      }
    } else if (s.boundary.kind != "cracktip") {
      Fields::fail("boundary.kind", "unknown boundary kind '" + s.boundary.kind + "'");
    }
    f.finish();
  }

  if (!top.has("h")) Fields::fail("h", "missing");
  s.h = top.number("h", 0.0);
  if (!top.has("radii")) Fields::fail("radii", "missing");
  s.radii = top.numbers("radii");
  s.growth_radii = top.has("growth_radii") ? top.numbers("growth_radii") : s.radii;
  s.lambda = top.number("lambda", 1.0);
  s.center = top.point("center", s.domain.center);

  if (top.has("analyses")) {
    Fields f(top.raw("analyses"), "analyses");
    s.analyses.phi = f.boolean("phi", true);
    s.analyses.ahlfors = f.boolean("ahlfors", true);
    s.analyses.growth = f.boolean("growth", true);
    s.analyses.decompose = f.boolean("decompose", false);
    s.analyses.chain = f.boolean("chain", false);
    f.finish();
  }
  if (top.has("decomposition")) {
    Fields f(top.raw("decomposition"), "decomposition");
    s.decompose_r = f.number("r", 0.1);
    s.J_target = f.number("J_target", 64.0);
    f.finish();
  }
  if (top.has("chain")) {
    Fields f(top.raw("chain"), "chain");
    s.chain_pairs = f.integer("pairs", 50);
    f.finish();
  }
  if (top.has("thresholds")) {
    Fields f(top.raw("thresholds"), "thresholds");
    s.thresholds.tau_jump = f.number("tau_jump", 5.0);
    s.thresholds.tau_tip = f.number("tau_tip", 1.0);
    s.thresholds.C_audit = f.number("C_audit", 4.0);
    f.finish();
  }
  top.finish();
  validate(s);
  return s;
}

void validate(const Scenario& s) {
  auto check_radii = [&](const std::vector<double>& radii, const std::string& key) {
    if (radii.empty()) Fields::fail(key, "must not be empty");
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const std::string where = key + "[" + std::to_string(i) + "]";
      if (!(radii[i] > 0.0)) Fields::fail(where, "must be positive");
      if (i > 0 && !(radii[i] < radii[i - 1])) Fields::fail(where, "radii must be strictly decreasing");
      if (distance(s.center, s.domain.center) + radii[i] > s.domain.radius)
        Fields::fail(where, "disk around the centre leaves the domain");
    }
  };
  check_radii(s.radii, "radii");
  check_radii(s.growth_radii, "growth_radii");
  if (s.analyses.phi && s.radii.size() < 3) Fields::fail("radii", "phi classification needs at least 3 radii");
  if (s.analyses.growth && s.growth_radii.size() < 3) Fields::fail("growth_radii", "growth fit needs at least 3 radii");

  const double rmin = s.radii.back();
  if (!(s.h > 0.0)) Fields::fail("h", "must be positive");
  if (!(s.h < rmin / 8.0))
    Fields::fail("h", "must be below min radius / 8 = " + std::to_string(rmin / 8.0));
  if (!(s.h < s.domain.radius / 8.0)) Fields::fail("h", "must be below domain radius / 8");
  if (!(s.lambda > 0.0)) Fields::fail("lambda", "must be positive");
  if (!(s.thresholds.tau_jump > 0.0)) Fields::fail("thresholds.tau_jump", "must be positive");
  if (!(s.thresholds.tau_tip > 0.0)) Fields::fail("thresholds.tau_tip", "must be positive");
  if (!(s.thresholds.C_audit >= 1.0)) Fields::fail("thresholds.C_audit", "must be at least 1");
  if (!(s.decompose_r > 0.0)) Fields::fail("decomposition.r", "must be positive");
  if (!(s.J_target >= 1.0)) Fields::fail("decomposition.J_target", "must be at least 1");
  if (s.chain_pairs < 1) Fields::fail("chain.pairs", "must be at least 1");
  if (s.crack.preset == "two-cracks" && !(s.crack.d > 0.0 && s.crack.d < s.domain.radius))
    Fields::fail("crack.d", "must lie in (0, domain radius)");
  s.build_crack();
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open scenario file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    // e.byte is a 1-based offset; recover the line for the diagnostic.
    std::ifstream again(path);
    std::stringstream buf;
    buf << again.rdbuf();
    const std::string text = buf.str();
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
  }
  return parse_scenario(doc);
}

ordered_json to_json(const Scenario& s) {
  ordered_json doc;
  doc["schema_version"] = s.schema_version;
  doc["name"] = s.name;
  doc["domain"] = {{"center", point_json(s.domain.center)}, {"radius", s.domain.radius}};
  if (!s.crack.preset.empty()) {
    doc["crack"] = {{"preset", s.crack.preset}};
    if (s.crack.preset == "two-cracks") doc["crack"]["d"] = s.crack.d;
  } else {
    ordered_json lines = ordered_json::array();
    for (const auto& pts : s.crack.polylines) {
      ordered_json line = ordered_json::array();
      for (Point2 p : pts) line.push_back(point_json(p));
      lines.push_back(line);
    }
    doc["crack"] = {{"polylines", lines}};
  }
  ordered_json b = {{"kind", s.boundary.kind}};
  if (s.boundary.kind == "affine") {
    b["a"] = s.boundary.a;
    b["b"] = s.boundary.b;
    b["c"] = s.boundary.c;
  } else if (s.boundary.kind == "step") {
    b["v"] = s.boundary.v;
  } else if (s.boundary.kind == "table") {
    b["values"] = s.boundary.table;
  }
  doc["boundary"] = b;
  doc["h"] = s.h;
  doc["radii"] = s.radii;
  doc["growth_radii"] = s.growth_radii;
  doc["lambda"] = s.lambda;
  doc["center"] = point_json(s.center);
  doc["analyses"] = {{"phi", s.analyses.phi},
                     {"ahlfors", s.analyses.ahlfors},
                     {"growth", s.analyses.growth},
                     {"decompose", s.analyses.decompose},
                     {"chain", s.analyses.chain}};
  doc["decomposition"] = {{"r", s.decompose_r}, {"J_target", s.J_target}};
  doc["chain"] = {{"pairs", s.chain_pairs}};
  doc["thresholds"] = {
      {"tau_jump", s.thresholds.tau_jump}, {"tau_tip", s.thresholds.tau_tip}, {"C_audit", s.thresholds.C_audit}};
  return doc;
}

}  // namespace mstip
