#include "mstip/report.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "mstip/errors.hpp"
#include "mstip/harmonic_solver.hpp"
#include "mstip/john_engine.hpp"
#include "mstip/regularity.hpp"

namespace mstip {

using nlohmann::ordered_json;

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
  if (dynamic_cast<const UnderdeterminedError*>(&e)) return "UnderdeterminedError";
  if (dynamic_cast<const EnclosureError*>(&e)) return "EnclosureError";
  if (dynamic_cast<const ResolutionError*>(&e)) return "ResolutionError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  return "Error";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  return 3;
}

namespace {

ordered_json point_json(Point2 p) { return ordered_json::array({p.x, p.y}); }

// NaN and infinities have no JSON spelling; they are written as null.
ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json disk_json(const Disk& d) { return {{"center", point_json(d.center)}, {"radius", d.radius}}; }

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

ordered_json phi_block(const ScalarField& u, const Scenario& s, ordered_json& classification) {
  const PhiProfile prof = phi_profile(u, s.center, s.radii);
  ordered_json samples = ordered_json::array();
  for (const PhiSample& p : prof.samples) {
    samples.push_back({{"r", p.r},
                       {"numerator", num(p.numerator)},
                       {"denominator", num(p.denominator)},
                       {"phi", num(p.phi)},
                       {"phi_r", num(p.phi * p.r)}});
  }
  const Classification c = classify(prof, s.thresholds.tau_jump, s.thresholds.tau_tip);
  classification = {{"verdict", verdict_name(c.verdict)},
                    {"slope", num(c.slope)},
                    {"intercept", num(c.intercept)},
                    {"increasing", c.increasing},
                    {"max_phi", num(c.max_phi)},
                    {"tau_jump", s.thresholds.tau_jump},
                    {"tau_tip", s.thresholds.tau_tip}};
  return {{"center", point_json(prof.center)}, {"samples", samples}};
}

ordered_json ahlfors_block(const CrackSet& K, const ScalarField& u, const Scenario& s) {
  const AhlforsTable t = ahlfors_audit(K, u, s.center, s.radii, s.thresholds.C_audit);
  ordered_json rows = ordered_json::array();
  for (const AhlforsRow& r : t.rows)
    rows.push_back({{"r", r.r}, {"length_ratio", r.length_ratio}, {"energy_ratio", r.energy_ratio}, {"ok", r.ok}});
  return {{"center", point_json(s.center)}, {"C", t.C}, {"all_ok", t.all_ok}, {"rows", rows}};
}

ordered_json growth_block(const ScalarField& u, const Scenario& s) {
  const GrowthFit g = growth_exponent(u, s.center, s.growth_radii);
  ordered_json rows = ordered_json::array();
  for (const GrowthRow& r : g.rows) rows.push_back({{"r", r.r}, {"sup_diff", r.sup_diff}});
  return {{"center", point_json(s.center)},
          {"slope", num(g.slope)},
          {"intercept", num(g.intercept)},
          {"degenerate", g.degenerate},
          {"center_value", g.center_value},
          {"center_mean_4h", g.center_mean},
          {"center_difference", g.center_difference},
          {"rows", rows}};
}

ordered_json decomposition_block(const Decomposition& d) {
  const auto& c = d.certificate;
  ordered_json groups = ordered_json::array();
  for (const JohnSubdomain& W : d.domains) {
    ordered_json balls = ordered_json::array();
    for (std::size_t b : W.balls) balls.push_back(disk_json(d.selected[b]));
    groups.push_back({{"members", W.members.size()},
                      {"base_node", d.curves[W.base_member].node},
                      {"base_point", point_json(W.base_point)},
                      {"balls", balls}});
  }
  ordered_json uncovered = ordered_json::array();
  for (NodeId n : c.uncovered) uncovered.push_back(n);
  return {{"r", d.r},
          {"h", d.h},
          {"J", c.J},
          {"C3", c.C3},
          {"J_prime", c.J_prime},
          {"N", c.N},
          {"N_hat", c.N_hat},
          {"multiplicity", c.multiplicity},
          {"M", num(c.M)},
          {"min_ball_ratio", num(c.min_ball_ratio)},
          {"max_ball_ratio", c.max_ball_ratio},
          {"min_exit_length", num(c.min_exit_length)},
          {"max_extent", c.max_extent},
          {"nodes", c.nodes},
          {"covered", c.covered},
          {"beta_john_ok", c.beta_john_ok},
          {"boman_ok", c.boman_ok},
          {"uncovered", uncovered},
          {"all_ok", c.all_ok()},
          {"groups", groups}};
}

ordered_json chain_block(const ScalarField& u, const Decomposition& d, const Scenario& s, std::uint64_t seed) {
  const double C_P = calibrate_poincare(d.h, seed);
  std::mt19937_64 rng(seed);
  ordered_json pairs = ordered_json::array();
  bool sound = true;
  double max_scaled = 0.0;
  double max_ratio = 0.0;
  for (std::size_t j = 0; j < d.domains.size(); ++j) {
    const auto& members = d.domains[j].members;
    for (int k = 0; k < s.chain_pairs; ++k) {
      const NodeCurve& cx = d.curves[members[rng() % members.size()]];
      const NodeCurve& cy = d.curves[members[rng() % members.size()]];
      double J = 0.0;
      const auto [a, b] = boman_pair(*cx.beta, std::max(1.0, cx.beta_john), *cy.beta, std::max(1.0, cy.beta_john),
                                     d.h, &J);
      const ChainEstimate e = chain_estimate(u, a, b, C_P);
      sound = sound && e.direct <= e.bound;
      max_scaled = std::max(max_scaled, e.bound / std::sqrt(d.r));
      if (e.bound > 0.0) max_ratio = std::max(max_ratio, e.direct / e.bound);
      pairs.push_back({{"group", j},
                       {"x", point_json(d.grid->position(cx.node))},
                       {"y", point_json(d.grid->position(cy.node))},
                       {"J", J},
                       {"balls", a.balls.size() + b.balls.size() - 1},
                       {"direct", e.direct},
                       {"bound", e.bound}});
    }
  }
  return {{"C_P", C_P},
          {"r", d.r},
          {"all_sound", sound},
          {"max_bound_over_sqrt_r", max_scaled},
          {"max_direct_over_bound", max_ratio},
          {"pairs", pairs}};
}

}  // namespace

RunResult run_scenario(Scenario s, const RunOptions& opts) {
  if (opts.h_override) {
    s.h = *opts.h_override;
    validate(s);
  }
  RunResult res;
  ordered_json& rep = res.report;
  ordered_json timings;
  const Timer total;

  rep["scenario"] = to_json(s);
  for (const char* key : {"solve", "phi", "classification", "ahlfors", "growth", "decomposition", "chain"})
    rep[key] = nullptr;

  auto fail = [&](const std::string& block, const std::exception& e) {
    rep[block] = {{"error", {{"type", error_kind(e)}, {"message", e.what()}}}};
    if (res.failed_block.empty()) {
      res.failed_block = block;
      res.message = e.what();
      res.exit_code = exit_code_for(e);
    }
  };

  const CrackSet K = s.build_crack();
  std::shared_ptr<const CrackedGrid> grid;
  std::optional<ScalarField> field;
  {
    const Timer t;
    try {
      grid = build_cracked_grid(s.domain, K, s.h);
      HarmonicSolution sol = solve_harmonic(grid, BoundaryData::from_source(*grid, s.boundary_source()));
      rep["solve"] = {{"h", s.h},
                      {"nodes", grid->node_count()},
                      {"edges", grid->edge_count()},
                      {"components", grid->component_count()},
                      {"unknowns", sol.report.unknowns},
                      {"iterations", sol.report.iterations},
                      {"relative_residual", sol.report.relative_residual}};
      field.emplace(std::move(sol.field));
    } catch (const Error& e) {
      fail("solve", e);
    }
    timings["solve"] = t.seconds();
  }

  auto block = [&](const char* name, bool enabled, const std::function<void()>& body) {
    if (!enabled || !field) return;
    const Timer t;
    try {
      body();
    } catch (const Error& e) {
      fail(name, e);
    }
    timings[name] = t.seconds();
  };

  block("phi", s.analyses.phi, [&] {
    ordered_json cls;
    rep["phi"] = phi_block(*field, s, cls);
    rep["classification"] = cls;
  });
  block("ahlfors", s.analyses.ahlfors, [&] { rep["ahlfors"] = ahlfors_block(K, *field, s); });
  block("growth", s.analyses.growth, [&] { rep["growth"] = growth_block(*field, s); });

  std::optional<Decomposition> dec;
  block("decomposition", s.analyses.decompose || s.analyses.chain, [&] {
    dec.emplace(decompose(grid, s.decompose_r, {s.J_target, 20.0}));
    if (s.analyses.decompose) rep["decomposition"] = decomposition_block(*dec);
  });
  block("chain", s.analyses.chain && dec.has_value(), [&] { rep["chain"] = chain_block(*field, *dec, s, opts.seed); });

  ordered_json meta;
  meta["version"] = kVersion;
  meta["seed"] = opts.seed;
  meta["tolerances"] = {{"cg_relative_residual", 1e-10}, {"crack_eps", K.tolerance()}};
  // Distance from the analysis centre to crack components not passing through it.
  double far = std::numeric_limits<double>::infinity();
  for (const Polyline& comp : K.components()) {
    const CrackSet single({comp});
    if (!single.contains(s.center)) far = std::min(far, single.distance(s.center));
  }
  meta["far_component_distance"] = num(far);
  meta["status"] = res.failed_block.empty() ? "ok" : "failed: " + res.failed_block;
  timings["total"] = total.seconds();
  meta["timings"] = timings;
  rep["meta"] = meta;
  return res;
}

ordered_json strip_timings(ordered_json report) {
  if (report.contains("meta") && report["meta"].is_object()) report["meta"].erase("timings");
  return report;
}

std::string emit_plotdata(const ordered_json& report, const std::string& kind) {
  struct Layout {
    const char* block;
    const char* rows;
    std::vector<const char*> columns;
  };
  Layout layout;
  if (kind == "growth")
    layout = {"growth", "rows", {"r", "sup_diff"}};
  else if (kind == "phi")
    layout = {"phi", "samples", {"r", "numerator", "denominator", "phi"}};
  else if (kind == "ahlfors")
    layout = {"ahlfors", "rows", {"r", "length_ratio", "energy_ratio"}};
  else if (kind == "chain")
    layout = {"chain", "pairs", {"pair", "direct", "bound"}};
  else
    throw ConfigError("plot kind must be one of growth, phi, ahlfors, chain (got '" + kind + "')");

  if (!report.contains(layout.block) || !report[layout.block].is_object() ||
      !report[layout.block].contains(layout.rows))
    throw DomainError(std::string("report has no ") + layout.block + " block");

  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < layout.columns.size(); ++i) out << (i ? "," : "") << layout.columns[i];
  out << '\n';
  const auto& rows = report[layout.block][layout.rows];
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < layout.columns.size(); ++i) {
      if (i) out << ',';
      const std::string col = layout.columns[i];
      if (col == "pair") {
        out << k;
        continue;
      }
      const auto& v = rows[k][col];
      if (v.is_number())
        out << v.get<double>();
      else
        out << "nan";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mstip
