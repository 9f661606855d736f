#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mstip/cracked_grid.hpp"
#include "mstip/geometry.hpp"
#include "mstip/john_engine.hpp"

namespace mstip {

// Phi(x, r) = (r^{-1} * energy in B_r) / (variance of u over the nodes of B_r).
struct PhiValue {
  double numerator = 0.0;
  double denominator = 0.0;
  double phi = 0.0;
  bool degenerate = false;  // both parts vanish; phi reported as 0
};

// Needs B_r(x) inside the grid disk and at least 10 nodes in it.
PhiValue phi(const ScalarField& field, Point2 x, double r);

struct PhiSample {
  double r = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  double phi = 0.0;
};

struct PhiProfile {
  Point2 center;
  std::vector<PhiSample> samples;  // radii strictly decreasing
};

// Radii must be strictly decreasing with the smallest >= 8h.
PhiProfile phi_profile(const ScalarField& field, Point2 x, std::span<const double> radii);

enum class Verdict { Tip, Jump, Inconclusive };
const char* verdict_name(Verdict v);

struct Classification {
  Verdict verdict = Verdict::Inconclusive;
  double slope = 0.0;      // least-squares slope of phi against 1/r, last three samples
  double intercept = 0.0;
  bool increasing = false; // phi increases as r decreases over those samples
  double max_phi = 0.0;
};

Classification classify(const PhiProfile& profile, double tau_jump = 5.0, double tau_tip = 1.0);

struct AhlforsRow {
  double r = 0.0;
  double length_ratio = 0.0;  // H^1(K cap B_r) / r
  double energy_ratio = 0.0;  // energy in B_r / r
  bool ok = false;
};

struct AhlforsTable {
  double C = 0.0;
  std::vector<AhlforsRow> rows;
  bool all_ok = false;
};

// x must lie on K. A row is ok when the length ratio lies in [1/C, C] and the
// energy ratio is at most C.
AhlforsTable ahlfors_audit(const CrackSet& K, const ScalarField& field, Point2 x, std::span<const double> radii,
                           double C_audit = 4.0);

struct GrowthRow {
  double r = 0.0;
  double sup_diff = 0.0;  // sup over nodes of B_r(x0) of |u - u(x0)|
};

struct GrowthFit {
  double slope = 0.0;  // of log sup_diff against log r; NaN when degenerate
  double intercept = 0.0;
  std::vector<GrowthRow> rows;
  double center_value = 0.0;  // u(x0): mean over the equidistant nearest nodes
  double center_mean = 0.0;   // mean of u over B_{4h}(x0)
  double center_difference = 0.0;
  bool degenerate = false;    // some sup_diff is zero
};

// At least three radii.
GrowthFit growth_exponent(const ScalarField& field, Point2 x0, std::span<const double> radii);

struct ChainEstimate {
  double bound = 0.0;
  double direct = 0.0;
  std::vector<double> terms_x;  // diam * (mean |Du|^2 over U_k cup U_{k+1})^{1/2}
  std::vector<double> terms_y;
};

// Telescoping estimate for two chains sharing U_0. Every ball must lie in the
// grid disk and contain a node.
ChainEstimate chain_estimate(const ScalarField& field, const BomanChain& from_x, const BomanChain& from_y,
                             double C_P);

// Largest ratio, over random smooth fields on a crack-free disk of radius 40h,
// of |mean_A u - mean_B u| / (max diam * (mean |Du|^2 over A cup B)^{1/2}) for
// overlapping disk pairs, and of mean |u - mean u| / (diam * (mean |Du|^2)^{1/2})
// for single disks.
double calibrate_poincare(double h, std::uint64_t seed, int fields = 100);

}  // namespace mstip
