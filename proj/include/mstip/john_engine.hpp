#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mstip/cracked_grid.hpp"
#include "mstip/geometry.hpp"

namespace mstip {

// car(core, J) = union of B(core(s), s / J) over arc-lengths 0 < s <= length,
// with the vertex at core.front().
struct Carrot {
  Polyline core;
  double J = 1.0;

  Carrot(Polyline c, double j);
};

// Minimum over s in (0, length] of |q - core(s)| - s / J and where it occurs.
struct CarrotMargin {
  double s = 0.0;
  double margin = 0.0;
};
CarrotMargin carrot_margin(const Carrot& c, Point2 q);
bool carrot_contains(const Carrot& c, Point2 q);

// Rerouted core for a point z of the carrot: the segment z -> eta followed by
// the core tail from eta, where eta is a core point whose ball contains z.
// Throws DomainError if z is not in the carrot.
Polyline reroute_through_carrot(const Carrot& c, Point2 z);

// What a John curve keeps its distance from: the crack and optionally the
// boundary circle of the working disk.
struct JohnObstacles {
  const CrackSet* crack = nullptr;
  std::optional<Disk> outer;

  double distance(Point2 q) const;
};

struct JohnCheck {
  bool ok = true;
  double worst_ratio = 0.0;     // max of l(core[x, y]) / dist(y, obstacles)
  double worst_arc = 0.0;       // arc-length where it occurs
  std::optional<Point2> witness;  // first sample touching an obstacle
};

// Samples the core at arc steps <= h/2 (plus every vertex) and compares the
// travelled length with the distance to the obstacles.
JohnCheck verify_john_curve(const Polyline& core, const JohnObstacles& obstacles, double J, double h);
// Degenerate core consisting of the single point x: vacuously John.
JohnCheck verify_john_curve(Point2 x, const JohnObstacles& obstacles, double J);

struct EscapingCurve {
  Polyline curve;
  double john_constant = 0.0;   // achieved, measured by verify_john_curve against K
  double search_constant = 0.0; // level at which the grid search first succeeded
};

// John curve on the cracked grid from x to the first node outside `escape`.
// Grid search: Dijkstra by travelled length where a node is admissible only if
// length <= J * clearance; J is bisected (log scale) on [1, J_target]. If no
// path exists at J_target the plain shortest path is used and the achieved
// constant is reported; if none exists at all EnclosureError is thrown. The
// path is then shortcut by straight segments that keep the same bound.
EscapingCurve find_escaping_curve(const CrackedGrid& grid, Point2 x, const Disk& escape, double J_target = 64.0);
// Escapes B_r(x).
EscapingCurve find_escaping_curve(const CrackedGrid& grid, Point2 x, double r, double J_target = 64.0);

struct BesicovitchSelection {
  std::vector<std::size_t> selected;  // in selection order
  int multiplicity = 0;               // max number of selected closed balls over a sample grid
};

// Greedy selection by decreasing radius (ties by index), skipping balls whose
// centre is already covered by a selected closed ball.
BesicovitchSelection besicovitch_select(std::span<const Point2> centers, std::span<const double> radii);

struct BomanChain {
  std::vector<Disk> balls;                     // balls[0] = U_0 at the core end
  std::vector<std::optional<Disk>> witnesses;  // R_i for (U_i, U_{i+1}); nullopt if they miss
  double M = 1.0;                              // smallest constant satisfying the measured bullets
};

struct BomanAudit {
  bool base_ok = false;
  bool ratio_ok = false;
  bool overlap_ok = false;
  bool multiplicity_ok = false;
  double diameter_ratio = 1.0;
  double dilation = 1.0;
  int multiplicity = 0;

  bool all() const { return base_ok && ratio_ok && overlap_ok && multiplicity_ok; }
};

// B(core end, length / (4J)).
Disk canonical_base_ball(const Polyline& core, double J);

// Chain along a J-John core: U_0 = base, then balls of radius s / (4J) at
// arc-lengths s_i = length * q^i with q = 1 - 1/(4J), stopping once the radius
// drops below h. A core shorter than h gives the single ball U_0.
BomanChain carrot_to_boman(const Polyline& core, double J, const Disk& base, double h);

// Checks the four chain conditions with constant M.
BomanAudit audit_boman(const BomanChain& chain, const Disk& base, double M);

// Two chains from cores ending at the same point, sharing U_0. The common J
// is raised if needed so U_0 still overlaps the first ball of the longer core.
std::pair<BomanChain, BomanChain> boman_pair(const Polyline& core_x, double J_x, const Polyline& core_y,
                                            double J_y, double h, double* J_used = nullptr);

// ---------------------------------------------------------------------------
// Decomposition of B_r \ K into John domains W_j.

struct DecomposeOptions {
  double J_target = 64.0;
  double max_multiplicity = 20.0;
};

struct NodeCurve {
  NodeId node = -1;
  Polyline gamma;       // escaping curve gamma_x[x, x_r]
  Point2 exit;          // x_r on the circle of radius 3r
  double john = 0.0;    // achieved John constant of gamma
  double exit_ball_radius = 0.0;  // dist(x_r, K) / 2
  int group = -1;
  std::size_t covering_ball = 0;  // index into Decomposition::selected
  std::optional<Polyline> beta;   // chain generator core from x to the base point
  double beta_john = 0.0;         // achieved John constant of beta
};

struct JohnSubdomain {
  std::vector<std::size_t> balls;  // indices into Decomposition::selected
  std::vector<std::size_t> members;  // indices into Decomposition::curves (V_j)
  std::size_t base_member = 0;     // y, the smallest node id in V_j
  Point2 base_point;               // w_j = y_r
  Polyline base_core;              // gamma_y[y, y_r]
};

struct DecompositionCertificate {
  double J = 1.0;         // max achieved John constant of escaping curves
  double C3 = 4.0;        // max(4, max l(beta_x) / r)
  double J_prime = 4.0;   // C3 * J
  int N = 0;              // number of groups
  int N_hat = 0;          // max number of balls in one group
  int multiplicity = 0;   // Besicovitch sample multiplicity
  double M = 1.0;         // Boman constant over all beta chains
  double min_ball_ratio = 0.0;  // min over balls of radius / r (expected >= 1/J)
  double max_ball_ratio = 0.0;  // max over balls of radius / r (expected <= 3/2)
  double min_exit_length = 0.0; // min l(gamma_x[x, x_r]) / r (expected >= 2)
  double max_extent = 0.0;      // max over carrot samples of |y| + s/J' divided by r
  std::size_t nodes = 0;
  std::size_t covered = 0;
  std::size_t beta_john_ok = 0;
  std::size_t boman_ok = 0;
  std::vector<NodeId> uncovered;

  bool all_ok() const;
};

class Decomposition {
 public:
  double r = 0.0;
  double h = 0.0;
  std::shared_ptr<const CrackedGrid> grid;
  std::vector<NodeCurve> curves;
  std::vector<Disk> selected;          // selected exit balls B_i
  std::vector<int> selected_group;
  std::vector<JohnSubdomain> domains;  // W_{j,r}
  DecompositionCertificate certificate;

  // Membership in the closure-adjusted W_j: the base carrot, any member carrot
  // car(beta_x, J'), or a member vertex x itself.
  bool contains(std::size_t j, Point2 q) const;
  const NodeCurve* curve_for(NodeId n) const;
};

// Requires 0 in K and B_{3r} well inside the grid disk.
Decomposition decompose(std::shared_ptr<const CrackedGrid> grid, double r, const DecomposeOptions& opts = {});

}  // namespace mstip
