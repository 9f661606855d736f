#pragma once

#include <functional>
#include <map>
#include <memory>

#include "mstip/cracked_grid.hpp"
#include "mstip/geometry.hpp"

namespace mstip {

// Closed-form field evaluated at points (boundary data, manufactured fields).
using AnalyticSource = std::function<double(Point2)>;

// sqrt(2 r / pi) sin(theta / 2), theta in (-pi, pi], crack on the negative x-axis.
// Harmonic off the crack, zero normal derivative on both faces and
// |grad u|^2 = 1 / (2 pi r), so the Dirichlet energy in B_r(0) is exactly r.
double cracktip_exact(Point2 q);

AnalyticSource cracktip_source();
AnalyticSource affine_source(double a, double b, double c);  // a x + b y + c
AnalyticSource step_source(double v);                       // +v for y > 0, -v otherwise

// Dirichlet values on the rim nodes of a grid.
class BoundaryData {
 public:
  BoundaryData() = default;
  static BoundaryData from_source(const CrackedGrid& grid, const AnalyticSource& source);

  void set(NodeId n, double value) { values_[n] = value; }
  const std::map<NodeId, double>& values() const { return values_; }

  // Throws DomainError naming the first rim node without a value.
  void check_covers(const CrackedGrid& grid) const;

 private:
  std::map<NodeId, double> values_;
};

struct SolveReport {
  std::size_t unknowns = 0;
  long iterations = 0;
  double relative_residual = 0.0;
};

struct HarmonicSolution {
  ScalarField field;
  SolveReport report;
};

// Solves the graph Laplacian with Dirichlet data on rim nodes; severed edges
// give the natural (zero Neumann) condition on the crack. Conjugate gradient
// from zero, relative residual 1e-10, at most 50 sqrt(#nodes) iterations.
HarmonicSolution solve_harmonic(std::shared_ptr<const CrackedGrid> grid, const BoundaryData& bd);

ScalarField sample_field(std::shared_ptr<const CrackedGrid> grid, const AnalyticSource& source);

// u_r(x) = r^{-1/2} u(r x), sampled on the nodes of `grid` (a unit-disk grid).
ScalarField rescale_field(std::shared_ptr<const CrackedGrid> grid, const AnalyticSource& source, double r);

// sum over nodes of B of gradient density * h^2.
double dirichlet_energy_in_disk(const ScalarField& field, const Disk& B);

// Dirichlet energy in `window` plus lambda times the length of K inside it.
double ms_energy(const ScalarField& field, const CrackSet& K, const Disk& window, double lambda);

}  // namespace mstip
