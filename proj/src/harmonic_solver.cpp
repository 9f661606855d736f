#include "mstip/harmonic_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mstip/errors.hpp"

namespace mstip {

double cracktip_exact(Point2 q) {
  const double r = norm(q);
  if (r == 0.0) return 0.0;
  const double theta = std::atan2(q.y, q.x);
  return std::sqrt(2.0 * r / std::numbers::pi) * std::sin(0.5 * theta);
}

AnalyticSource cracktip_source() { return [](Point2 q) { return cracktip_exact(q); }; }

AnalyticSource affine_source(double a, double b, double c) {
  return [a, b, c](Point2 q) { return a * q.x + b * q.y + c; };
}

AnalyticSource step_source(double v) {
  return [v](Point2 q) { return q.y > 0.0 ? v : -v; };
}

BoundaryData BoundaryData::from_source(const CrackedGrid& grid, const AnalyticSource& source) {
  BoundaryData bd;
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const auto id = static_cast<NodeId>(n);
    if (grid.is_boundary(id)) bd.set(id, source(grid.position(id)));
  }
  return bd;
}

void BoundaryData::check_covers(const CrackedGrid& grid) const {
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const auto id = static_cast<NodeId>(n);
    if (grid.is_boundary(id) && !values_.contains(id))
      throw DomainError("boundary node " + std::to_string(n) + " has no prescribed value");
  }
}

HarmonicSolution solve_harmonic(std::shared_ptr<const CrackedGrid> grid, const BoundaryData& bd) {
  const CrackedGrid& g = *grid;
  bd.check_covers(g);
  const std::size_t n = g.node_count();

  std::vector<double> values(n, 0.0);
  std::vector<char> pinned(n, 0);
  for (const auto& [id, v] : bd.values()) {
    if (id < 0 || static_cast<std::size_t>(id) >= n) throw DomainError("boundary data names a node outside the grid");
    if (!std::isfinite(v)) throw DomainError("boundary value is not finite");
    values[id] = v;
    pinned[id] = 1;
  }

  std::vector<char> anchored(static_cast<std::size_t>(g.component_count()), 0);
  for (std::size_t a = 0; a < n; ++a)
    if (pinned[a]) anchored[g.component(static_cast<NodeId>(a))] = 1;
  for (int c = 0; c < g.component_count(); ++c) {
    if (!anchored[c])
      throw UnderdeterminedError("grid component " + std::to_string(c) + " has no boundary data");
  }

  std::vector<int> unknown(n, -1);
  int m = 0;
  for (std::size_t a = 0; a < n; ++a)
    if (!pinned[a]) unknown[a] = m++;

  SolveReport report;
  report.unknowns = static_cast<std::size_t>(m);
  if (m > 0) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m) * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (std::size_t a = 0; a < n; ++a) {
      const int row = unknown[a];
      if (row < 0) continue;
      const auto nbrs = g.neighbors(static_cast<NodeId>(a));
      triplets.emplace_back(row, row, static_cast<double>(nbrs.size()));
      for (NodeId b : nbrs) {
        if (unknown[b] >= 0)
          triplets.emplace_back(row, unknown[b], -1.0);
        else
          rhs[row] += values[b];
      }
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(static_cast<Eigen::Index>(50.0 * std::sqrt(static_cast<double>(n))));
    cg.compute(A);
    // Start each component at the mean of its boundary values.
    std::vector<double> sum(static_cast<std::size_t>(g.component_count()), 0.0);
    std::vector<double> count(sum.size(), 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      if (!pinned[a]) continue;
      sum[g.component(static_cast<NodeId>(a))] += values[a];
      count[g.component(static_cast<NodeId>(a))] += 1.0;
    }
    Eigen::VectorXd guess(m);
    for (std::size_t a = 0; a < n; ++a) {
      const int c = g.component(static_cast<NodeId>(a));
      if (unknown[a] >= 0) guess[unknown[a]] = sum[c] / count[c];
    }
    Eigen::VectorXd x = cg.solveWithGuess(rhs, guess);

    const double rhs_norm = rhs.norm();
    const double residual = rhs_norm > 0.0 ? (A * x - rhs).norm() / rhs_norm : (A * x).norm();
    report.iterations = static_cast<long>(cg.iterations());
    report.relative_residual = residual;
    if (cg.info() != Eigen::Success || !(residual <= 1e-10))
      throw NumericalError("conjugate gradient stopped after " + std::to_string(report.iterations) +
                               " iterations with relative residual " + std::to_string(residual),
                           report.iterations, residual);
    for (std::size_t a = 0; a < n; ++a)
      if (unknown[a] >= 0) values[a] = x[unknown[a]];
  }
  return {ScalarField(std::move(grid), std::move(values)), report};
}

ScalarField sample_field(std::shared_ptr<const CrackedGrid> grid, const AnalyticSource& source) {
  std::vector<double> values(grid->node_count());
  for (std::size_t a = 0; a < values.size(); ++a) values[a] = source(grid->position(static_cast<NodeId>(a)));
  return ScalarField(std::move(grid), std::move(values));
}

ScalarField rescale_field(std::shared_ptr<const CrackedGrid> grid, const AnalyticSource& source, double r) {
  if (!(r > 0.0)) throw DomainError("rescale factor must be positive");
  const double factor = 1.0 / std::sqrt(r);
  return sample_field(std::move(grid), [&](Point2 q) { return factor * source(q * r); });
}

double dirichlet_energy_in_disk(const ScalarField& field, const Disk& B) {
  const double h = field.grid().spacing();
  double total = 0.0;
  for (NodeId n : field.grid().disk_nodes(B)) total += field.gradient_density(n);
  return total * h * h;
}

double ms_energy(const ScalarField& field, const CrackSet& K, const Disk& window, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  return dirichlet_energy_in_disk(field, window) + lambda * K.clipped_length(window);
}

}  // namespace mstip
