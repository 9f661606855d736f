#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mstip/geometry.hpp"

namespace mstip {

using NodeId = std::int32_t;

// Uniform cell-centred grid on a disk with edges severed where they cross K.
// Node positions are center + ((i + 1/2) h, (j + 1/2) h), so a crack lying on
// a lattice line through the disk center falls between two rows of nodes.
// A severed edge carries no flux, which is the discrete two-sided zero
// Neumann condition on the crack.
class CrackedGrid {
 public:
  CrackedGrid(const Disk& domain, CrackSet crack, double h);

  const Disk& domain() const { return domain_; }
  const CrackSet& crack() const { return crack_; }
  double spacing() const { return h_; }

  std::size_t node_count() const { return pos_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const std::pair<NodeId, NodeId>> edges() const { return edges_; }

  Point2 position(NodeId n) const { return pos_[n]; }
  std::pair<int, int> lattice(NodeId n) const { return lattice_[n]; }
  // +inf when K is empty.
  double clearance(NodeId n) const { return clearance_[n]; }
  // True when a 4-neighbour lattice site lies outside the disk.
  bool is_boundary(NodeId n) const { return boundary_[n] != 0; }
  int component(NodeId n) const { return component_[n]; }
  int component_count() const { return n_components_; }

  std::span<const NodeId> neighbors(NodeId n) const {
    return {adj_.data() + adj_start_[n], adj_.data() + adj_start_[n + 1]};
  }

  std::optional<NodeId> node_at(int i, int j) const;
  Point2 lattice_point(int i, int j) const;

  // Nodes whose centre lies in the open disk B, in increasing id order.
  std::vector<NodeId> disk_nodes(const Disk& B) const;

  // Node(s) closest to q; equidistant ties (within 1e-9 h) are all returned.
  std::vector<NodeId> nearest_nodes(Point2 q) const;

 private:
  Disk domain_;
  CrackSet crack_;
  double h_;
  int i0_ = 0, j0_ = 0, ni_ = 0, nj_ = 0;
  std::vector<NodeId> index_;  // lattice -> node, -1 if absent
  std::vector<Point2> pos_;
  std::vector<std::pair<int, int>> lattice_;
  std::vector<double> clearance_;
  std::vector<char> boundary_;
  std::vector<int> component_;
  int n_components_ = 0;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::vector<std::size_t> adj_start_;
  std::vector<NodeId> adj_;
};

std::shared_ptr<const CrackedGrid> build_cracked_grid(const Disk& domain, const CrackSet& K, double h);
std::vector<NodeId> disk_nodes(const CrackedGrid& grid, const Disk& B);

// Real values on the nodes of a grid: the discrete u.
class ScalarField {
 public:
  ScalarField(std::shared_ptr<const CrackedGrid> grid, std::vector<double> values);

  const CrackedGrid& grid() const { return *grid_; }
  const std::shared_ptr<const CrackedGrid>& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](NodeId n) const { return values_[n]; }

  // Gradient-squared density at a node: half the sum of squared difference
  // quotients over incident edges. Missing edges (crack or rim) contribute
  // zero, so sum(density * h^2) over all nodes equals sum over edges of
  // (u_a - u_b)^2.
  double gradient_density(NodeId n) const;

 private:
  std::shared_ptr<const CrackedGrid> grid_;
  std::vector<double> values_;
};

}  // namespace mstip
