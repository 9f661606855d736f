#include "mstip/cracked_grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "mstip/errors.hpp"

namespace mstip {

CrackedGrid::CrackedGrid(const Disk& domain, CrackSet crack, double h)
    : domain_(domain), crack_(std::move(crack)), h_(h) {
  if (!(h > 0.0) || !(h <= domain.radius / 4.0))
    throw ConfigError("grid spacing " + std::to_string(h) + " must lie in (0, radius/4]");

  const double R = domain_.radius;
  i0_ = static_cast<int>(std::floor(-R / h - 0.5)) - 1;
  j0_ = i0_;
  ni_ = static_cast<int>(std::ceil(R / h)) + 2 - i0_;
  nj_ = ni_;
  index_.assign(static_cast<std::size_t>(ni_) * nj_, -1);

  const bool has_crack = !crack_.empty();
  for (int j = j0_; j < j0_ + nj_; ++j) {
    for (int i = i0_; i < i0_ + ni_; ++i) {
      const Point2 p = lattice_point(i, j);
      if (!(distance(p, domain_.center) < R)) continue;
      double c = std::numeric_limits<double>::infinity();
      if (has_crack) {
        c = crack_.distance(p);
        if (c <= crack_.tolerance()) continue;
      }
      index_[static_cast<std::size_t>(j - j0_) * ni_ + (i - i0_)] = static_cast<NodeId>(pos_.size());
      pos_.push_back(p);
      lattice_.emplace_back(i, j);
      clearance_.push_back(c);
    }
  }

  const std::size_t n = pos_.size();
  boundary_.assign(n, 0);
  std::vector<std::vector<NodeId>> adj(n);
  constexpr int di[4] = {1, -1, 0, 0};
  constexpr int dj[4] = {0, 0, 1, -1};
  for (std::size_t a = 0; a < n; ++a) {
    const auto [i, j] = lattice_[a];
    for (int k = 0; k < 4; ++k) {
      if (!(distance(lattice_point(i + di[k], j + dj[k]), domain_.center) < R)) boundary_[a] = 1;
    }
    // Only the +x and +y neighbours, so each edge is visited once.
    for (int k : {0, 2}) {
      auto b = node_at(i + di[k], j + dj[k]);
      if (!b) continue;
      // An edge of length h can only reach K if an endpoint is within h of it.
      const bool near = std::min(clearance_[a], clearance_[*b]) <= h + crack_.tolerance();
      if (near && crack_.crosses(pos_[a], pos_[*b])) continue;
      edges_.emplace_back(static_cast<NodeId>(a), *b);
      adj[a].push_back(*b);
      adj[*b].push_back(static_cast<NodeId>(a));
    }
  }

  adj_start_.assign(n + 1, 0);
  for (std::size_t a = 0; a < n; ++a) adj_start_[a + 1] = adj_start_[a] + adj[a].size();
  adj_.reserve(adj_start_[n]);
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    adj_.insert(adj_.end(), list.begin(), list.end());
  }

  component_.assign(n, -1);
  std::deque<NodeId> queue;
  for (std::size_t s = 0; s < n; ++s) {
    if (component_[s] >= 0) continue;
    component_[s] = n_components_;
    queue.push_back(static_cast<NodeId>(s));
    while (!queue.empty()) {
      const NodeId a = queue.front();
      queue.pop_front();
      for (NodeId b : neighbors(a)) {
        if (component_[b] < 0) {
          component_[b] = n_components_;
          queue.push_back(b);
        }
      }
    }
    ++n_components_;
  }
}

Point2 CrackedGrid::lattice_point(int i, int j) const {
  return {domain_.center.x + (i + 0.5) * h_, domain_.center.y + (j + 0.5) * h_};
}

std::optional<NodeId> CrackedGrid::node_at(int i, int j) const {
  if (i < i0_ || j < j0_ || i >= i0_ + ni_ || j >= j0_ + nj_) return std::nullopt;
  const NodeId id = index_[static_cast<std::size_t>(j - j0_) * ni_ + (i - i0_)];
  if (id < 0) return std::nullopt;
  return id;
}

std::vector<NodeId> CrackedGrid::disk_nodes(const Disk& B) const {
  std::vector<NodeId> out;
  const int ilo = static_cast<int>(std::floor((B.center.x - B.radius - domain_.center.x) / h_ - 0.5)) - 1;
  const int ihi = static_cast<int>(std::ceil((B.center.x + B.radius - domain_.center.x) / h_ - 0.5)) + 1;
  const int jlo = static_cast<int>(std::floor((B.center.y - B.radius - domain_.center.y) / h_ - 0.5)) - 1;
  const int jhi = static_cast<int>(std::ceil((B.center.y + B.radius - domain_.center.y) / h_ - 0.5)) + 1;
  for (int j = std::max(jlo, j0_); j <= std::min(jhi, j0_ + nj_ - 1); ++j) {
    for (int i = std::max(ilo, i0_); i <= std::min(ihi, i0_ + ni_ - 1); ++i) {
      auto id = node_at(i, j);
      if (id && B.contains(pos_[*id])) out.push_back(*id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> CrackedGrid::nearest_nodes(Point2 q) const {
  std::vector<NodeId> candidates;
  const int ic = static_cast<int>(std::lround((q.x - domain_.center.x) / h_ - 0.5));
  const int jc = static_cast<int>(std::lround((q.y - domain_.center.y) / h_ - 0.5));
  for (int j = jc - 2; j <= jc + 2; ++j)
    for (int i = ic - 2; i <= ic + 2; ++i)
      if (auto id = node_at(i, j)) candidates.push_back(*id);
  if (candidates.empty()) {
    candidates.resize(pos_.size());
    for (std::size_t a = 0; a < pos_.size(); ++a) candidates[a] = static_cast<NodeId>(a);
  }
  double best = std::numeric_limits<double>::infinity();
  for (NodeId a : candidates) best = std::min(best, distance(pos_[a], q));
  std::vector<NodeId> out;
  for (NodeId a : candidates)
    if (distance(pos_[a], q) <= best + 1e-9 * h_) out.push_back(a);
  std::sort(out.begin(), out.end());
  return out;
}

std::shared_ptr<const CrackedGrid> build_cracked_grid(const Disk& domain, const CrackSet& K, double h) {
  return std::make_shared<const CrackedGrid>(domain, K, h);
}

std::vector<NodeId> disk_nodes(const CrackedGrid& grid, const Disk& B) { return grid.disk_nodes(B); }

// ---------------------------------------------------------------------------

ScalarField::ScalarField(std::shared_ptr<const CrackedGrid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw DomainError("scalar field without a grid");
  if (values_.size() != grid_->node_count()) throw DomainError("scalar field needs one value per node");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("scalar field value is not finite");
}

double ScalarField::gradient_density(NodeId n) const {
  const double h = grid_->spacing();
  double sum = 0.0;
  for (NodeId m : grid_->neighbors(n)) {
    const double d = (values_[m] - values_[n]) / h;
    sum += d * d;
  }
  return 0.5 * sum;
}

}  // namespace mstip
