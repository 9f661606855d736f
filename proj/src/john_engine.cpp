#include "mstip/john_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <string>

#include "mstip/errors.hpp"

namespace mstip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameter t in [0, 1] of the point of [a, b] closest to [c, d].
double closest_param(Point2 a, Point2 b, Point2 c, Point2 d) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return 0.0;
  const Point2 cd = d - c;
  const double denom = cross(ab, cd);
  if (denom != 0.0) {
    const double t = cross(c - a, cd) / denom;
    const double u = cross(c - a, ab) / denom;
    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return t;
  }
  double best_t = 0.0;
  double best = kInf;
  auto consider = [&](double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double dd = point_segment_distance(a + ab * t, c, d);
    if (dd < best) {
      best = dd;
      best_t = t;
    }
  };
  consider(0.0);
  consider(1.0);
  consider(dot(c - a, ab) / len2);
  consider(dot(d - a, ab) / len2);
  return best_t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Carrots

Carrot::Carrot(Polyline c, double j) : core(std::move(c)), J(j) {
  if (!(J >= 1.0) || !std::isfinite(J)) throw DomainError("carrot constant J must be finite and >= 1");
}

CarrotMargin carrot_margin(const Carrot& c, Point2 q) {
  const auto v = c.core.vertices();
  const auto cum = c.core.cumulative();
  const double J = c.J;
  const double slope = J > 1.0 ? 1.0 / std::sqrt(J * J - 1.0) : kInf;
  CarrotMargin best{0.0, kInf};
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double s0 = cum[i];
    const double s1 = cum[i + 1];
    const Point2 dir = (v[i + 1] - v[i]) / (s1 - s0);
    const Point2 rel = q - v[i];
    const double foot = s0 + dot(rel, dir);
    const double perp = std::abs(cross(dir, rel));
    auto eval = [&](double s) {
      const double f = std::hypot(s - foot, perp) - s / J;
      if (f < best.margin) best = {s, f};
    };
    eval(s0);
    eval(s1);
    // f(s) = sqrt((s - foot)^2 + perp^2) - s/J is convex on the segment with
    // its stationary point at foot + perp / sqrt(J^2 - 1).
    if (std::isfinite(slope)) eval(std::clamp(foot + perp * slope, s0, s1));
  }
  return best;
}

bool carrot_contains(const Carrot& c, Point2 q) {
  const CarrotMargin m = carrot_margin(c, q);
  return m.s > 0.0 && m.margin < 0.0;
}

Polyline reroute_through_carrot(const Carrot& c, Point2 z) {
  const CarrotMargin m = carrot_margin(c, z);
  if (!(m.s > 0.0 && m.margin < 0.0)) throw DomainError("point is not inside the carrot");
  const Point2 eta = c.core.arc_point(m.s);
  std::vector<Point2> pts{z, eta};
  const auto v = c.core.vertices();
  const auto cum = c.core.cumulative();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (cum[i] > m.s) pts.push_back(v[i]);
  return Polyline::from_points(pts);
}

// ---------------------------------------------------------------------------
// John curves

double JohnObstacles::distance(Point2 q) const {
  double d = kInf;
  if (crack && !crack->empty()) d = crack->distance(q);
  if (outer) d = std::min(d, outer->radius - mstip::distance(q, outer->center));
  return d;
}

JohnCheck verify_john_curve(const Polyline& core, const JohnObstacles& obstacles, double J, double h) {
  if (!(h > 0.0)) throw DomainError("sampling step must be positive");
  const auto v = core.vertices();
  const auto cum = core.cumulative();
  const double step = 0.5 * h;

  std::vector<double> samples;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double seg = cum[i + 1] - cum[i];
    const int pieces = std::max(1, static_cast<int>(std::ceil(seg / step)));
    for (int k = 0; k < pieces; ++k) samples.push_back(cum[i] + seg * k / pieces);
    // Closest approaches to the crack segments are sampled exactly.
    if (obstacles.crack) {
      for (const Polyline& comp : obstacles.crack->components()) {
        const auto w = comp.vertices();
        for (std::size_t k = 0; k + 1 < w.size(); ++k)
          samples.push_back(cum[i] + seg * closest_param(v[i], v[i + 1], w[k], w[k + 1]));
      }
    }
  }
  samples.push_back(core.length());
  std::sort(samples.begin(), samples.end());

  JohnCheck out;
  const double tol = obstacles.crack ? obstacles.crack->tolerance() : 1e-12;
  for (double s : samples) {
    const Point2 y = core.arc_point(s);
    const double d = obstacles.distance(y);
    if (d <= tol) {
      if (!out.witness) out.witness = y;
      out.ok = false;
      out.worst_ratio = kInf;
      out.worst_arc = s;
      continue;
    }
    const double ratio = s / d;
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_arc = s;
    }
  }
  if (out.worst_ratio > J * (1.0 + 1e-12)) out.ok = false;
  return out;
}

JohnCheck verify_john_curve(Point2 x, const JohnObstacles& obstacles, double /*J*/) {
  JohnCheck out;
  if (obstacles.distance(x) <= 0.0) {
    out.ok = false;
    out.witness = x;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Escaping curves

namespace {

struct SearchWorkspace {
  std::vector<double> len;
  std::vector<NodeId> parent;
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;

  void prepare(std::size_t n) {
    if (stamp.size() != n) {
      len.assign(n, kInf);
      parent.assign(n, -1);
      stamp.assign(n, 0);
      epoch = 0;
    }
    if (++epoch == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      epoch = 1;
    }
  }
  double length(NodeId n) const { return stamp[n] == epoch ? len[n] : kInf; }
  void set(NodeId n, double l, NodeId p) {
    stamp[n] = epoch;
    len[n] = l;
    parent[n] = p;
  }
};

struct Start {
  NodeId node;
  double length;
};

// Any-angle Dijkstra by travelled length: a node may link straight back to its
// predecessor's parent (or to x) when that segment misses K. Nodes are
// admissible only while length <= J * clearance. Returns the first settled
// node outside `escape`.
std::optional<NodeId> constrained_search(const CrackedGrid& grid, Point2 x, const std::vector<Start>& starts,
                                         double J, const Disk& escape, SearchWorkspace& ws) {
  ws.prepare(grid.node_count());
  const CrackSet& K = grid.crack();
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  auto admissible = [&](NodeId n, double l) { return l <= J * grid.clearance(n) * (1.0 + 1e-12); };
  for (const Start& s : starts) {
    if (!admissible(s.node, s.length) || s.length >= ws.length(s.node)) continue;
    ws.set(s.node, s.length, -1);
    heap.emplace(s.length, s.node);
  }
  const double h = grid.spacing();
  while (!heap.empty()) {
    const auto [l, a] = heap.top();
    heap.pop();
    if (l > ws.length(a)) continue;
    if (!escape.contains(grid.position(a))) return a;
    const NodeId pa = ws.parent[a];
    const Point2 anchor = pa >= 0 ? grid.position(pa) : x;
    const double anchor_len = pa >= 0 ? ws.length(pa) : 0.0;
    for (NodeId b : grid.neighbors(a)) {
      const Point2 pb = grid.position(b);
      double nl = anchor_len + distance(anchor, pb);
      NodeId parent = pa;
      if (nl >= ws.length(b) || K.crosses(anchor, pb)) {
        nl = l + h;
        parent = a;
      }
      if (nl < ws.length(b) && admissible(b, nl)) {
        ws.set(b, nl, parent);
        heap.emplace(nl, b);
      }
    }
  }
  return std::nullopt;
}

std::vector<Start> start_nodes(const CrackedGrid& grid, Point2 x) {
  const double h = grid.spacing();
  const CrackSet& K = grid.crack();
  std::vector<Start> out;
  for (NodeId n : grid.nearest_nodes(x)) {
    if (distance(grid.position(n), x) <= 1e-12 * h) return {{n, 0.0}};
  }
  for (double reach : {1.5 * h, 2.5 * h}) {
    for (NodeId n : grid.disk_nodes(Disk(x, reach))) {
      const Point2 p = grid.position(n);
      if (!K.empty() && K.crosses(x, p)) continue;
      out.push_back({n, distance(x, p)});
    }
    if (!out.empty()) break;
  }
  return out;
}

// Greedy shortcutting: from each kept vertex jump to the farthest later path
// vertex reachable by a straight segment that avoids K, stays in the grid disk
// and keeps travelled length <= J * dist(., K).
std::vector<Point2> shortcut(const CrackedGrid& grid, const std::vector<Point2>& pts, double J) {
  const CrackSet& K = grid.crack();
  const Disk& dom = grid.domain();
  const double step = 0.5 * grid.spacing();
  auto segment_ok = [&](Point2 a, Point2 b, double l0) {
    if (!K.empty() && K.crosses(a, b)) return false;
    const double len = distance(a, b);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 1; k <= pieces; ++k) {
      const double t = static_cast<double>(k) / pieces;
      const Point2 p = a + (b - a) * t;
      if (!dom.contains(p)) return false;
      if (std::isfinite(J) && !K.empty() && l0 + t * len > J * K.distance(p) * (1.0 + 1e-12)) return false;
    }
    return true;
  };
  std::vector<Point2> out{pts.front()};
  double travelled = 0.0;
  std::size_t i = 0;
  while (i + 1 < pts.size()) {
    std::size_t j = i + 1;
    while (j + 1 < pts.size() && segment_ok(pts[i], pts[j + 1], travelled)) ++j;
    travelled += distance(pts[i], pts[j]);
    out.push_back(pts[j]);
    i = j;
  }
  return out;
}

struct GridPath {
  std::vector<Point2> points;
  double search_constant;
};

GridPath search_path(const CrackedGrid& grid, Point2 x, const Disk& escape, double J_target) {
  thread_local SearchWorkspace ws;
  const auto starts = start_nodes(grid, x);
  if (starts.empty()) throw EnclosureError("no grid node reachable from the start point");

  std::optional<NodeId> target;
  double J = 1.0;
  if (!(target = constrained_search(grid, x, starts, 1.0, escape, ws))) {
    if (constrained_search(grid, x, starts, J_target, escape, ws)) {
      double lo = 1.0;
      double hi = J_target;
      while (hi / lo > 1.02) {
        const double mid = std::sqrt(lo * hi);
        if (constrained_search(grid, x, starts, mid, escape, ws))
          hi = mid;
        else
          lo = mid;
      }
      J = hi;
    } else {
      J = kInf;
    }
    target = constrained_search(grid, x, starts, J, escape, ws);
    if (!target) throw EnclosureError("start point is enclosed by the crack set");
  }

  std::vector<Point2> pts;
  for (NodeId n = *target; n >= 0; n = ws.parent[n]) pts.push_back(grid.position(n));
  pts.push_back(x);
  std::reverse(pts.begin(), pts.end());
  std::vector<Point2> dedup;
  for (Point2 p : pts)
    if (dedup.empty() || distance(dedup.back(), p) > 1e-12 * grid.spacing()) dedup.push_back(p);
  return {shortcut(grid, dedup, J), J};
}

}  // namespace

EscapingCurve find_escaping_curve(const CrackedGrid& grid, Point2 x, const Disk& escape, double J_target) {
  const CrackSet& K = grid.crack();
  if (!(J_target >= 1.0)) throw DomainError("J_target must be >= 1");
  if (!grid.domain().contains(x)) throw DomainError("start point outside the grid disk");
  if (!escape.contains(x)) throw DomainError("start point already outside the escape disk");

  if (K.empty()) {
    Point2 dir = x == escape.center ? grid.domain().center - x : x - escape.center;
    if (norm(dir) == 0.0) dir = {1.0, 0.0};
    dir = dir / norm(dir);
    const Point2 f = x - escape.center;
    const double b = dot(f, dir);
    const double t = -b + std::sqrt(b * b - dot(f, f) + escape.radius * escape.radius);
    Polyline ray({x, x + dir * t});
    JohnObstacles outer{nullptr, grid.domain()};
    return {ray, verify_john_curve(ray, outer, kInf, grid.spacing()).worst_ratio, 1.0};
  }
  if (K.contains(x)) throw DomainError("start point lies on the crack");

  GridPath path = search_path(grid, x, escape, J_target);
  Polyline curve = Polyline::from_points(path.points, 1e-12 * grid.spacing());
  const JohnObstacles obstacles{&K, std::nullopt};
  const double achieved = verify_john_curve(curve, obstacles, kInf, grid.spacing()).worst_ratio;
  return {std::move(curve), achieved, path.search_constant};
}

EscapingCurve find_escaping_curve(const CrackedGrid& grid, Point2 x, double r, double J_target) {
  return find_escaping_curve(grid, x, Disk(x, r), J_target);
}

// ---------------------------------------------------------------------------
// Besicovitch selection

BesicovitchSelection besicovitch_select(std::span<const Point2> centers, std::span<const double> radii) {
  if (centers.size() != radii.size()) throw DomainError("centres and radii differ in length");
  BesicovitchSelection out;
  if (centers.empty()) return out;

  std::vector<std::size_t> order(centers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radii[a] > radii[b]; });
  for (std::size_t i : order) {
    bool covered = false;
    for (std::size_t s : out.selected) {
      if (distance(centers[i], centers[s]) <= radii[s] * (1.0 + 1e-12)) {
        covered = true;
        break;
      }
    }
    if (!covered) out.selected.push_back(i);
  }

  double xmin = kInf, ymin = kInf, xmax = -kInf, ymax = -kInf, rmin = kInf;
  for (std::size_t s : out.selected) {
    xmin = std::min(xmin, centers[s].x - radii[s]);
    xmax = std::max(xmax, centers[s].x + radii[s]);
    ymin = std::min(ymin, centers[s].y - radii[s]);
    ymax = std::max(ymax, centers[s].y + radii[s]);
    rmin = std::min(rmin, radii[s]);
  }
  const double span = std::max(xmax - xmin, ymax - ymin);
  const int per_axis = std::clamp(static_cast<int>(std::ceil(span / (0.25 * rmin))), 1, 400);
  auto count_at = [&](Point2 p) {
    int c = 0;
    for (std::size_t s : out.selected)
      if (distance(p, centers[s]) <= radii[s]) ++c;
    return c;
  };
  for (int j = 0; j <= per_axis; ++j)
    for (int i = 0; i <= per_axis; ++i)
      out.multiplicity = std::max(out.multiplicity, count_at({xmin + (xmax - xmin) * i / per_axis,
                                                              ymin + (ymax - ymin) * j / per_axis}));
  for (Point2 c : centers) out.multiplicity = std::max(out.multiplicity, count_at(c));
  return out;
}

// ---------------------------------------------------------------------------
// Boman chains

namespace {

// Largest disk inside the lens U ∩ V, centred on the line of centres.
std::optional<Disk> lens_witness(const Disk& U, const Disk& V) {
  const double d = distance(U.center, V.center);
  Point2 e{1.0, 0.0};
  if (d > 0.0) e = (V.center - U.center) / d;
  const double t1 = std::max(d - V.radius, -U.radius);
  const double t2 = std::min(U.radius, d + V.radius);
  if (!(t2 > t1)) return std::nullopt;
  return Disk(U.center + e * (0.5 * (t1 + t2)), 0.5 * (t2 - t1));
}

double dilation_needed(const Disk& R, const Disk& U) {
  return (distance(R.center, U.center) + U.radius) / R.radius;
}

int chain_multiplicity(const std::vector<Disk>& balls) {
  int best = 0;
  for (const Disk& b : balls) {
    std::vector<Point2> probes{b.center};
    for (int k = 0; k < 6; ++k) {
      const double a = k * std::numbers::pi / 3.0;
      probes.push_back(b.center + Point2{std::cos(a), std::sin(a)} * (0.6 * b.radius));
    }
    for (Point2 p : probes) {
      int c = 0;
      for (const Disk& u : balls)
        if (distance(p, u.center) <= u.radius) ++c;
      best = std::max(best, c);
    }
  }
  return best;
}

}  // namespace

Disk canonical_base_ball(const Polyline& core, double J) { return Disk(core.back(), core.length() / (4.0 * J)); }

BomanChain carrot_to_boman(const Polyline& core, double J, const Disk& base, double h) {
  if (!(J >= 1.0) || !std::isfinite(J)) throw DomainError("Boman chain needs a finite J >= 1");
  if (!(h > 0.0)) throw DomainError("truncation scale must be positive");
  BomanChain chain;
  chain.balls.push_back(base);
  const double L = core.length();
  if (L >= h) {
    const double q = 1.0 - 1.0 / (4.0 * J);
    for (double s = L * q; s / (4.0 * J) >= h; s *= q) {
      chain.balls.emplace_back(core.arc_point(s), s / (4.0 * J));
      if (chain.balls.size() > 100000) throw DomainError("Boman chain does not terminate");
    }
  }

  double M = 1.0;
  for (std::size_t i = 0; i + 1 < chain.balls.size(); ++i) {
    const Disk& U = chain.balls[i];
    const Disk& V = chain.balls[i + 1];
    M = std::max({M, U.radius / V.radius, V.radius / U.radius});
    auto R = lens_witness(U, V);
    chain.witnesses.push_back(R);
    if (!R) {
      M = kInf;
      continue;
    }
    M = std::max({M, dilation_needed(*R, U), dilation_needed(*R, V)});
  }
  chain.M = std::max(M, static_cast<double>(chain_multiplicity(chain.balls)));
  return chain;
}

BomanAudit audit_boman(const BomanChain& chain, const Disk& base, double M) {
  BomanAudit a;
  const double slack = 1.0 + 1e-9;
  a.base_ok = !chain.balls.empty() && distance(chain.balls.front().center, base.center) <= 1e-12 * base.radius &&
              std::abs(chain.balls.front().radius - base.radius) <= 1e-12 * base.radius;
  a.ratio_ok = true;
  a.overlap_ok = chain.witnesses.size() + 1 == chain.balls.size();
  for (std::size_t i = 0; i + 1 < chain.balls.size(); ++i) {
    const Disk& U = chain.balls[i];
    const Disk& V = chain.balls[i + 1];
    const double ratio = std::max(U.radius / V.radius, V.radius / U.radius);
    a.diameter_ratio = std::max(a.diameter_ratio, ratio);
    if (ratio > M * slack) a.ratio_ok = false;
    if (i >= chain.witnesses.size() || !chain.witnesses[i]) {
      a.overlap_ok = false;
      continue;
    }
    const Disk& R = *chain.witnesses[i];
    const bool inside = distance(R.center, U.center) + R.radius <= U.radius * slack &&
                        distance(R.center, V.center) + R.radius <= V.radius * slack;
    const double dil = std::max(dilation_needed(R, U), dilation_needed(R, V));
    a.dilation = std::max(a.dilation, dil);
    if (!inside || dil > M * slack) a.overlap_ok = false;
  }
  a.multiplicity = chain_multiplicity(chain.balls);
  a.multiplicity_ok = a.multiplicity <= M * slack;
  return a;
}

std::pair<BomanChain, BomanChain> boman_pair(const Polyline& core_x, double J_x, const Polyline& core_y,
                                            double J_y, double h, double* J_used) {
  if (distance(core_x.back(), core_y.back()) > 1e-9 * std::max(core_x.length(), core_y.length()))
    throw DomainError("paired cores must end at the same point");
  const double lx = core_x.length();
  const double ly = core_y.length();
  const double lmin = std::min(lx, ly);
  const double J = std::max({1.0, J_x, J_y, std::max(lx, ly) / (2.0 * lmin)});
  if (J_used) *J_used = J;
  const Disk base(core_x.back(), lmin / (4.0 * J));
  return {carrot_to_boman(core_x, J, base, h), carrot_to_boman(core_y, J, base, h)};
}

// ---------------------------------------------------------------------------
// Decomposition

bool DecompositionCertificate::all_ok() const {
  return uncovered.empty() && covered == nodes && beta_john_ok == nodes && boman_ok == nodes &&
         multiplicity <= 20 && max_extent <= 2.0 * C3;
}

const NodeCurve* Decomposition::curve_for(NodeId n) const {
  auto it = std::lower_bound(curves.begin(), curves.end(), n,
                             [](const NodeCurve& c, NodeId id) { return c.node < id; });
  return it != curves.end() && it->node == n ? &*it : nullptr;
}

bool Decomposition::contains(std::size_t j, Point2 q) const {
  if (j >= domains.size()) return false;
  const JohnSubdomain& W = domains[j];
  for (std::size_t m : W.members) {
    if (distance(grid->position(curves[m].node), q) <= 1e-12) return true;
  }
  if (carrot_contains(Carrot(W.base_core, certificate.J), q)) return true;
  for (std::size_t m : W.members) {
    if (curves[m].beta && carrot_contains(Carrot(*curves[m].beta, certificate.J_prime), q)) return true;
  }
  return false;
}

namespace {

// First point where the curve reaches the circle |p| = radius, and the arc-length there.
std::pair<double, Point2> first_exit(const Polyline& curve, double radius) {
  const auto v = curve.vertices();
  const auto cum = curve.cumulative();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (norm(v[i + 1]) < radius) continue;
    const Point2 d = v[i + 1] - v[i];
    const double A = dot(d, d);
    const double B = 2.0 * dot(v[i], d);
    const double C = dot(v[i], v[i]) - radius * radius;
    double t = (-B + std::sqrt(std::max(0.0, B * B - 4.0 * A * C))) / (2.0 * A);
    if (C >= 0.0) t = 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return {cum[i] + t * (cum[i + 1] - cum[i]), v[i] + d * t};
  }
  throw DomainError("escaping curve never reaches the exit circle");
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Decomposition decompose(std::shared_ptr<const CrackedGrid> grid, double r, const DecomposeOptions& opts) {
  const CrackedGrid& g = *grid;
  const CrackSet& K = g.crack();
  const double h = g.spacing();
  if (K.empty() || !K.contains({0.0, 0.0})) throw DomainError("decomposition requires 0 in K");
  if (!(r > 0.0) || 4.5 * r + h >= g.domain().radius - norm(g.domain().center))
    throw ConfigError("B_{4.5r} must lie inside the grid disk");
  if (!(r >= 2.0 * h)) throw ResolutionError("r must be at least 2h");

  Decomposition dec;
  dec.r = r;
  dec.h = h;
  dec.grid = grid;
  auto& cert = dec.certificate;
  const JohnObstacles obstacles{&K, std::nullopt};
  const Disk exit_disk({0.0, 0.0}, 3.0 * r);

  // Escaping curves and exit balls.
  const auto nodes = g.disk_nodes(Disk({0.0, 0.0}, r));
  cert.nodes = nodes.size();
  for (NodeId n : nodes) {
    const Point2 x = g.position(n);
    try {
      EscapingCurve esc = find_escaping_curve(g, x, exit_disk, opts.J_target);
      const auto [s_exit, x_r] = first_exit(esc.curve, 3.0 * r);
      Polyline gamma = s_exit >= esc.curve.length() ? esc.curve : esc.curve.slice(0.0, s_exit);
      NodeCurve nc{n, std::move(gamma), x_r, 0.0, 0.0, -1, 0, std::nullopt, 0.0};
      nc.john = verify_john_curve(nc.gamma, obstacles, kInf, h).worst_ratio;
      nc.exit_ball_radius = 0.5 * K.distance(x_r);
      dec.curves.push_back(std::move(nc));
    } catch (const EnclosureError&) {
      cert.uncovered.push_back(n);
    }
  }
  if (dec.curves.empty()) return dec;

  cert.J = 1.0;
  cert.min_exit_length = kInf;
  cert.min_ball_ratio = kInf;
  for (const NodeCurve& c : dec.curves) {
    cert.J = std::max(cert.J, c.john);
    cert.min_exit_length = std::min(cert.min_exit_length, c.gamma.length() / r);
    cert.min_ball_ratio = std::min(cert.min_ball_ratio, c.exit_ball_radius / r);
    cert.max_ball_ratio = std::max(cert.max_ball_ratio, c.exit_ball_radius / r);
  }

  // Besicovitch selection over the exit balls.
  std::vector<Point2> centers;
  std::vector<double> radii;
  for (const NodeCurve& c : dec.curves) {
    centers.push_back(c.exit);
    radii.push_back(c.exit_ball_radius);
  }
  const BesicovitchSelection sel = besicovitch_select(centers, radii);
  cert.multiplicity = sel.multiplicity;
  for (std::size_t i : sel.selected) dec.selected.emplace_back(centers[i], radii[i]);

  // Components of the union of selected closed balls.
  const std::size_t nb = dec.selected.size();
  UnionFind uf(nb);
  for (std::size_t a = 0; a < nb; ++a)
    for (std::size_t b = a + 1; b < nb; ++b)
      if (distance(dec.selected[a].center, dec.selected[b].center) <=
          dec.selected[a].radius + dec.selected[b].radius)
        uf.unite(a, b);

  // V_{j,r}: the group of the first selected ball covering x_r. Groups are
  // numbered by their smallest member node.
  std::vector<int> root_group(nb, -1);
  dec.selected_group.assign(nb, -1);
  for (std::size_t m = 0; m < dec.curves.size(); ++m) {
    NodeCurve& c = dec.curves[m];
    std::size_t cover = nb;
    for (std::size_t b = 0; b < nb; ++b) {
      if (distance(c.exit, dec.selected[b].center) <= dec.selected[b].radius * (1.0 + 1e-12)) {
        cover = b;
        break;
      }
    }
    if (cover == nb) throw DomainError("Besicovitch selection left an exit point uncovered");
    c.covering_ball = cover;
    const std::size_t root = uf.find(cover);
    if (root_group[root] < 0) {
      root_group[root] = static_cast<int>(dec.domains.size());
      JohnSubdomain W{{}, {}, m, c.exit, c.gamma};
      dec.domains.push_back(std::move(W));
    }
    c.group = root_group[root];
    dec.domains[c.group].members.push_back(m);
  }
  for (std::size_t b = 0; b < nb; ++b) {
    const int grp = root_group[uf.find(b)];
    dec.selected_group[b] = grp;
    if (grp >= 0) dec.domains[grp].balls.push_back(b);
  }
  cert.N = static_cast<int>(dec.domains.size());
  for (const auto& W : dec.domains) cert.N_hat = std::max(cert.N_hat, static_cast<int>(W.balls.size()));

  // beta_x = gamma_x[x, x_r] + x_r -> centre(D_2) -> ... -> centre(D_1) -> y_r,
  // through a shortest path in the intersection graph of the group's balls.
  double max_len = 0.0;
  for (auto& W : dec.domains) {
    const std::size_t d1 = dec.curves[W.base_member].covering_ball;
    std::vector<double> dist(nb, kInf);
    std::vector<std::size_t> parent(nb, nb);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[d1] = 0.0;
    heap.emplace(0.0, d1);
    while (!heap.empty()) {
      const auto [dd, a] = heap.top();
      heap.pop();
      if (dd > dist[a]) continue;
      for (std::size_t b : W.balls) {
        const double w = distance(dec.selected[a].center, dec.selected[b].center);
        if (b == a || w > dec.selected[a].radius + dec.selected[b].radius) continue;
        if (dd + w < dist[b]) {
          dist[b] = dd + w;
          parent[b] = a;
          heap.emplace(dist[b], b);
        }
      }
    }
    for (std::size_t m : W.members) {
      NodeCurve& c = dec.curves[m];
      std::vector<Point2> pts(c.gamma.vertices().begin(), c.gamma.vertices().end());
      for (std::size_t b = c.covering_ball; b != nb; b = parent[b]) {
        pts.push_back(dec.selected[b].center);
        if (b == d1) break;
      }
      pts.push_back(W.base_point);
      c.beta = Polyline::from_points(pts, 1e-12 * r);
      max_len = std::max(max_len, c.beta->length());
    }
  }
  cert.C3 = std::max(4.0, max_len / r);
  cert.J_prime = cert.C3 * cert.J;

  // Certificates: John property of every beta at J', containment in
  // B_{2 C3 r}, Boman chains along every beta.
  std::vector<BomanChain> chains;
  std::vector<Disk> bases;
  for (NodeCurve& c : dec.curves) {
    if (!c.beta) continue;
    const JohnCheck jc = verify_john_curve(*c.beta, obstacles, cert.J_prime, h);
    c.beta_john = jc.worst_ratio;
    if (jc.ok) ++cert.beta_john_ok;
    const auto v = c.beta->vertices();
    const auto cum = c.beta->cumulative();
    for (std::size_t i = 0; i < v.size(); ++i)
      cert.max_extent = std::max(cert.max_extent, (norm(v[i]) + cum[i] / cert.J_prime) / r);
    const double Jb = std::max(1.0, std::isfinite(c.beta_john) ? c.beta_john : cert.J_prime);
    bases.push_back(canonical_base_ball(*c.beta, Jb));
    chains.push_back(carrot_to_boman(*c.beta, Jb, bases.back(), h));
    cert.M = std::max(cert.M, chains.back().M);
  }
  for (std::size_t i = 0; i < chains.size(); ++i)
    if (audit_boman(chains[i], bases[i], cert.M).all()) ++cert.boman_ok;

  for (const NodeCurve& c : dec.curves)
    if (c.group >= 0 && c.beta && dec.contains(static_cast<std::size_t>(c.group), g.position(c.node)))
      ++cert.covered;
  return dec;
}

}  // namespace mstip
