#include "mstip/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "mstip/errors.hpp"

namespace mstip {

double point_segment_distance(Point2 q, Point2 a, Point2 b) {
  const Point2 d = b - a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(q, a);
  const double t = std::clamp(dot(q - a, d) / len2, 0.0, 1.0);
  return distance(q, a + d * t);
}

double segment_segment_distance(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double o1 = cross(b - a, c - a);
  const double o2 = cross(b - a, d - a);
  const double o3 = cross(d - c, a - c);
  const double o4 = cross(d - c, b - c);
  if (((o1 < 0 && o2 > 0) || (o1 > 0 && o2 < 0)) && ((o3 < 0 && o4 > 0) || (o3 > 0 && o4 < 0)))
    return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

Disk::Disk(Point2 c, double r) : center(c), radius(r) {
  if (!c.finite() || !(r > 0.0) || !std::isfinite(r))
    throw DomainError("disk radius must be positive and finite");
}

double segment_disk_overlap(Point2 a, Point2 b, const Disk& disk) {
  const Point2 d = b - a;
  const Point2 f = a - disk.center;
  const double A = dot(d, d);
  if (A == 0.0) return 0.0;
  const double B = 2.0 * dot(f, d);
  const double C = dot(f, f) - disk.radius * disk.radius;
  const double disc = B * B - 4.0 * A * C;
  if (disc <= 0.0) return 0.0;
  const double sq = std::sqrt(disc);
  const double t1 = std::max(0.0, (-B - sq) / (2.0 * A));
  const double t2 = std::min(1.0, (-B + sq) / (2.0 * A));
  if (t2 <= t1) return 0.0;
  return (t2 - t1) * std::sqrt(A);
}

// ---------------------------------------------------------------------------
// Polyline

Polyline::Polyline(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) throw DomainError("polyline needs at least two vertices");
  cumulative_.reserve(vertices_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!vertices_[i].finite()) throw DomainError("polyline vertex is not finite");
    if (i == 0) continue;
    const double seg = distance(vertices_[i - 1], vertices_[i]);
    if (!(seg > 0.0)) throw DomainError("polyline has a zero-length segment");
    cumulative_.push_back(cumulative_.back() + seg);
  }
}

Polyline Polyline::from_points(const std::vector<Point2>& points, double min_gap) {
  std::vector<Point2> kept;
  kept.reserve(points.size());
  for (const Point2& p : points) {
    if (kept.empty() || distance(kept.back(), p) > min_gap) kept.push_back(p);
  }
  return Polyline(std::move(kept));
}

void Polyline::check_arc(double s) const {
  const double slack = 1e-12 * std::max(1.0, length());
  if (!(s >= -slack && s <= length() + slack))
    throw DomainError("arc-length " + std::to_string(s) + " outside [0, " +
                      std::to_string(length()) + "]");
}

std::size_t Polyline::segment_at(double s) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t idx = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  return std::min(idx, segment_count() - 1);
}

Point2 Polyline::arc_point(double s) const {
  check_arc(s);
  s = std::clamp(s, 0.0, length());
  if (s == 0.0) return vertices_.front();
  const std::size_t i = segment_at(s);
  const double seg = cumulative_[i + 1] - cumulative_[i];
  const double t = std::clamp((s - cumulative_[i]) / seg, 0.0, 1.0);
  return vertices_[i] + (vertices_[i + 1] - vertices_[i]) * t;
}

double Polyline::subarc_length(double s, double t) const {
  check_arc(s);
  check_arc(t);
  if (s > t) throw DomainError("subarc requires s <= t");
  return t - s;
}

Polyline Polyline::slice(double s, double t) const {
  check_arc(s);
  check_arc(t);
  if (!(s < t)) throw DomainError("slice requires s < t");
  std::vector<Point2> pts{arc_point(s)};
  for (std::size_t i = 1; i + 1 < vertices_.size(); ++i) {
    if (cumulative_[i] > s && cumulative_[i] < t) pts.push_back(vertices_[i]);
  }
  pts.push_back(arc_point(t));
  return from_points(pts);
}

Point2 arc_point(const Polyline& p, double s) { return p.arc_point(s); }
double subarc_length(const Polyline& p, double s, double t) { return p.subarc_length(s, t); }

// ---------------------------------------------------------------------------
// CrackSet

namespace {

template <typename Fn>
void for_each_segment(std::span<const Polyline> comps, Fn&& fn) {
  for (std::size_t c = 0; c < comps.size(); ++c) {
    auto v = comps[c].vertices();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) fn(c, v[i], v[i + 1]);
  }
}

}  // namespace

CrackSet::CrackSet(std::vector<Polyline> components) : components_(std::move(components)) {
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (const auto& c : components_) {
    for (Point2 p : c.vertices()) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  if (!components_.empty()) eps_ = 1e-12 * std::max(1.0, std::hypot(xmax - xmin, ymax - ymin));

  // Components may meet only at shared endpoints, and not along a common direction.
  struct Seg {
    std::size_t comp;
    Point2 a, b;
  };
  std::vector<Seg> segs;
  for_each_segment(components_, [&](std::size_t c, Point2 a, Point2 b) { segs.push_back({c, a, b}); });
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const Seg& s = segs[i];
      const Seg& t = segs[j];
      if (s.comp == t.comp) continue;
      if (segment_segment_distance(s.a, s.b, t.a, t.b) > eps_) continue;
      bool shared = false;
      bool overlapping = false;
      for (Point2 p : {s.a, s.b}) {
        for (Point2 q : {t.a, t.b}) {
          if (mstip::distance(p, q) > eps_) continue;
          const Point2 ds = (p == s.a ? s.b : s.a) - p;
          const Point2 dt = (q == t.a ? t.b : t.a) - q;
          if (std::abs(cross(ds, dt)) <= 1e-12 * norm(ds) * norm(dt) && dot(ds, dt) > 0)
            overlapping = true;
          else
            shared = true;
        }
      }
      if (!shared || overlapping) throw DomainError("crack components cross");
    }
  }
}

double CrackSet::total_length() const {
  double total = 0.0;
  for (const auto& c : components_) total += c.length();
  return total;
}

double CrackSet::distance(Point2 q) const {
  if (components_.empty()) throw DomainError("distance to an empty crack set");
  double best = std::numeric_limits<double>::infinity();
  for_each_segment(components_, [&](std::size_t, Point2 a, Point2 b) {
    best = std::min(best, point_segment_distance(q, a, b));
  });
  return best;
}

Point2 CrackSet::nearest_point(Point2 q) const {
  if (components_.empty()) throw DomainError("nearest point of an empty crack set");
  double best = std::numeric_limits<double>::infinity();
  Point2 out;
  for_each_segment(components_, [&](std::size_t, Point2 a, Point2 b) {
    const Point2 d = b - a;
    const double t = std::clamp(dot(q - a, d) / dot(d, d), 0.0, 1.0);
    const Point2 p = a + d * t;
    const double dd = mstip::distance(q, p);
    if (dd < best) {
      best = dd;
      out = p;
    }
  });
  return out;
}

bool CrackSet::crosses(Point2 a, Point2 b) const {
  bool hit = false;
  for_each_segment(components_, [&](std::size_t, Point2 c, Point2 d) {
    if (!hit && segment_segment_distance(a, b, c, d) <= eps_) hit = true;
  });
  return hit;
}

double CrackSet::clipped_length(const Disk& disk) const {
  double total = 0.0;
  for_each_segment(components_, [&](std::size_t, Point2 a, Point2 b) { total += segment_disk_overlap(a, b, disk); });
  return total;
}

double dist_to_crack(Point2 q, const CrackSet& K) { return K.distance(q); }
bool segment_crosses(Point2 a, Point2 b, const CrackSet& K) { return K.crosses(a, b); }

}  // namespace mstip
