#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mstip {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2() = default;
  constexpr Point2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Point2 operator+(Point2 o) const { return {x + o.x, y + o.y}; }
  constexpr Point2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
  constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Point2 operator/(double s) const { return {x / s, y / s}; }
  constexpr bool operator==(const Point2&) const = default;

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

// Euclidean distance from q to the closed segment [a, b].
double point_segment_distance(Point2 q, Point2 a, Point2 b);

// Distance between the closed segments [a, b] and [c, d].
double segment_segment_distance(Point2 a, Point2 b, Point2 c, Point2 d);

struct Disk {
  Point2 center;
  double radius = 1.0;

  Disk() = default;
  Disk(Point2 c, double r);

  // Open-disk membership.
  bool contains(Point2 q) const { return distance(q, center) < radius; }
  double diameter() const { return 2.0 * radius; }
};

// Length of [a, b] inside the disk.
double segment_disk_overlap(Point2 a, Point2 b, const Disk& disk);

// Arc-length parametrized polyline. Cumulative lengths are computed once at
// construction so arc queries are O(log #vertices).
class Polyline {
 public:
  explicit Polyline(std::vector<Point2> vertices);

  // Builds a polyline after dropping consecutive vertices closer than
  // `min_gap`; throws if fewer than two distinct vertices remain.
  static Polyline from_points(const std::vector<Point2>& points, double min_gap = 1e-14);

  std::span<const Point2> vertices() const { return vertices_; }
  std::span<const double> cumulative() const { return cumulative_; }
  std::size_t segment_count() const { return vertices_.size() - 1; }
  double length() const { return cumulative_.back(); }
  Point2 front() const { return vertices_.front(); }
  Point2 back() const { return vertices_.back(); }

  // Index of the segment containing arc-length s (the last one for s = length).
  std::size_t segment_at(double s) const;

  Point2 arc_point(double s) const;
  double subarc_length(double s, double t) const;

  // The polyline restricted to arc-lengths [s, t], s < t.
  Polyline slice(double s, double t) const;

 private:
  void check_arc(double s) const;

  std::vector<Point2> vertices_;
  std::vector<double> cumulative_;
};

Point2 arc_point(const Polyline& p, double s);
double subarc_length(const Polyline& p, double s, double t);

// Union of polylines standing for the closed jump set K. Components may share
// endpoints but must not cross.
class CrackSet {
 public:
  CrackSet() = default;
  explicit CrackSet(std::vector<Polyline> components);

  std::span<const Polyline> components() const { return components_; }
  bool empty() const { return components_.empty(); }
  double total_length() const;

  // Collinearity / touching tolerance, 1e-12 times the scene diameter.
  double tolerance() const { return eps_; }

  double distance(Point2 q) const;
  bool contains(Point2 q) const { return distance(q) <= eps_; }
  bool crosses(Point2 a, Point2 b) const;
  double clipped_length(const Disk& disk) const;

  // Nearest point of K to q (K must be nonempty).
  Point2 nearest_point(Point2 q) const;

 private:
  std::vector<Polyline> components_;
  double eps_ = 1e-12;
};

double dist_to_crack(Point2 q, const CrackSet& K);
bool segment_crosses(Point2 a, Point2 b, const CrackSet& K);

}  // namespace mstip
