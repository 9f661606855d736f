#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's numerical code beyond plain data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "mstip/geometry.hpp"

namespace oracle {

using mstip::Point2;

inline double cracktip(double x, double y) {
  const double r = std::hypot(x, y);
  if (r == 0.0) return 0.0;
  return std::sqrt(2.0 * r / std::numbers::pi) * std::sin(0.5 * std::atan2(y, x));
}

// Midpoint rule in polar coordinates around the origin over B_r.
inline double polar_integral(double r, const std::function<double(double, double)>& f, int nr = 400, int nt = 800) {
  double sum = 0.0;
  const double dr = r / nr;
  const double dt = 2.0 * std::numbers::pi / nt;
  for (int i = 0; i < nr; ++i) {
    const double rho = (i + 0.5) * dr;
    for (int k = 0; k < nt; ++k) {
      const double t = -std::numbers::pi + (k + 0.5) * dt;
      sum += f(rho, t) * rho * dr * dt;
    }
  }
  return sum;
}

// |grad u|^2 of the cracktip by central differences in polar coordinates.
inline double cracktip_grad2(double rho, double t) {
  const double e = 1e-6;
  auto u = [](double p, double a) { return std::sqrt(2.0 * p / std::numbers::pi) * std::sin(0.5 * a); };
  const double ur = (u(rho + e * rho, t) - u(rho - e * rho, t)) / (2.0 * e * rho);
  const double ut = (u(rho, t + e) - u(rho, t - e)) / (2.0 * e);
  return ur * ur + (ut / rho) * (ut / rho);
}

// Distance from q to [a, b] by ternary search on the parameter.
inline double segment_distance(Point2 q, Point2 a, Point2 b) {
  auto f = [&](double t) { return std::hypot(a.x + t * (b.x - a.x) - q.x, a.y + t * (b.y - a.y) - q.y); };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2))
      hi = m2;
    else
      lo = m1;
  }
  return std::min({f(0.5 * (lo + hi)), f(0.0), f(1.0)});
}

// Point at arc-length s along a vertex list, by walking the segments.
inline Point2 walk(const std::vector<Point2>& v, double s) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double len = std::hypot(v[i + 1].x - v[i].x, v[i + 1].y - v[i].y);
    if (s <= len || i + 2 == v.size()) {
      const double t = std::min(1.0, s / len);
      return {v[i].x + t * (v[i + 1].x - v[i].x), v[i].y + t * (v[i + 1].y - v[i].y)};
    }
    s -= len;
  }
  return v.back();
}

inline double total_length(const std::vector<Point2>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) s += std::hypot(v[i + 1].x - v[i].x, v[i + 1].y - v[i].y);
  return s;
}

// min over s in (0, L] of |q - core(s)| - s/J by a dense scan.
inline double carrot_margin_scan(const std::vector<Point2>& v, double J, Point2 q, int samples = 200000) {
  const double L = total_length(v);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= samples; ++k) {
    const double s = L * k / samples;
    const Point2 p = walk(v, s);
    best = std::min(best, std::hypot(q.x - p.x, q.y - p.y) - s / J);
  }
  return best;
}

// Cell-centred lattice points (i + 1/2, j + 1/2) h strictly inside B(c, R),
// on a lattice anchored at `origin`.
inline int lattice_count(Point2 origin, double h, Point2 c, double R) {
  int count = 0;
  const int n = static_cast<int>(std::ceil((R + std::hypot(c.x - origin.x, c.y - origin.y)) / h)) + 2;
  for (int j = -n; j <= n; ++j)
    for (int i = -n; i <= n; ++i) {
      const double x = origin.x + (i + 0.5) * h, y = origin.y + (j + 0.5) * h;
      if (std::hypot(x - c.x, y - c.y) < R) ++count;
    }
  return count;
}

struct DisjointSets {
  std::vector<int> p;
  explicit DisjointSets(int n) : p(n) {
    for (int i = 0; i < n; ++i) p[i] = i;
  }
  int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
  int count() {
    int c = 0;
    for (int i = 0; i < static_cast<int>(p.size()); ++i) c += find(i) == i;
    return c;
  }
};

}  // namespace oracle
