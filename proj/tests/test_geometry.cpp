#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>

#include "mstip/errors.hpp"
#include "mstip/geometry.hpp"
#include "oracles.hpp"

using namespace mstip;

namespace {

Polyline unit_segment() { return Polyline({{0, 0}, {1, 0}}); }
Polyline l_shape() { return Polyline({{0, 0}, {1, 0}, {1, 1}}); }
CrackSet left_ray() { return CrackSet({Polyline({{-1, 0}, {0, 0}})}); }

}  // namespace

TEST_CASE("arc_point on segments and corners") {
  const Point2 mid = arc_point(unit_segment(), 0.5);
  CHECK(mid.x == doctest::Approx(0.5));
  CHECK(mid.y == 0.0);
  CHECK(arc_point(l_shape(), 0.0) == Point2{0, 0});

  const Point2 q = arc_point(l_shape(), 1.5);
  const Point2 o = oracle::walk({{0, 0}, {1, 0}, {1, 1}}, 1.5);
  CHECK(q.x == doctest::Approx(o.x));
  CHECK(q.y == doctest::Approx(o.y));
  CHECK(q.x == doctest::Approx(1.0));
  CHECK(q.y == doctest::Approx(0.5));

  CHECK_THROWS_AS(arc_point(unit_segment(), -0.1), DomainError);
  CHECK_THROWS_AS(arc_point(unit_segment(), 1.1), DomainError);
}

TEST_CASE("subarc lengths") {
  CHECK(subarc_length(unit_segment(), 0.0, 1.0) == 1.0);
  CHECK(subarc_length(l_shape(), 0.7, 0.7) == 0.0);
  CHECK(subarc_length(l_shape(), 0.5, 1.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(subarc_length(l_shape(), 1.5, 0.5), DomainError);
  CHECK_THROWS_AS(subarc_length(l_shape(), 0.0, 2.5), DomainError);
}

TEST_CASE("polyline invariants") {
  CHECK_THROWS_AS(Polyline({{0, 0}}), DomainError);
  CHECK_THROWS_AS(Polyline({{0, 0}, {0, 0}, {1, 0}}), DomainError);
  const std::vector<Point2> v{{0, 0}, {0.3, 0.4}, {1.3, 0.4}, {1.3, -2}};
  const Polyline p(v);
  CHECK(p.length() == doctest::Approx(oracle::total_length(v)).epsilon(1e-15));
  const auto cum = p.cumulative();
  for (std::size_t i = 1; i < cum.size(); ++i) CHECK(cum[i] > cum[i - 1]);

  const Polyline dedup = Polyline::from_points({{0, 0}, {0, 0}, {1, 0}, {1, 1e-20}, {1, 1}});
  CHECK(dedup.vertices().size() == 3);
}

TEST_CASE("subarc additivity on random triples") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point2> v{{0, 0}};
    for (int k = 0; k < 6; ++k) v.push_back(v.back() + Point2{u(rng) + 1.5, u(rng)});
    const Polyline p(v);
    // Dyadic arc-lengths: differences are exact in floating point, so the
    // identity must hold bit for bit.
    const auto ticks = static_cast<std::uint64_t>(std::floor(p.length() * 1048576.0));
    std::uniform_int_distribution<std::uint64_t> pick(0, ticks);
    for (int k = 0; k < 20; ++k) {
      std::uint64_t t[3] = {pick(rng), pick(rng), pick(rng)};
      std::sort(t, t + 3);
      const double a = t[0] / 1048576.0, b = t[1] / 1048576.0, c = t[2] / 1048576.0;
      CHECK(p.subarc_length(a, c) == p.subarc_length(a, b) + p.subarc_length(b, c));
    }
    for (int k = 0; k < 20; ++k) {
      double t[3] = {std::abs(u(rng)) * p.length(), std::abs(u(rng)) * p.length(), std::abs(u(rng)) * p.length()};
      std::sort(t, t + 3);
      const double lhs = p.subarc_length(t[0], t[2]);
      const double rhs = p.subarc_length(t[0], t[1]) + p.subarc_length(t[1], t[2]);
      CHECK(std::abs(lhs - rhs) <= 4.0 * std::numeric_limits<double>::epsilon() * p.length());
    }
  }
}

TEST_CASE("slice keeps the parametrization") {
  const Polyline p = l_shape();
  const Polyline s = p.slice(0.5, 1.5);
  CHECK(s.length() == doctest::Approx(1.0));
  CHECK(s.front().x == doctest::Approx(0.5));
  CHECK(s.back().y == doctest::Approx(0.5));
}

TEST_CASE("distance to a crack") {
  const CrackSet K = left_ray();
  CHECK(dist_to_crack({0, 1}, K) == doctest::Approx(1.0));
  CHECK(dist_to_crack({-0.5, 0}, K) == 0.0);
  CHECK(dist_to_crack({1, 1}, K) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(dist_to_crack({0, 0}, CrackSet{}), DomainError);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const Point2 q{u(rng), u(rng)};
    CHECK(dist_to_crack(q, K) == doctest::Approx(oracle::segment_distance(q, {-1, 0}, {0, 0})).epsilon(1e-9));
  }
}

TEST_CASE("distance to a crack is 1-Lipschitz") {
  const CrackSet K({Polyline({{-1, 0}, {0, 0}, {0.3, 0.5}}), Polyline({{0.5, -0.5}, {0.9, -0.2}})});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 2000; ++k) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    CHECK(std::abs(K.distance(a) - K.distance(b)) <= distance(a, b) * (1.0 + 1e-12) + 1e-15);
  }
}

TEST_CASE("segment crossing predicate") {
  const CrackSet right({Polyline({{0, 0}, {1, 0}})});
  CHECK(segment_crosses({0.5, -0.1}, {0.5, 0.1}, right));
  CHECK_FALSE(segment_crosses({2, 0}, {3, 0}, right));
  CHECK(segment_crosses({-0.5, -0.1}, {0.5, 0.1}, left_ray()));
  // Touching at an endpoint counts as crossing.
  CHECK(segment_crosses({0.5, 0}, {0.5, 1}, right));
  CHECK_FALSE(segment_crosses({0.5, 1e-6}, {0.5, 1}, right));
}

TEST_CASE("segment crossing is symmetric") {
  const CrackSet K({Polyline({{-1, 0}, {0, 0}}), Polyline({{0.2, 0.2}, {0.6, -0.4}, {0.9, 0.1}})});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int k = 0; k < 2000; ++k) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    CHECK(segment_crosses(a, b, K) == segment_crosses(b, a, K));
  }
}

TEST_CASE("crack sets reject crossing components") {
  CHECK_THROWS_AS(CrackSet({Polyline({{-1, 0}, {1, 0}}), Polyline({{0, -1}, {0, 1}})}), DomainError);
  // Shared endpoints are allowed (spider).
  CHECK_NOTHROW(CrackSet({Polyline({{0, 0}, {0, 1}}), Polyline({{0, 0}, {1, -1}}), Polyline({{0, 0}, {-1, -1}})}));
  const CrackSet two({Polyline({{0, 0}, {0, 1}}), Polyline({{0, 0}, {2, 0}})});
  CHECK(two.total_length() == doctest::Approx(3.0));
}

TEST_CASE("clipped crack length") {
  const CrackSet K = left_ray();
  CHECK(K.clipped_length(Disk({0, 0}, 0.3)) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(K.clipped_length(Disk({-0.5, 0}, 0.25)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(K.clipped_length(Disk({0, 2}, 0.5)) == 0.0);
  CHECK(K.clipped_length(Disk({0, 0.1}, 0.2)) == doctest::Approx(std::sqrt(0.04 - 0.01)).epsilon(1e-14));
}

TEST_CASE("disk validation") {
  CHECK_THROWS_AS(Disk({0, 0}, 0.0), DomainError);
  CHECK_THROWS_AS(Disk({0, 0}, -1.0), DomainError);
  CHECK(Disk({0, 0}, 1).contains({0.5, 0.5}));
  CHECK_FALSE(Disk({0, 0}, 1).contains({1, 0}));
}
