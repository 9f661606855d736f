#include "mstip/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <iterator>
#include <random>
#include <string>

#include "mstip/errors.hpp"
#include "mstip/harmonic_solver.hpp"

namespace mstip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_inside(const CrackedGrid& grid, const Disk& B, const char* what) {
  const Disk& D = grid.domain();
  if (distance(B.center, D.center) + B.radius > D.radius * (1.0 + 1e-12))
    throw DomainError(std::string(what) + " leaves the grid disk");
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double slope = (n * sxy - sx * sy) / det;
  return {slope, (sy - slope * sx) / n};
}

double node_mean(const ScalarField& f, std::span<const NodeId> nodes) {
  double s = 0.0;
  for (NodeId n : nodes) s += f[n];
  return s / static_cast<double>(nodes.size());
}

double density_mean(const ScalarField& f, std::span<const NodeId> nodes) {
  double s = 0.0;
  for (NodeId n : nodes) s += f.gradient_density(n);
  return s / static_cast<double>(nodes.size());
}

std::vector<NodeId> union_nodes(const CrackedGrid& g, const Disk& A, const Disk& B) {
  auto a = g.disk_nodes(A);
  auto b = g.disk_nodes(B);
  std::vector<NodeId> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

PhiValue phi(const ScalarField& field, Point2 x, double r) {
  const CrackedGrid& g = field.grid();
  if (!(r > 0.0)) throw DomainError("phi radius must be positive");
  const Disk B(x, r);
  require_inside(g, B, "phi disk");
  const auto nodes = g.disk_nodes(B);
  if (nodes.size() < 10)
    throw ResolutionError("only " + std::to_string(nodes.size()) + " nodes in B_r; phi needs at least 10");

  PhiValue out;
  const double h = g.spacing();
  double energy = 0.0;
  for (NodeId n : nodes) energy += field.gradient_density(n);
  out.numerator = energy * h * h / r;

  const double mean = node_mean(field, nodes);
  double var = 0.0;
  for (NodeId n : nodes) var += (field[n] - mean) * (field[n] - mean);
  out.denominator = var / static_cast<double>(nodes.size());

  const double floor = 1e-24 * std::max(1.0, mean * mean);
  if (out.denominator <= floor) {
    if (out.numerator <= floor) {
      out.degenerate = true;
      out.phi = 0.0;
    } else {
      out.phi = kInf;
    }
  } else {
    out.phi = out.numerator / out.denominator;
  }
  return out;
}

PhiProfile phi_profile(const ScalarField& field, Point2 x, std::span<const double> radii) {
  if (radii.empty()) throw DomainError("phi profile needs at least one radius");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1])) throw DomainError("phi profile radii must be strictly decreasing");
  if (radii.back() < 8.0 * field.grid().spacing())
    throw ResolutionError("smallest phi radius is below 8h");
  PhiProfile out{x, {}};
  for (double r : radii) {
    const PhiValue v = phi(field, x, r);
    out.samples.push_back({r, v.numerator, v.denominator, v.phi});
  }
  return out;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Tip:
      return "Tip";
    case Verdict::Jump:
      return "Jump";
    default:
      return "Inconclusive";
  }
}

Classification classify(const PhiProfile& profile, double tau_jump, double tau_tip) {
  const auto& s = profile.samples;
  if (s.size() < 3) throw DomainError("classification needs at least 3 radii");
  Classification c;
  for (const auto& p : s) c.max_phi = std::max(c.max_phi, p.phi);

  const std::size_t k = s.size() - 3;
  std::vector<double> inv_r, ph;
  bool finite = true;
  for (std::size_t i = k; i < s.size(); ++i) {
    inv_r.push_back(1.0 / s[i].r);
    ph.push_back(s[i].phi);
    finite = finite && std::isfinite(s[i].phi);
  }
  c.increasing = ph[0] < ph[1] && ph[1] < ph[2];
  if (finite) {
    const LineFit fit = least_squares(inv_r, ph);
    c.slope = fit.slope;
    c.intercept = fit.intercept;
  }
  if (finite && c.slope >= tau_tip && c.increasing)
    c.verdict = Verdict::Tip;
  else if (c.max_phi <= tau_jump)
    c.verdict = Verdict::Jump;
  return c;
}

AhlforsTable ahlfors_audit(const CrackSet& K, const ScalarField& field, Point2 x, std::span<const double> radii,
                           double C_audit) {
  if (K.empty() || !K.contains(x)) throw DomainError("Ahlfors audit centre is not on the crack");
  if (!(C_audit >= 1.0)) throw DomainError("C_audit must be >= 1");
  AhlforsTable t;
  t.C = C_audit;
  t.all_ok = true;
  for (double r : radii) {
    if (!(r > 0.0)) throw DomainError("Ahlfors radius must be positive");
    const Disk B(x, r);
    require_inside(field.grid(), B, "Ahlfors disk");
    AhlforsRow row;
    row.r = r;
    row.length_ratio = K.clipped_length(B) / r;
    row.energy_ratio = dirichlet_energy_in_disk(field, B) / r;
    row.ok = row.length_ratio >= 1.0 / C_audit && row.length_ratio <= C_audit && row.energy_ratio <= C_audit;
    t.all_ok = t.all_ok && row.ok;
    t.rows.push_back(row);
  }
  return t;
}

GrowthFit growth_exponent(const ScalarField& field, Point2 x0, std::span<const double> radii) {
  if (radii.size() < 3) throw DomainError("growth fit needs at least 3 radii");
  const CrackedGrid& g = field.grid();
  GrowthFit out;
  // Equidistant nearest nodes are averaged: at a tip on a lattice line the
  // four surrounding nodes tie and straddle the crack.
  const auto nearest = g.nearest_nodes(x0);
  out.center_value = node_mean(field, nearest);
  const auto local = g.disk_nodes(Disk(x0, 4.0 * g.spacing()));
  out.center_mean = local.empty() ? out.center_value : node_mean(field, local);
  out.center_difference = std::abs(out.center_mean - out.center_value);

  std::vector<double> lr, ls;
  for (double r : radii) {
    if (!(r > 0.0)) throw DomainError("growth radius must be positive");
    const Disk B(x0, r);
    require_inside(g, B, "growth disk");
    double sup = 0.0;
    for (NodeId n : g.disk_nodes(B)) sup = std::max(sup, std::abs(field[n] - out.center_value));
    out.rows.push_back({r, sup});
    if (sup <= 0.0) out.degenerate = true;
    lr.push_back(std::log(r));
    ls.push_back(std::log(sup));
  }
  if (out.degenerate) {
    out.slope = out.intercept = std::numeric_limits<double>::quiet_NaN();
  } else {
    const LineFit fit = least_squares(lr, ls);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
  }
  return out;
}

ChainEstimate chain_estimate(const ScalarField& field, const BomanChain& from_x, const BomanChain& from_y,
                             double C_P) {
  const CrackedGrid& g = field.grid();
  if (from_x.balls.empty() || from_y.balls.empty()) throw DomainError("empty Boman chain");
  const Disk& b0 = from_x.balls.front();
  const Disk& c0 = from_y.balls.front();
  if (distance(b0.center, c0.center) > 1e-12 * b0.radius || std::abs(b0.radius - c0.radius) > 1e-12 * b0.radius)
    throw DomainError("chains do not share their base ball");

  ChainEstimate out;
  auto run = [&](const BomanChain& chain, std::vector<double>& terms) {
    for (const Disk& U : chain.balls) {
      require_inside(g, U, "chain ball");
      if (g.disk_nodes(U).empty()) throw ResolutionError("chain ball contains no grid node");
    }
    for (std::size_t k = 0; k + 1 < chain.balls.size(); ++k) {
      const Disk& U = chain.balls[k];
      const Disk& V = chain.balls[k + 1];
      const auto nodes = union_nodes(g, U, V);
      terms.push_back(std::max(U.diameter(), V.diameter()) * std::sqrt(density_mean(field, nodes)));
    }
  };
  run(from_x, out.terms_x);
  run(from_y, out.terms_y);
  double sum = 0.0;
  for (double t : out.terms_x) sum += t;
  for (double t : out.terms_y) sum += t;
  out.bound = C_P * sum;
  out.direct = std::abs(node_mean(field, g.disk_nodes(from_x.balls.back())) -
                        node_mean(field, g.disk_nodes(from_y.balls.back())));
  return out;
}

double calibrate_poincare(double h, std::uint64_t seed, int fields) {
  if (!(h > 0.0)) throw DomainError("calibration spacing must be positive");
  if (fields < 1) throw DomainError("calibration needs at least one field");
  const double R = 40.0 * h;
  auto grid = build_cracked_grid(Disk({0.0, 0.0}, R), CrackSet{}, h);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };
  auto random_point = [&](double reach) {
    const double rad = reach * std::sqrt(unit(rng));
    const double ang = uniform(0.0, 2.0 * std::numbers::pi);
    return Point2{rad * std::cos(ang), rad * std::sin(ang)};
  };

  double best = 0.0;
  for (int f = 0; f < fields; ++f) {
    const double a = uniform(-1.0, 1.0);
    const double b = uniform(-1.0, 1.0);
    struct Wave {
      Point2 k;
      double phase;
      double amp;
    };
    std::vector<Wave> waves;
    for (int w = 0; w < 3; ++w) {
      const double freq = uniform(0.5, 3.0) / (10.0 * h);
      const double dir = uniform(0.0, 2.0 * std::numbers::pi);
      waves.push_back({{freq * std::cos(dir), freq * std::sin(dir)}, uniform(0.0, 2.0 * std::numbers::pi),
                       uniform(-1.0, 1.0) * 10.0 * h});
    }
    const ScalarField u = sample_field(grid, [&](Point2 p) {
      double v = a * p.x + b * p.y;
      for (const Wave& w : waves) v += w.amp * std::sin(dot(w.k, p) + w.phase);
      return v;
    });

    for (int t = 0; t < 20; ++t) {
      const double rho = uniform(2.0, 10.0) * h;
      const Disk A(random_point(R - 3.0 * rho), rho);
      const auto nodes = grid->disk_nodes(A);
      const double m = node_mean(u, nodes);
      double osc = 0.0;
      for (NodeId n : nodes) osc += std::abs(u[n] - m);
      osc /= static_cast<double>(nodes.size());
      const double dens = density_mean(u, nodes);
      if (dens > 0.0) best = std::max(best, osc / (A.diameter() * std::sqrt(dens)));

      const double rho2 = rho * uniform(7.0 / 8.0, 8.0 / 7.0);
      const double ang = uniform(0.0, 2.0 * std::numbers::pi);
      const Disk B(A.center + Point2{std::cos(ang), std::sin(ang)} * (rho * uniform(0.5, 1.0)), rho2);
      const auto both = union_nodes(*grid, A, B);
      const double step = std::abs(m - node_mean(u, grid->disk_nodes(B)));
      const double dens2 = density_mean(u, both);
      if (dens2 > 0.0) best = std::max(best, step / (std::max(A.diameter(), B.diameter()) * std::sqrt(dens2)));
    }
  }
  return best;
}

}  // namespace mstip
