#include "projgnep/normal_op.hpp"

#include <algorithm>

namespace projgnep {

namespace {

constexpr double kPolarTol = 1e-9;
constexpr std::size_t kMaxScanGenerators = 64;

int resolution_for(Eigen::Index d, const SolverConfig& cfg) {
  if (cfg.angular_resolution > 0) return d == 3 ? std::min(cfg.angular_resolution, 512) : cfg.angular_resolution;
  return d == 3 ? 512 : 6284;
}

/// Fixed generators of the unit sphere for full-space factors.
std::vector<Vec> full_space_generators(Eigen::Index d) { return sphere_directions<double>(d, 8); }

bool polar_ok(const std::vector<Vec>& samples, const Vec& xi, const Vec& d) {
  for (const auto& z : samples)
    if (d.dot(z - xi) > kPolarTol) return false;
  return true;
}

/// Keeps at most `cap` directions, evenly spaced in scan order, always keeping
/// the first and last.
std::vector<Vec> thin(std::vector<Vec> dirs, std::size_t cap) {
  if (dirs.size() <= cap) return dirs;
  std::vector<Vec> out;
  for (std::size_t k = 0; k < cap; ++k) out.push_back(dirs[k * (dirs.size() - 1) / (cap - 1)]);
  return out;
}

}  // namespace

std::vector<Vec> preferred_samples(const GameInstance& G, int i, const Vec& x, const SolverConfig& cfg) {
  const GraphDistanceContext ctx = G.graph_context(i, cfg);
  const Eigen::Index n = G.joint_dim(), d = G.dim(i);
  const ConvexSetd region = ConvexSetd::box(ctx.region.lower.segment(n, d), ctx.region.upper.segment(n, d));
  return sample_preferred(G.preference(i), x, region, std::max(1, cfg.random_budget), cfg.seed);
}

ConeSample normal_operator(const GameInstance& G, int i, const Vec& x, const SolverConfig& cfg) {
  require_dim(G.joint_dim(), x.size(), "normal_operator");
  const PreferenceMap& P = G.preference(i);
  const Eigen::Index d = G.dim(i);
  const Vec xi = G.block(x, i);
  ConeSample out;
  out.ambient_dim = static_cast<int>(d);

  const auto samples = preferred_samples(G, i, x, cfg);
  out.preferred_samples = static_cast<int>(samples.size());
  if (samples.empty()) {
    out.is_full_space = true;
    out.directions = full_space_generators(d);
    return out;
  }

  std::optional<Vec> shortcut;
  if (P.is_direction()) {
    const Vec c = P.direction_at(x);
    if (c.norm() > 0) shortcut = -c / c.norm();
  } else if (P.is_utility()) {
    const Vec g = P.own_gradient(x);
    if (g.norm() > 1e-12) shortcut = -g / g.norm();
  }
  if (shortcut && polar_ok(samples, xi, *shortcut)) {
    out.directions.push_back(*shortcut);
    return out;
  }

  const auto scan = scan_separators<double>(std::span<const Vec>(samples), xi, resolution_for(d, cfg));
  if (scan.qualifying.empty()) {
    out.degenerate = true;
    return out;
  }
  out.directions = thin(scan.qualifying, kMaxScanGenerators);
  return out;
}

TValue t_map(const GameInstance& G, const Vec& x, const SolverConfig& cfg) {
  TValue T;
  T.x = x;
  for (int i = 0; i < G.players(); ++i) T.factors.push_back(normal_operator(G, i, x, cfg));
  return T;
}

bool factor_contains(const ConeSample& f, const Vec& v, double tol) {
  require_dim(f.ambient_dim, v.size(), "factor_contains");
  if (f.is_full_space) return v.norm() <= 1 + tol;
  return in_hull(std::span<const Vec>(f.directions), v, tol);
}

bool t_contains(const GameInstance& G, const TValue& T, const Vec& y_star, double tol) {
  require_dim(G.joint_dim(), y_star.size(), "t_contains");
  for (int i = 0; i < G.players(); ++i)
    if (!factor_contains(T.factors[static_cast<std::size_t>(i)], G.block(y_star, i), tol)) return false;
  return true;
}

UnitNormalReport unit_normal_diagnostic(const GameInstance& G, int i, const Vec& x, const Vec& x_star, const SolverConfig& cfg) {
  require_dim(G.dim(i), x_star.size(), "unit_normal_diagnostic");
  if (std::abs(x_star.norm() - 1) > 1e-9) throw InputError("unit_normal_diagnostic: x_star must be a unit vector");
  const Vec xi = G.block(x, i);
  UnitNormalReport rep;
  const auto samples = preferred_samples(G, i, x, cfg);
  rep.samples = static_cast<int>(samples.size());
  for (const auto& z : samples)
    if (x_star.dot(z - xi) >= 0) rep.witnesses.push_back(z);
  rep.clean = rep.witnesses.empty();
  return rep;
}

}  // namespace projgnep
