#pragma once

// Strict-preference maps P_i, their convex-hull view, and the distance g_i to
// the complement of the preference graph.

#include "projgnep/geometry.hpp"
#include "projgnep/polynomial.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace projgnep {

/// P_i(x) = { z : u(x_{-i}, z) > u(x) + delta }
struct UtilityInduced {
  Polynomial utility;
  double delta = 0;
};

/// P_i(x) = { z : <c(x), z - x_i> > delta } with c(x) = slope * x + intercept.
/// c(x) = 0 gives the empty set.
struct DirectionField {
  Mat slope;
  Vec intercept;
  double delta = 0;
};

/// Membership table over a regular grid of the graph space (x, z) in
/// R^{n + n_i}: cell k along axis a sits at origin[a] + k * step.
struct SampledTable {
  Vec origin;
  double step = 1;
  std::vector<int> counts;
  std::vector<std::uint8_t> preferred;  // row-major over counts, last axis fastest

  std::size_t cell_count() const;
  /// Flat index of an on-grid point, nullopt when off the grid.
  std::optional<std::size_t> locate(const Vec& w) const;
  Vec point(std::size_t flat) const;
};

/// Closed sublevel set { w : w^T A w + b^T w + c <= 0 } with an exact
/// point-to-set distance through the Lagrange (secular) equation.
class QuadricSublevel {
 public:
  explicit QuadricSublevel(Polynomial::QuadraticForm form);

  double value(const Vec& w) const { return w.dot(A_ * w) + b_.dot(w) + c_; }
  /// Euclidean distance from q to the set; +inf when the set is empty.
  double distance(const Vec& q) const;

 private:
  Mat A_;
  Vec b_;
  double c_;
  Mat V_;
  Vec lambda_;
  Vec bt_;
};

class PreferenceMap {
 public:
  using Variant = std::variant<UtilityInduced, DirectionField, SampledTable>;

  static PreferenceMap utility(int player, int own_offset, int own_dim, Polynomial u, double delta = 0);
  static PreferenceMap direction(int player, int own_offset, int own_dim, int joint_dim, Mat slope, Vec intercept,
                                 double delta = 0);
  static PreferenceMap sampled(int player, int own_offset, int own_dim, int joint_dim, SampledTable table);

  int player() const { return player_; }
  int own_offset() const { return own_offset_; }
  int own_dim() const { return own_dim_; }
  int joint_dim() const { return joint_dim_; }
  const Variant& variant() const { return v_; }
  bool is_utility() const { return std::holds_alternative<UtilityInduced>(v_); }
  bool is_direction() const { return std::holds_alternative<DirectionField>(v_); }
  bool is_sampled() const { return std::holds_alternative<SampledTable>(v_); }

  Vec own(const Vec& x) const { return x.segment(own_offset_, own_dim_); }
  /// x with its own block replaced by z.
  Vec with_own(const Vec& x, const Vec& z) const;

  /// Preference gap over the graph space w = (x, z): z in P(x) iff gap > 0.
  /// Not available for sampled tables.
  const Polynomial& gap_polynomial() const;
  double gap(const Vec& x, const Vec& z) const;

  /// c(x) for direction fields.
  Vec direction_at(const Vec& x) const;
  /// Gradient of u(x_{-i}, .) at x_i for utilities.
  Vec own_gradient(const Vec& x) const;

  /// Every P(x) is an open half-space or empty, so co(P(x)) = P(x).
  bool halfspace_valued() const { return halfspace_valued_; }
  /// Exact complement-distance route is available (gap of degree <= 2).
  const std::optional<QuadricSublevel>& complement_quadric() const { return quadric_; }

 private:
  PreferenceMap(int player, int own_offset, int own_dim, int joint_dim, Variant v);
  void finish();

  int player_;
  int own_offset_;
  int own_dim_;
  int joint_dim_;
  Variant v_;
  std::optional<Polynomial> gap_;
  std::vector<Polynomial> own_grad_;
  bool halfspace_valued_ = false;
  std::optional<QuadricSublevel> quadric_;
};

/// Region of the graph space (x, z) in which g_i is evaluated, plus the grid
/// resolution of the grid route.
struct GraphDistanceContext {
  Box<double> region;
  double grid_h = 0.01;
  bool force_grid = false;  // bypass the closed-form route
};

bool preferred(const PreferenceMap& P, const Vec& x, const Vec& z);

/// Up to `budget` points of P(x) inside `region`, found on a grid plus seeded
/// uniform samples. An empty result means "none found at this resolution".
std::vector<Vec> sample_preferred(const PreferenceMap& P, const Vec& x, const ConvexSetd& region, int budget,
                                  std::uint64_t seed = 0);

/// z in co(P(x)): exact for half-space-valued maps, hull of samples otherwise.
bool hull_preferred(const PreferenceMap& P, const Vec& x, const Vec& z, int sample_budget, const ConvexSetd& region,
                    std::uint64_t seed = 0);

/// g_i(y, z) = d((y, z), complement of the preference graph), capped by the
/// distance to the boundary of ctx.region. Zero whenever z is not in P(y).
/// Sampled tables use half the gap between the nearest non-preferred and the
/// nearest preferred cell, which accepts off-grid queries.
double graph_distance(const PreferenceMap& P, const GraphDistanceContext& ctx, const Vec& y, const Vec& z);

}  // namespace projgnep
