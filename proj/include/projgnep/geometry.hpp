#pragma once

// Closed convex sets in R^d: projection, probing, polar/normal cone tests and
// a sphere-scan separator. Header-only; everything is templated on the scalar.

#include "projgnep/errors.hpp"
#include "projgnep/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace projgnep {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = Vector<double>;
using Mat = Matrix<double>;

template <typename Scalar>
struct Box {
  Vector<Scalar> lower;
  Vector<Scalar> upper;
};

template <typename Scalar>
struct Ball {
  Vector<Scalar> center;
  Scalar radius;
};

/// { x : <normal, x> <= offset }
template <typename Scalar>
struct Halfspace {
  Vector<Scalar> normal;
  Scalar offset;
};

template <typename Scalar>
struct HalfspacePolytope {
  std::vector<Halfspace<Scalar>> rows;
  Vector<Scalar> anchor;  // a feasible point found at construction
  Box<Scalar> bounds;     // from axis-aligned rows, else anchor +/- probe radius
};

struct ProjectionOptions {
  double tol = 1e-10;
  int iter_cap = 10000;
};

inline void require_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got)
    throw InputError(std::string(what) + ": dimension mismatch (expected " +
                     std::to_string(expected) + ", got " + std::to_string(got) + ")");
}

/// A nonempty closed convex set. Immutable after construction.
template <typename Scalar>
class ConvexSet {
 public:
  using VectorType = Vector<Scalar>;
  using Variant = std::variant<Box<Scalar>, Ball<Scalar>, HalfspacePolytope<Scalar>>;

  /// Radius of the probing box around the anchor of a polytope that lacks
  /// axis-aligned bound rows.
  static constexpr Scalar kPolytopeProbeRadius = Scalar(10);

  static ConvexSet box(VectorType lower, VectorType upper) {
    require_dim(lower.size(), upper.size(), "Box");
    if (lower.size() == 0) throw InputError("Box: dimension must be positive");
    for (Eigen::Index k = 0; k < lower.size(); ++k) {
      if (!std::isfinite(lower[k]) || !std::isfinite(upper[k]))
        throw InputError("Box: bounds must be finite");
      if (lower[k] > upper[k]) throw InputError("Box: lower > upper in component " + std::to_string(k));
    }
    return ConvexSet(Box<Scalar>{std::move(lower), std::move(upper)});
  }

  static ConvexSet ball(VectorType center, Scalar radius) {
    if (center.size() == 0) throw InputError("Ball: dimension must be positive");
    if (!(radius >= 0)) throw InputError("Ball: radius must be nonnegative");
    return ConvexSet(Ball<Scalar>{std::move(center), radius});
  }

  static ConvexSet polytope(std::vector<Halfspace<Scalar>> rows, const ProjectionOptions& opts = {}) {
    if (rows.empty()) throw InputError("HalfspacePolytope: at least one row required");
    const Eigen::Index d = rows.front().normal.size();
    if (d == 0) throw InputError("HalfspacePolytope: dimension must be positive");
    for (const auto& r : rows) {
      require_dim(d, r.normal.size(), "HalfspacePolytope row");
      if (r.normal.norm() == Scalar(0)) throw InputError("HalfspacePolytope: zero row normal");
    }
    HalfspacePolytope<Scalar> poly;
    poly.rows = std::move(rows);
    poly.anchor = find_feasible(poly.rows, d, opts);
    poly.bounds = axis_bounds(poly.rows, poly.anchor);
    return ConvexSet(std::move(poly));
  }

  Eigen::Index dim() const {
    return std::visit(
        [](const auto& s) -> Eigen::Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box<Scalar>>) return s.lower.size();
          else if constexpr (std::is_same_v<T, Ball<Scalar>>) return s.center.size();
          else return s.anchor.size();
        },
        v_);
  }

  const Variant& variant() const { return v_; }
  const Box<Scalar>* as_box() const { return std::get_if<Box<Scalar>>(&v_); }
  const Ball<Scalar>* as_ball() const { return std::get_if<Ball<Scalar>>(&v_); }
  const HalfspacePolytope<Scalar>* as_polytope() const { return std::get_if<HalfspacePolytope<Scalar>>(&v_); }

  /// Axis-aligned box containing the set (exact for Box and Ball).
  Box<Scalar> bounding_box() const {
    if (auto b = as_box()) return *b;
    if (auto b = as_ball()) {
      VectorType r = VectorType::Constant(b->center.size(), b->radius);
      return {b->center - r, b->center + r};
    }
    return as_polytope()->bounds;
  }

  bool contains(const VectorType& y, Scalar tol = Scalar(1e-9)) const {
    require_dim(dim(), y.size(), "contains");
    if (auto b = as_box())
      return ((y - b->lower).array() >= -tol).all() && ((b->upper - y).array() >= -tol).all();
    if (auto b = as_ball()) return (y - b->center).norm() <= b->radius + tol;
    for (const auto& r : as_polytope()->rows)
      if (r.normal.dot(y) - r.offset > tol * r.normal.norm()) return false;
    return true;
  }

 private:
  explicit ConvexSet(Variant v) : v_(std::move(v)) {}

  static VectorType find_feasible(const std::vector<Halfspace<Scalar>>& rows, Eigen::Index d,
                                  const ProjectionOptions& opts) {
    VectorType x = VectorType::Zero(d);
    for (int it = 0; it < opts.iter_cap; ++it) {
      Scalar worst = 0;
      for (const auto& r : rows) {
        const Scalar excess = r.normal.dot(x) - r.offset;
        if (excess > 0) {
          x -= (excess / r.normal.squaredNorm()) * r.normal;
          worst = std::max(worst, excess / r.normal.norm());
        }
      }
      if (worst <= Scalar(1e-12)) return x;
    }
    Scalar worst = 0;
    for (const auto& r : rows) worst = std::max(worst, (r.normal.dot(x) - r.offset) / r.normal.norm());
    if (worst <= Scalar(1e-9)) return x;
    throw InputError("HalfspacePolytope: no feasible point found (empty set?)");
  }

  static Box<Scalar> axis_bounds(const std::vector<Halfspace<Scalar>>& rows, const VectorType& anchor) {
    const Eigen::Index d = anchor.size();
    VectorType lo = anchor.array() - kPolytopeProbeRadius;
    VectorType hi = anchor.array() + kPolytopeProbeRadius;
    std::vector<bool> has_lo(d, false), has_hi(d, false);
    for (const auto& r : rows) {
      Eigen::Index axis = -1;
      for (Eigen::Index k = 0; k < d; ++k) {
        if (r.normal[k] == Scalar(0)) continue;
        if (axis >= 0) { axis = -2; break; }
        axis = k;
      }
      if (axis < 0) continue;
      const Scalar bound = r.offset / r.normal[axis];
      if (r.normal[axis] > 0) {
        hi[axis] = has_hi[axis] ? std::min(hi[axis], bound) : bound;
        has_hi[axis] = true;
      } else {
        lo[axis] = has_lo[axis] ? std::max(lo[axis], bound) : bound;
        has_lo[axis] = true;
      }
    }
    return {lo, hi};
  }

  Variant v_;
};

using ConvexSetd = ConvexSet<double>;

// ---------------------------------------------------------------------------
// Grids

/// Lattice points k*h inside [lo, hi], always including both endpoints. Grids
/// built this way nest under h -> h/2 refinement.
template <typename Scalar>
std::vector<Scalar> lattice_1d(Scalar lo, Scalar hi, Scalar h) {
  if (!(h > 0)) throw InputError("grid resolution must be positive");
  std::vector<Scalar> pts;
  if (hi < lo) return pts;
  const Scalar merge = Scalar(1e-9) * h;
  pts.push_back(lo);
  if (hi - lo <= merge) return pts;
  const double count = std::floor(static_cast<double>(hi / h) + 1e-9) - std::ceil(static_cast<double>(lo / h) - 1e-9);
  if (count > 1e8) throw InputError("grid too large; use a coarser resolution");
  const long long k0 = static_cast<long long>(std::ceil(static_cast<double>(lo / h) - 1e-9));
  const long long k1 = static_cast<long long>(std::floor(static_cast<double>(hi / h) + 1e-9));
  for (long long k = k0; k <= k1; ++k) {
    const Scalar v = std::clamp(static_cast<Scalar>(k) * h, lo, hi);
    if (v - pts.back() > merge && hi - v > merge) pts.push_back(v);
  }
  pts.push_back(hi);
  return pts;
}

/// Evenly spaced points (count >= 1) covering [lo, hi] including endpoints.
template <typename Scalar>
std::vector<Scalar> linspace(Scalar lo, Scalar hi, int count) {
  std::vector<Scalar> pts;
  if (count <= 1 || hi <= lo) {
    pts.push_back(count <= 1 ? (lo + hi) / 2 : lo);
    return pts;
  }
  for (int k = 0; k < count; ++k) pts.push_back(lo + (hi - lo) * Scalar(k) / Scalar(count - 1));
  return pts;
}

/// Cartesian product of per-axis coordinate lists, in lexicographic order.
template <typename Scalar>
std::vector<Vector<Scalar>> cartesian(const std::vector<std::vector<Scalar>>& axes) {
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.empty()) return {};
    total *= a.size();
  }
  std::vector<Vector<Scalar>> out;
  out.reserve(total);
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Vector<Scalar> p(static_cast<Eigen::Index>(axes.size()));
    for (std::size_t k = 0; k < axes.size(); ++k) p[static_cast<Eigen::Index>(k)] = axes[k][idx[k]];
    out.push_back(std::move(p));
    for (std::size_t k = axes.size(); k-- > 0;) {
      if (++idx[k] < axes[k].size()) break;
      idx[k] = 0;
    }
  }
  return out;
}

template <typename Scalar>
std::vector<Vector<Scalar>> lattice_grid(const Box<Scalar>& box, Scalar h) {
  std::vector<std::vector<Scalar>> axes;
  double total = 1;
  for (Eigen::Index k = 0; k < box.lower.size(); ++k) {
    axes.push_back(lattice_1d(box.lower[k], box.upper[k], h));
    total *= static_cast<double>(axes.back().size());
  }
  if (total > 5e7) throw InputError("grid too large; use a coarser resolution");
  return cartesian(axes);
}

// ---------------------------------------------------------------------------
// Projection

namespace detail {

template <typename Scalar>
Vector<Scalar> project_halfspace(const Halfspace<Scalar>& r, const Vector<Scalar>& z) {
  const Scalar excess = r.normal.dot(z) - r.offset;
  if (excess <= 0) return z;
  return z - (excess / r.normal.squaredNorm()) * r.normal;
}

/// Exact projection assuming the rows within `active_tol` of tight at `x` are
/// the active set. Returns the KKT point if it is feasible with nonnegative
/// multipliers.
template <typename Scalar>
std::optional<Vector<Scalar>> polish_active_set(const std::vector<Halfspace<Scalar>>& rows,
                                                const Vector<Scalar>& y, const Vector<Scalar>& x,
                                                Scalar active_tol) {
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Scalar slack = (rows[k].offset - rows[k].normal.dot(x)) / rows[k].normal.norm();
    if (slack <= active_tol) active.push_back(k);
  }
  if (active.empty()) {
    for (const auto& r : rows)
      if (r.normal.dot(y) > r.offset) return std::nullopt;
    return y;
  }
  const Eigen::Index d = y.size();
  Matrix<Scalar> A(static_cast<Eigen::Index>(active.size()), d);
  Vector<Scalar> b(static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    A.row(static_cast<Eigen::Index>(k)) = rows[active[k]].normal.transpose();
    b[static_cast<Eigen::Index>(k)] = rows[active[k]].offset;
  }
  // w = y - A^T lambda with A w = b  =>  (A A^T) lambda = A y - b
  Matrix<Scalar> gram = A * A.transpose();
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod(gram);
  Vector<Scalar> lambda = cod.solve(A * y - b);
  Vector<Scalar> w = y - A.transpose() * lambda;
  if ((A * w - b).cwiseAbs().maxCoeff() > Scalar(1e-10) * (Scalar(1) + b.cwiseAbs().maxCoeff())) return std::nullopt;
  if (lambda.size() > 0 && lambda.minCoeff() < -Scalar(1e-12)) return std::nullopt;
  for (const auto& r : rows)
    if (r.normal.dot(w) - r.offset > Scalar(1e-12) * (Scalar(1) + std::abs(r.offset))) return std::nullopt;
  return w;
}

/// Nonnegative least squares min |E u - f| over u >= 0 (Lawson-Hanson).
template <typename Scalar>
std::optional<Vector<Scalar>> nnls(const Matrix<Scalar>& E, const Vector<Scalar>& f, int iter_cap) {
  const Eigen::Index m = E.cols();
  const Scalar tol = Scalar(1e-13) * (Scalar(1) + E.cwiseAbs().maxCoeff()) * (Scalar(1) + f.norm());
  Vector<Scalar> u = Vector<Scalar>::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  auto lsq = [&] {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < m; ++k)
      if (passive[static_cast<std::size_t>(k)]) idx.push_back(k);
    Matrix<Scalar> Ep(E.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) Ep.col(static_cast<Eigen::Index>(r)) = E.col(idx[r]);
    const Vector<Scalar> zp = Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>>(Ep).solve(f);
    Vector<Scalar> z = Vector<Scalar>::Zero(m);
    for (std::size_t r = 0; r < idx.size(); ++r) z[idx[r]] = zp[static_cast<Eigen::Index>(r)];
    return z;
  };
  for (int outer = 0;; ++outer) {
    if (outer >= iter_cap) return std::nullopt;
    const Vector<Scalar> w = E.transpose() * (f - E * u);
    Eigen::Index pick = -1;
    Scalar best = tol;
    for (Eigen::Index k = 0; k < m; ++k)
      if (!passive[static_cast<std::size_t>(k)] && w[k] > best) {
        best = w[k];
        pick = k;
      }
    if (pick < 0) return u;
    passive[static_cast<std::size_t>(pick)] = true;
    for (Eigen::Index inner = 0; inner <= m; ++inner) {
      const Vector<Scalar> z = lsq();
      Scalar alpha = 1;
      bool positive = true;
      for (Eigen::Index k = 0; k < m; ++k)
        if (passive[static_cast<std::size_t>(k)] && z[k] <= 0) {
          positive = false;
          alpha = std::min(alpha, u[k] / (u[k] - z[k]));
        }
      if (positive) {
        u = z;
        break;
      }
      u += alpha * (z - u);
      for (Eigen::Index k = 0; k < m; ++k)
        if (passive[static_cast<std::size_t>(k)] && u[k] <= tol) {
          passive[static_cast<std::size_t>(k)] = false;
          u[k] = 0;
        }
    }
  }
}

/// Projection onto {<n_k, x> <= o_k} as a least-distance program solved
/// through NNLS. Returns the point only if it is feasible.
template <typename Scalar>
std::optional<Vector<Scalar>> project_polytope_ldp(const std::vector<Halfspace<Scalar>>& rows,
                                                   const Vector<Scalar>& y, int iter_cap) {
  const auto m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = y.size();
  // x = y + v, minimize |v| subject to -A v >= A y - b
  Matrix<Scalar> E(d + 1, m);
  Scalar scale = 1;
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    E.col(k).head(d) = -r.normal;
    E(d, k) = r.normal.dot(y) - r.offset;
    scale = std::max({scale, std::abs(r.offset), std::abs(r.normal.dot(y))});
  }
  Vector<Scalar> f = Vector<Scalar>::Zero(d + 1);
  f[d] = 1;
  const auto u = nnls(E, f, iter_cap);
  if (!u) return std::nullopt;
  const Vector<Scalar> res = E * *u - f;
  if (!(std::abs(res[d]) > Scalar(1e-14))) return std::nullopt;
  const Vector<Scalar> x = y - res.head(d) / res[d];
  for (const auto& r : rows)
    if (r.normal.dot(x) - r.offset > Scalar(1e-10) * scale) return std::nullopt;
  return x;
}

}  // namespace detail

/// Nearest point of S to y. Polytopes use a least-distance NNLS solve; Dykstra's
/// cyclic half-space scheme with an active-set polish is the fallback.
template <typename Scalar>
Vector<Scalar> project(const ConvexSet<Scalar>& S, const Vector<Scalar>& y, const ProjectionOptions& opts = {}) {
  require_dim(S.dim(), y.size(), "project");
  if (auto b = S.as_box()) return y.cwiseMax(b->lower).cwiseMin(b->upper);
  if (auto b = S.as_ball()) {
    const Vector<Scalar> off = y - b->center;
    const Scalar r = off.norm();
    if (r <= b->radius) return y;
    return b->center + (b->radius / r) * off;
  }
  const auto& rows = S.as_polytope()->rows;
  if (S.contains(y, Scalar(0))) return y;
  if (auto w = detail::project_polytope_ldp(rows, y, std::max(opts.iter_cap, 1))) return *w;

  constexpr int kPolishEvery = 25;
  Vector<Scalar> x = y;
  std::vector<Vector<Scalar>> increments(rows.size(), Vector<Scalar>::Zero(y.size()));
  for (int sweep = 1; sweep <= opts.iter_cap; ++sweep) {
    const Vector<Scalar> before = x;
    Scalar shifted = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Vector<Scalar> z = x + increments[k];
      x = detail::project_halfspace(rows[k], z);
      const Vector<Scalar> inc = z - x;
      shifted += (inc - increments[k]).norm();
      increments[k] = inc;
    }
    // x can stall for a sweep while the increments still change
    const bool settled = (x - before).norm() < opts.tol && shifted < opts.tol;
    if (sweep % kPolishEvery == 0 || settled) {
      if (auto w = detail::polish_active_set(rows, y, x, Scalar(1e-7))) return *w;
    }
    if (settled) return x;
  }
  throw NonConvergenceError("project: iteration cap reached for HalfspacePolytope", x.template cast<double>());
}

/// A maximizer of <c, x> over S: exact for Box and Ball; polytopes project a
/// far point along c.
template <typename Scalar>
Vector<Scalar> support_point(const ConvexSet<Scalar>& S, const Vector<Scalar>& c) {
  require_dim(S.dim(), c.size(), "support_point");
  if (auto b = S.as_box()) {
    Vector<Scalar> p = b->lower;
    for (Eigen::Index k = 0; k < c.size(); ++k)
      if (c[k] > 0) p[k] = b->upper[k];
    return p;
  }
  const Scalar n = c.norm();
  if (auto b = S.as_ball()) return n == 0 ? b->center : Vector<Scalar>(b->center + (b->radius / n) * c);
  const auto& poly = *S.as_polytope();
  if (n == 0) return poly.anchor;
  const Scalar reach = (poly.bounds.upper - poly.bounds.lower).norm() + Scalar(1);
  return project(S, Vector<Scalar>(poly.anchor + (Scalar(1e3) * reach / n) * c));
}

/// max of <c, x> over S.
template <typename Scalar>
Scalar support(const ConvexSet<Scalar>& S, const Vector<Scalar>& c) {
  if (auto b = S.as_box()) {
    require_dim(S.dim(), c.size(), "support");
    Scalar s = 0;
    for (Eigen::Index k = 0; k < c.size(); ++k) s += std::max(c[k] * b->lower[k], c[k] * b->upper[k]);
    return s;
  }
  if (auto b = S.as_ball()) {
    require_dim(S.dim(), c.size(), "support");
    return c.dot(b->center) + b->radius * c.norm();
  }
  return c.dot(support_point(S, c));
}

// ---------------------------------------------------------------------------
// Probing

/// Deterministic grid plus seeded uniform samples over a slightly inflated
/// bounding box, each mapped into S by projection (so boundary points are
/// covered). Returns at most `budget` points, all members of S.
template <typename Scalar>
std::vector<Vector<Scalar>> probe_points(const ConvexSet<Scalar>& S, int budget, Rng rng) {
  if (budget <= 0) throw InputError("probe budget must be positive");
  const Box<Scalar> bb = S.bounding_box();
  const Eigen::Index d = S.dim();
  const Vector<Scalar> mid = (bb.lower + bb.upper) / 2;
  const Vector<Scalar> half = ((bb.upper - bb.lower) / 2) * Scalar(1.25);
  const Vector<Scalar> lo = mid - half, hi = mid + half;

  const int grid_budget = std::max(1, budget / 2);
  int per_axis = static_cast<int>(std::floor(std::pow(static_cast<double>(grid_budget), 1.0 / static_cast<double>(d)) + 1e-9));
  per_axis = std::max(per_axis, 1);
  std::vector<std::vector<Scalar>> axes;
  for (Eigen::Index k = 0; k < d; ++k) axes.push_back(linspace(lo[k], hi[k], per_axis));

  std::vector<Vector<Scalar>> out;
  for (auto& p : cartesian(axes)) out.push_back(project(S, p));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(out.size()) < budget) {
    Vector<Scalar> p(d);
    for (Eigen::Index k = 0; k < d; ++k) p[k] = lo[k] + (hi[k] - lo[k]) * static_cast<Scalar>(unit(rng));
    out.push_back(project(S, p));
  }
  return out;
}

/// min over probes eta of <x - y, eta - x>; >= -1e-9 when x = project(S, y).
template <typename Scalar>
Scalar projection_vi_residual(const ConvexSet<Scalar>& S, const Vector<Scalar>& y, const Vector<Scalar>& x,
                              int probe_budget, std::uint64_t seed = 0) {
  require_dim(S.dim(), y.size(), "projection_vi_residual");
  require_dim(S.dim(), x.size(), "projection_vi_residual");
  if (probe_budget <= 0) throw InputError("projection_vi_residual: probe budget must be positive");
  if (!S.contains(x, Scalar(1e-9))) throw InputError("projection_vi_residual: x is not in S");
  const Vector<Scalar> g = x - y;
  Scalar worst = std::numeric_limits<Scalar>::infinity();
  for (const auto& eta : probe_points(S, probe_budget, RngKey(seed).make())) worst = std::min(worst, g.dot(eta - x));
  return std::min(worst, g.dot(x - x));
}

// ---------------------------------------------------------------------------
// Cones

/// x_star in C° (polar of the finite set C): <x_star, c> <= tol for every c.
template <typename Scalar>
bool polar_membership(std::span<const Vector<Scalar>> C, const Vector<Scalar>& x_star, Scalar tol) {
  for (const auto& c : C) {
    require_dim(x_star.size(), c.size(), "polar_membership");
    if (x_star.dot(c) > tol) return false;
  }
  return true;
}

/// x_star in N_C(x) for a finite point list C; empty C gives the whole space.
template <typename Scalar>
bool normal_cone_membership(std::span<const Vector<Scalar>> C, const Vector<Scalar>& x, const Vector<Scalar>& x_star,
                            Scalar tol) {
  require_dim(x.size(), x_star.size(), "normal_cone_membership");
  for (const auto& c : C) {
    require_dim(x.size(), c.size(), "normal_cone_membership");
    if (x_star.dot(c - x) > tol) return false;
  }
  return true;
}

/// x_star in N_S(x), certified up to the probe set of S.
template <typename Scalar>
bool normal_cone_membership(const ConvexSet<Scalar>& S, const Vector<Scalar>& x, const Vector<Scalar>& x_star,
                            Scalar tol, int probe_budget, std::uint64_t seed = 0) {
  require_dim(S.dim(), x.size(), "normal_cone_membership");
  const auto probes = probe_points(S, probe_budget, RngKey(seed).make());
  return normal_cone_membership<Scalar>(std::span<const Vector<Scalar>>(probes), x, x_star, tol);
}

/// Fixed discretization of the unit sphere in dimension 1..3 with `resolution`
/// points per angle, in scan order.
template <typename Scalar>
std::vector<Vector<Scalar>> sphere_directions(Eigen::Index dim, int resolution) {
  if (resolution <= 0) throw InputError("sphere_directions: resolution must be positive");
  std::vector<Vector<Scalar>> out;
  if (dim == 1) {
    out.push_back(Vector<Scalar>::Constant(1, Scalar(1)));
    out.push_back(Vector<Scalar>::Constant(1, Scalar(-1)));
  } else if (dim == 2) {
    for (int k = 0; k < resolution; ++k) {
      const double t = 2.0 * std::numbers::pi * k / resolution;
      Vector<Scalar> d(2);
      d << static_cast<Scalar>(std::cos(t)), static_cast<Scalar>(std::sin(t));
      out.push_back(d);
    }
  } else if (dim == 3) {
    const int polar_steps = std::max(2, resolution / 2 + 1);
    for (int j = 0; j < polar_steps; ++j) {
      const double theta = std::numbers::pi * j / (polar_steps - 1);
      const int ring = (j == 0 || j == polar_steps - 1) ? 1 : resolution;
      for (int k = 0; k < ring; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / resolution;
        Vector<Scalar> d(3);
        d << static_cast<Scalar>(std::sin(theta) * std::cos(phi)), static_cast<Scalar>(std::sin(theta) * std::sin(phi)),
            static_cast<Scalar>(std::cos(theta));
        out.push_back(d);
      }
    }
  } else {
    throw InputError("sphere scan supports ambient dimension 1, 2 or 3");
  }
  return out;
}

struct SeparatorScan {
  std::vector<Vec> qualifying;  // every scanned direction with margin <= 1e-9
  std::optional<Vec> best;      // most negative margin, first scanned on ties
};

/// Sphere scan for unit x* with max_z <x*, z - x> <= 1e-9 over the points
/// (equivalently over their convex hull).
template <typename Scalar>
SeparatorScan scan_separators(std::span<const Vector<Scalar>> points, const Vector<Scalar>& x, int angular_resolution) {
  const Eigen::Index d = x.size();
  if (d < 1 || d > 3) throw InputError("separate: ambient dimension must be 1, 2 or 3");
  if (points.empty()) throw InputError("separate: point list must be nonempty");
  for (const auto& p : points) require_dim(d, p.size(), "separate");
  constexpr double kMarginTol = 1e-9;
  SeparatorScan scan;
  double best_margin = std::numeric_limits<double>::infinity();
  for (const auto& dir : sphere_directions<Scalar>(d, angular_resolution)) {
    double margin = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) margin = std::max(margin, static_cast<double>(dir.dot(p - x)));
    if (margin <= kMarginTol) {
      scan.qualifying.push_back(dir.template cast<double>());
      if (margin < best_margin - 1e-15) {
        best_margin = margin;
        scan.best = dir.template cast<double>();
      }
    }
  }
  return scan;
}

template <typename Scalar>
std::optional<Vec> separate(std::span<const Vector<Scalar>> points, const Vector<Scalar>& x, int angular_resolution) {
  return scan_separators(points, x, angular_resolution).best;
}

// ---------------------------------------------------------------------------
// Convex hulls of finite point sets

struct HullProjection {
  Vec point;
  Vec weights;  // convex combination weights, one per input point
  double distance;
};

/// Nearest point of co(points) to q, by Wolfe's minimum-norm-point method.
inline HullProjection hull_projection(std::span<const Vec> points, const Vec& q) {
  if (points.empty()) throw InputError("hull_projection: empty point list");
  const std::size_t m = points.size();
  const Eigen::Index d = q.size();
  Mat P(d, static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    require_dim(d, points[j].size(), "hull_projection");
    P.col(static_cast<Eigen::Index>(j)) = points[j] - q;
  }
  const double scale = std::max(1.0, P.colwise().squaredNorm().maxCoeff());
  const double tol = 1e-12 * scale;

  std::vector<Eigen::Index> S;
  std::vector<double> lambda;
  {
    Eigen::Index j0;
    P.colwise().squaredNorm().minCoeff(&j0);
    S.push_back(j0);
    lambda.push_back(1.0);
  }
  auto current = [&] {
    Vec x = Vec::Zero(d);
    for (std::size_t k = 0; k < S.size(); ++k) x += lambda[k] * P.col(S[k]);
    return x;
  };
  Vec x = current();
  for (int major = 0; major < 1000; ++major) {
    Eigen::Index j;
    (P.transpose() * x).minCoeff(&j);
    if (x.squaredNorm() - x.dot(P.col(j)) <= tol) break;
    if (std::find(S.begin(), S.end(), j) != S.end()) break;
    S.push_back(j);
    lambda.push_back(0.0);
    for (int minor = 0; minor < 1000; ++minor) {
      const Eigen::Index s = static_cast<Eigen::Index>(S.size());
      Mat K = Mat::Zero(s + 1, s + 1);
      for (Eigen::Index a = 0; a < s; ++a)
        for (Eigen::Index b = 0; b < s; ++b) K(a, b) = P.col(S[a]).dot(P.col(S[b]));
      K.block(0, s, s, 1).setOnes();
      K.block(s, 0, 1, s).setOnes();
      Vec rhs = Vec::Zero(s + 1);
      rhs[s] = 1.0;
      Vec alpha = K.completeOrthogonalDecomposition().solve(rhs).head(s);
      if (alpha.minCoeff() > 1e-14) {
        for (Eigen::Index a = 0; a < s; ++a) lambda[a] = alpha[a];
        break;
      }
      double theta = 1.0;
      for (Eigen::Index a = 0; a < s; ++a)
        if (alpha[a] <= 1e-14) {
          const double denom = lambda[a] - alpha[a];
          if (denom > 0) theta = std::min(theta, lambda[a] / denom);
        }
      for (Eigen::Index a = 0; a < s; ++a) lambda[a] = lambda[a] + theta * (alpha[a] - lambda[a]);
      std::vector<Eigen::Index> S2;
      std::vector<double> l2;
      for (Eigen::Index a = 0; a < s; ++a)
        if (lambda[a] > 1e-14) {
          S2.push_back(S[a]);
          l2.push_back(lambda[a]);
        }
      if (S2.empty()) {
        S2.push_back(S.back());
        l2.push_back(1.0);
      }
      const double total = std::accumulate(l2.begin(), l2.end(), 0.0);
      for (auto& l : l2) l /= total;
      S = std::move(S2);
      lambda = std::move(l2);
    }
    x = current();
  }
  HullProjection out;
  out.weights = Vec::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < S.size(); ++k) out.weights[S[k]] = lambda[k];
  out.point = x + q;
  out.distance = x.norm();
  return out;
}

inline bool in_hull(std::span<const Vec> points, const Vec& q, double tol = 1e-9) {
  return !points.empty() && hull_projection(points, q).distance <= tol;
}

}  // namespace projgnep
