#include "projgnep/game.hpp"

#include <algorithm>
#include <cmath>

namespace projgnep {

namespace {

Box<double> hull_of(const Box<double>& a, const Box<double>& b) {
  return {a.lower.cwiseMin(b.lower), a.upper.cwiseMax(b.upper)};
}

Box<double> inflate(const Box<double>& a, double r) { return {a.lower.array() - r, a.upper.array() + r}; }

Box<double> concat(const std::vector<Box<double>>& parts) {
  Eigen::Index n = 0;
  for (const auto& p : parts) n += p.lower.size();
  Box<double> out{Vec(n), Vec(n)};
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.lower.segment(at, p.lower.size()) = p.lower;
    out.upper.segment(at, p.upper.size()) = p.upper;
    at += p.lower.size();
  }
  return out;
}

std::vector<Vec> product(const std::vector<std::vector<Vec>>& factors, double guard) {
  double total = 1;
  Eigen::Index n = 0;
  for (const auto& f : factors) {
    if (f.empty()) return {};
    total *= static_cast<double>(f.size());
    n += f.front().size();
  }
  if (total > guard) throw InputError("grid too large (" + format_real(total) + " points); use a coarser resolution");
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> idx(factors.size(), 0);
  for (std::size_t c = 0; c < static_cast<std::size_t>(total); ++c) {
    Vec p(n);
    Eigen::Index at = 0;
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const Vec& f = factors[k][idx[k]];
      p.segment(at, f.size()) = f;
      at += f.size();
    }
    out.push_back(std::move(p));
    for (std::size_t k = factors.size(); k-- > 0;) {
      if (++idx[k] < factors[k].size()) break;
      idx[k] = 0;
    }
  }
  return out;
}

/// per_axis^dim evenly spaced probes over a box, per_axis chosen so the total
/// stays near `cap`.
std::vector<Vec> probe_grid(const Box<double>& box, int per_axis, double cap) {
  const auto d = static_cast<double>(box.lower.size());
  const int fit = static_cast<int>(std::floor(std::pow(cap, 1.0 / d) + 1e-9));
  per_axis = std::max(2, std::min(per_axis, fit));
  std::vector<std::vector<double>> axes;
  for (Eigen::Index k = 0; k < box.lower.size(); ++k) axes.push_back(linspace(box.lower[k], box.upper[k], per_axis));
  return cartesian(axes);
}

}  // namespace

// ---------------------------------------------------------------------------
// AffineMap

Box<double> AffineMap::range(const Box<double>& box) const {
  require_dim(A.cols(), box.lower.size(), "AffineMap::range");
  Box<double> out{b, b};
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index k = 0; k < A.cols(); ++k) {
      const double lo = A(r, k) * box.lower[k], hi = A(r, k) * box.upper[k];
      out.lower[r] += std::min(lo, hi);
      out.upper[r] += std::max(lo, hi);
    }
  return out;
}

AffineMap parse_affine(std::string_view text, int nvars, int line, int column) {
  const Polynomial p = parse_polynomial(text, nvars, 1, line, column);
  const auto q = p.quadratic_form();
  AffineMap m{Mat(1, nvars), Vec::Constant(1, q.c)};
  m.A.row(0) = q.b.transpose();
  return m;
}

// ---------------------------------------------------------------------------
// ConstraintMap

ConstraintMap ConstraintMap::moving_box(int player, AffineMap lower, AffineMap upper) {
  if (lower.A.rows() == 0 || lower.A.rows() != upper.A.rows() || lower.A.cols() != upper.A.cols() ||
      lower.b.size() != lower.A.rows() || upper.b.size() != upper.A.rows())
    throw InputError("MovingBox: bound maps have inconsistent shapes");
  const auto own = static_cast<int>(lower.A.rows()), joint = static_cast<int>(lower.A.cols());
  return ConstraintMap(player, own, joint, MovingBox{std::move(lower), std::move(upper)});
}

ConstraintMap ConstraintMap::moving_polytope(int player, std::vector<Vec> normals, AffineMap offsets) {
  if (normals.empty() || offsets.A.rows() != static_cast<Eigen::Index>(normals.size()) ||
      offsets.b.size() != offsets.A.rows())
    throw InputError("MovingPolytope: one affine offset per row required");
  const auto own = static_cast<int>(normals.front().size()), joint = static_cast<int>(offsets.A.cols());
  for (const auto& v : normals) {
    require_dim(own, v.size(), "MovingPolytope row");
    if (v.norm() == 0) throw InputError("MovingPolytope: zero row normal");
  }
  ConstraintMap K(player, own, joint, MovingPolytope{std::move(normals), std::move(offsets)});
  std::vector<bool> lo(static_cast<std::size_t>(own)), hi(static_cast<std::size_t>(own));
  for (const auto& v : std::get<MovingPolytope>(K.v_).normals) {
    Eigen::Index axis = -1, nz = 0;
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (v[k] != 0) axis = k, ++nz;
    if (nz != 1) continue;
    (v[axis] > 0 ? hi : lo)[static_cast<std::size_t>(axis)] = true;
  }
  for (int k = 0; k < own; ++k)
    if (!lo[static_cast<std::size_t>(k)] || !hi[static_cast<std::size_t>(k)])
      throw InputError("MovingPolytope: every axis needs an axis-aligned lower and upper bound row");
  return K;
}

ConvexSetd ConstraintMap::at(const Vec& x) const {
  require_dim(joint_dim_, x.size(), "ConstraintMap::at");
  if (auto* b = std::get_if<MovingBox>(&v_)) {
    const Vec lo = b->lower(x), hi = b->upper(x);
    for (Eigen::Index k = 0; k < lo.size(); ++k)
      if (lo[k] > hi[k]) throw InputError("constraint value is empty (lower > upper)");
    return ConvexSetd::box(lo, hi);
  }
  const auto& p = std::get<MovingPolytope>(v_);
  const Vec off = p.offsets(x);
  std::vector<Halfspace<double>> rows;
  for (std::size_t k = 0; k < p.normals.size(); ++k) rows.push_back({p.normals[k], off[static_cast<Eigen::Index>(k)]});
  return ConvexSetd::polytope(std::move(rows));
}

Box<double> ConstraintMap::hull_bound(const Box<double>& xbox) const {
  if (auto* b = std::get_if<MovingBox>(&v_)) return {b->lower.range(xbox).lower, b->upper.range(xbox).upper};
  const auto& p = std::get<MovingPolytope>(v_);
  const Box<double> off = p.offsets.range(xbox);
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box<double> out{Vec::Constant(own_dim_, -inf), Vec::Constant(own_dim_, inf)};
  for (std::size_t r = 0; r < p.normals.size(); ++r) {
    const Vec& v = p.normals[r];
    Eigen::Index axis = -1, nz = 0;
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (v[k] != 0) axis = k, ++nz;
    if (nz != 1) continue;
    const auto er = static_cast<Eigen::Index>(r);
    if (v[axis] > 0) out.upper[axis] = std::min(out.upper[axis], off.upper[er] / v[axis]);
    else out.lower[axis] = std::max(out.lower[axis], off.upper[er] / v[axis]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SolverConfig

void SolverConfig::validate() const {
  if (!(h > 0)) throw InputError("config: h must be positive");
  if (eps && !(*eps > 0)) throw InputError("config: eps must be positive");
  if (!(lambda > 0 && lambda <= 1)) throw InputError("config: lambda must lie in (0, 1]");
  if (max_iter < 1) throw InputError("config: max-iter must be at least 1");
  if (multistart < 1) throw InputError("config: multistart must be at least 1");
  if (random_budget < 0) throw InputError("config: budget must be nonnegative");
  if (delta < 0) throw InputError("config: delta must be nonnegative");
  if (grid_h && !(*grid_h > 0)) throw InputError("config: distance grid must be positive");
  if (angular_resolution < 0) throw InputError("config: angular resolution must be nonnegative");
  if (!(region_margin > 0)) throw InputError("config: region margin must be positive");
}

// ---------------------------------------------------------------------------
// GameInstance

GameInstance GameInstance::build(std::vector<int> dims, std::vector<ConvexSetd> choice_sets,
                                 std::vector<ConstraintMap> constraints, std::vector<PreferenceMap> preferences,
                                 const Options& opts) {
  const std::size_t N = dims.size();
  if (N == 0) throw InputError("game: at least one player required");
  if (choice_sets.size() != N || constraints.size() != N || preferences.size() != N)
    throw InputError("game: one choice set, constraint map and preference map per player required");
  GameInstance G;
  G.dims_ = std::move(dims);
  for (int d : G.dims_) {
    if (d <= 0) throw InputError("game: player dimensions must be positive");
    G.offsets_.push_back(G.n_);
    G.n_ += d;
  }
  for (std::size_t i = 0; i < N; ++i) {
    const std::string who = "player " + std::to_string(i + 1);
    if (choice_sets[i].dim() != G.dims_[i]) throw InputError(who + ": choice set has wrong dimension");
    if (constraints[i].own_dim() != G.dims_[i] || constraints[i].joint_dim() != G.n_)
      throw InputError(who + ": constraint map has wrong dimensions");
    if (preferences[i].own_dim() != G.dims_[i] || preferences[i].joint_dim() != G.n_ ||
        preferences[i].own_offset() != G.offsets_[i])
      throw InputError(who + ": preference map has wrong dimensions");
  }
  G.choice_ = std::move(choice_sets);
  G.K_ = std::move(constraints);
  G.P_ = std::move(preferences);
  G.utility_reducible_ = std::all_of(G.P_.begin(), G.P_.end(), [](const auto& P) { return P.is_utility(); });

  const Box<double> xb = G.X_bounds();
  std::vector<Box<double>> qs;
  for (const auto& K : G.K_) qs.push_back(K.hull_bound(xb));
  G.Q_ = concat(qs);

  if (!opts.run_checks) return G;
  HypothesisSummary& sum = G.summary_;

  // nonempty K_i(x) over X
  bool proven = true;
  for (const auto& K : G.K_) {
    const auto* b = std::get_if<MovingBox>(&K.variant());
    if (!b) {
      proven = false;
      break;
    }
    const AffineMap gap{b->upper.A - b->lower.A, b->upper.b - b->lower.b};
    if ((gap.range(xb).lower.array() < 0).any()) proven = false;
  }
  sum.nonempty_by_intervals = proven;
  if (!proven) {
    for (const auto& x : probe_grid(xb, opts.probe_per_axis, 50000)) {
      if (!G.in_X(x, 0)) continue;
      ++sum.nonempty_probes;
      for (std::size_t i = 0; i < N; ++i) {
        try {
          (void)G.K_[i].at(x);
        } catch (const InputError&) {
          throw HypothesisError("player " + std::to_string(i + 1) + ": K(x) is empty at probe x = (" + format_vec(x) + ")", x);
        }
      }
    }
  }

  // self-exclusion x_i not in co(P_i(x)) over Q
  sum.self_exclusion_budget = opts.self_exclusion_budget;
  for (std::size_t i = 0; i < N; ++i) {
    const auto ii = static_cast<int>(i);
    const PreferenceMap& P = G.P_[i];
    std::vector<Vec> probes;
    if (auto* t = std::get_if<SampledTable>(&P.variant())) {
      SampledTable xs;
      xs.origin = t->origin.head(G.n_);
      xs.step = t->step;
      xs.counts.assign(t->counts.begin(), t->counts.begin() + G.n_);
      for (std::size_t c = 0; c < xs.cell_count() && c < 4096; ++c) probes.push_back(xs.point(c));
    } else {
      probes = probe_grid(G.Q_, opts.probe_per_axis, P.halfspace_valued() ? 50000 : 1000);
    }
    const Box<double> own = inflate(G.Q_block(ii), 1.0);
    const ConvexSetd region = ConvexSetd::box(own.lower, own.upper);
    for (const auto& x : probes) {
      ++sum.self_exclusion_probes;
      if (hull_preferred(P, x, P.own(x), opts.self_exclusion_budget, region, opts.seed))
        throw HypothesisError("player " + std::to_string(i + 1) + ": own strategy lies in co(P(x)) at probe x = (" +
                                  format_vec(x) + ")",
                              x);
    }
  }
  return G;
}

Vec GameInstance::project_X(const Vec& y) const {
  require_dim(n_, y.size(), "project_X");
  Vec out(n_);
  for (int i = 0; i < players(); ++i) out.segment(offset(i), dim(i)) = project(choice_set(i), Vec(block(y, i)));
  return out;
}

bool GameInstance::in_X(const Vec& x, double tol) const {
  require_dim(n_, x.size(), "in_X");
  for (int i = 0; i < players(); ++i)
    if (!choice_set(i).contains(block(x, i), tol)) return false;
  return true;
}

Box<double> GameInstance::X_bounds() const {
  std::vector<Box<double>> parts;
  for (const auto& S : choice_) parts.push_back(S.bounding_box());
  return concat(parts);
}

Box<double> GameInstance::Q_block(int i) const {
  return {Q_.lower.segment(offset(i), dim(i)), Q_.upper.segment(offset(i), dim(i))};
}

GraphDistanceContext GameInstance::graph_context(int i, const SolverConfig& cfg) const {
  const Box<double> joint = inflate(hull_of(X_bounds(), Q_), cfg.region_margin);
  const Box<double> own{joint.lower.segment(offset(i), dim(i)), joint.upper.segment(offset(i), dim(i))};
  return {concat({joint, own}), cfg.distance_h(), false};
}

GameInstance from_utilities(std::vector<int> dims, std::vector<ConvexSetd> choice_sets,
                            std::vector<ConstraintMap> constraints, const std::vector<Polynomial>& utilities,
                            double delta, const GameInstance::Options& opts) {
  if (utilities.size() != dims.size()) throw InputError("from_utilities: one utility per player required");
  std::vector<PreferenceMap> prefs;
  int offset = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    prefs.push_back(PreferenceMap::utility(static_cast<int>(i), offset, dims[i], utilities[i], delta));
    offset += dims[i];
  }
  return GameInstance::build(std::move(dims), std::move(choice_sets), std::move(constraints), std::move(prefs), opts);
}

// ---------------------------------------------------------------------------
// Grids and checks

std::vector<Vec> set_grid(const ConvexSetd& S, double h) {
  if (auto* b = S.as_box()) return lattice_grid(*b, h);
  std::vector<Vec> out;
  for (auto& p : lattice_grid(S.bounding_box(), h))
    if (S.contains(p, 1e-12)) out.push_back(std::move(p));
  return out;
}

std::vector<Vec> joint_grid(const GameInstance& G, double h) {
  std::vector<std::vector<Vec>> f;
  for (int i = 0; i < G.players(); ++i) f.push_back(set_grid(G.choice_set(i), h));
  return product(f, 1e7);
}

ConvexSetd constraint_set(const GameInstance& G, int i, const Vec& x) {
  if (i < 0 || i >= G.players()) throw InputError("constraint_set: player index out of range");
  if (!G.in_X(x, 1e-9)) throw InputError("constraint_set: x is not in X");
  return G.constraint(i).at(x);
}

double Certificate::total_residual() const {
  double t = projection_residual;
  for (const auto& p : players) t += p.membership_residual;
  return t;
}

std::vector<PlayerRecord> check_nep(const GameInstance& G, const Vec& x_fix, const Vec& y, const SolverConfig& cfg) {
  require_dim(G.joint_dim(), x_fix.size(), "check_nep");
  require_dim(G.joint_dim(), y.size(), "check_nep");
  std::vector<PlayerRecord> out;
  for (int i = 0; i < G.players(); ++i) {
    const PreferenceMap& P = G.preference(i);
    const ConvexSetd K = G.constraint(i).at(x_fix);
    const Vec yi = G.block(y, i);
    PlayerRecord rec;
    rec.membership_residual = (yi - project(K, yi)).norm();
    rec.emptiness_resolution = cfg.h;

    if (P.is_sampled()) {
      const auto& t = std::get<SampledTable>(P.variant());
      rec.emptiness_resolution = t.step;
      auto hits = sample_preferred(P, y, K, static_cast<int>(std::min<std::size_t>(t.cell_count(), 1u << 30)), cfg.seed);
      if (!hits.empty()) rec.witness = hits.front();
      out.push_back(std::move(rec));
      continue;
    }

    if (P.halfspace_valued()) {
      // P_i(y) is an open half-space {<a, z> > b} or empty: check the maximizer of <a, .> over K.
      const Vec a = P.is_direction() ? P.direction_at(y) : P.own_gradient(y);
      rec.emptiness_resolution = 0;
      if (a.norm() > 0) {
        const Vec z = support_point(K, a);
        if (preferred(P, y, z)) rec.witness = z;
      }
      out.push_back(std::move(rec));
      continue;
    }

    for (const auto& z : set_grid(K, cfg.h))
      if (preferred(P, y, z)) {
        rec.witness = z;
        break;
      }
    if (!rec.witness && cfg.random_budget > 0) {
      Rng rng = RngKey(cfg.seed).tag(static_cast<std::uint64_t>(i)).tag(x_fix).tag(y).make();
      const Box<double> bb = K.bounding_box();
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int s = 0; s < cfg.random_budget; ++s) {
        Vec z(bb.lower.size());
        for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = bb.lower[k] + (bb.upper[k] - bb.lower[k]) * unit(rng);
        if (!K.as_box()) z = project(K, z);
        ++rec.random_samples;
        if (preferred(P, y, z)) {
          rec.witness = z;
          break;
        }
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

Certificate check_projected_solution(const GameInstance& G, const Vec& x_tilde, const Vec& y_tilde,
                                     const SolverConfig& cfg, double eps) {
  Certificate c;
  c.x = x_tilde;
  c.y = y_tilde;
  c.eps = eps;
  c.projection_residual = (G.project_X(y_tilde) - x_tilde).norm();
  c.players = check_nep(G, x_tilde, y_tilde, cfg);
  if (c.projection_residual > eps) c.reason = "projection";
  for (std::size_t i = 0; i < c.players.size() && c.reason.empty(); ++i)
    if (c.players[i].membership_residual > eps) c.reason = "membership[" + std::to_string(i + 1) + "]";
  for (std::size_t i = 0; i < c.players.size() && c.reason.empty(); ++i)
    if (c.players[i].witness) c.reason = "preference[" + std::to_string(i + 1) + "]";
  c.pass = c.reason.empty();
  return c;
}

}  // namespace projgnep
