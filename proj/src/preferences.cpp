#include "projgnep/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace projgnep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec concat(const Vec& a, const Vec& b) {
  Vec w(a.size() + b.size());
  w << a, b;
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// SampledTable

std::size_t SampledTable::cell_count() const {
  std::size_t n = 1;
  for (int c : counts) n *= static_cast<std::size_t>(c);
  return n;
}

std::optional<std::size_t> SampledTable::locate(const Vec& w) const {
  if (w.size() != static_cast<Eigen::Index>(counts.size())) return std::nullopt;
  std::size_t flat = 0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    const double t = (w[static_cast<Eigen::Index>(a)] - origin[static_cast<Eigen::Index>(a)]) / step;
    const double k = std::round(t);
    if (std::abs(t - k) > 1e-9 || k < 0 || k >= counts[a]) return std::nullopt;
    flat = flat * static_cast<std::size_t>(counts[a]) + static_cast<std::size_t>(k);
  }
  return flat;
}

Vec SampledTable::point(std::size_t flat) const {
  Vec w(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t a = counts.size(); a-- > 0;) {
    const auto c = static_cast<std::size_t>(counts[a]);
    w[static_cast<Eigen::Index>(a)] = origin[static_cast<Eigen::Index>(a)] + step * static_cast<double>(flat % c);
    flat /= c;
  }
  return w;
}

// ---------------------------------------------------------------------------
// QuadricSublevel

QuadricSublevel::QuadricSublevel(Polynomial::QuadraticForm form)
    : A_(std::move(form.A)), b_(std::move(form.b)), c_(form.c) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(A_);
  V_ = eig.eigenvectors();
  lambda_ = eig.eigenvalues();
  const double scale = std::max(1.0, lambda_.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < lambda_.size(); ++j)
    if (std::abs(lambda_[j]) <= 1e-13 * scale) lambda_[j] = 0;
  bt_ = V_.transpose() * b_;
}

double QuadricSublevel::distance(const Vec& q) const {
  require_dim(A_.rows(), q.size(), "QuadricSublevel::distance");
  if (value(q) <= 0) return 0;
  const Eigen::Index m = q.size();
  const Vec qt = V_.transpose() * q;

  double best = kInf;
  auto consider = [&](const Vec& wt) {
    if (!wt.allFinite()) return;
    const Vec w = V_ * wt;
    const double mag = 1.0 + std::abs(w.dot(A_ * w)) + std::abs(b_.dot(w)) + std::abs(c_);
    if (std::abs(value(w)) <= 1e-9 * mag) best = std::min(best, (w - q).norm());
  };
  auto wt_of = [&](double mu) {
    Vec wt(m);
    for (Eigen::Index j = 0; j < m; ++j) wt[j] = (qt[j] - mu * bt_[j] / 2) / (1 + mu * lambda_[j]);
    return wt;
  };
  auto secular = [&](double mu) {
    double s = c_;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double w = (qt[j] - mu * bt_[j] / 2) / (1 + mu * lambda_[j]);
      s += lambda_[j] * w * w + bt_[j] * w;
    }
    return s;
  };

  std::vector<double> poles;
  for (Eigen::Index j = 0; j < m; ++j)
    if (lambda_[j] != 0) poles.push_back(-1.0 / lambda_[j]);
  std::sort(poles.begin(), poles.end());
  poles.erase(std::unique(poles.begin(), poles.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1 + std::abs(a)); }),
              poles.end());

  // Regular boundary points: roots of the secular function on each interval
  // between consecutive poles.
  std::vector<double> edges;
  edges.push_back(-kInf);
  edges.insert(edges.end(), poles.begin(), poles.end());
  edges.push_back(kInf);
  constexpr int kSamples = 256;
  for (std::size_t iv = 0; iv + 1 < edges.size(); ++iv) {
    const double a = edges[iv], b = edges[iv + 1];
    auto mu_of = [&](double t) {
      if (std::isinf(a) && std::isinf(b)) return std::tan(std::numbers::pi * (t - 0.5));
      if (std::isinf(a)) return b - (1 - t) / t;
      if (std::isinf(b)) return a + t / (1 - t);
      return a + (b - a) * t;
    };
    std::vector<double> ts(kSamples), ss(kSamples);
    for (int k = 0; k < kSamples; ++k) {
      ts[static_cast<std::size_t>(k)] = 0.5 - 0.5 * std::cos(std::numbers::pi * (k + 0.5) / kSamples);
      ss[static_cast<std::size_t>(k)] = secular(mu_of(ts[static_cast<std::size_t>(k)]));
    }
    for (int k = 0; k < kSamples; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      if (ss[uk] == 0) consider(wt_of(mu_of(ts[uk])));
      if (k + 1 < kSamples && ss[uk] * ss[uk + 1] < 0) {
        double lo = ts[uk], hi = ts[uk + 1], slo = ss[uk];
        for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
          const double mid = (lo + hi) / 2;
          const double sm = secular(mu_of(mid));
          if ((sm < 0) == (slo < 0)) {
            lo = mid;
            slo = sm;
          } else {
            hi = mid;
          }
        }
        consider(wt_of(mu_of((lo + hi) / 2)));
      }
      // touching roots show up as a local minimum of |s| without a sign change
      if (k > 0 && k + 1 < kSamples && std::abs(ss[uk]) < std::abs(ss[uk - 1]) && std::abs(ss[uk]) < std::abs(ss[uk + 1]) &&
          ss[uk - 1] * ss[uk + 1] > 0) {
        double lo = ts[uk - 1], hi = ts[uk + 1];
        constexpr double g = 0.6180339887498949;
        for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
          const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
          if (std::abs(secular(mu_of(m1))) < std::abs(secular(mu_of(m2)))) hi = m2;
          else lo = m1;
        }
        consider(wt_of(mu_of((lo + hi) / 2)));
      }
    }
  }

  // Hard case: the numerator of an eigen-coordinate vanishes at its pole and
  // that coordinate is free on a sphere centred at q.
  const double scale = 1.0 + qt.cwiseAbs().maxCoeff() + bt_.cwiseAbs().maxCoeff();
  for (double p : poles) {
    std::vector<Eigen::Index> group;
    for (Eigen::Index j = 0; j < m; ++j)
      if (lambda_[j] != 0 && std::abs(1 + p * lambda_[j]) <= 1e-12) group.push_back(j);
    bool degenerate = !group.empty();
    for (Eigen::Index j : group)
      if (std::abs(qt[j] - p * bt_[j] / 2) > 1e-10 * scale) degenerate = false;
    if (!degenerate) continue;
    Vec wt(m);
    double rest = c_;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (std::find(group.begin(), group.end(), j) != group.end()) continue;
      wt[j] = (qt[j] - p * bt_[j] / 2) / (1 + p * lambda_[j]);
      rest += lambda_[j] * wt[j] * wt[j] + bt_[j] * wt[j];
    }
    const double lg = -1.0 / p;
    double bsq = 0;
    for (Eigen::Index j : group) bsq += bt_[j] * bt_[j];
    const double r2 = (bsq / (4 * lg) - rest) / lg;
    if (r2 < 0) continue;
    for (Eigen::Index j : group) wt[j] = -bt_[j] / (2 * lg);
    wt[group.front()] += std::sqrt(r2);
    consider(wt);
  }

  // Singular boundary points (gradient zero).
  {
    Vec wt(m);
    bool consistent = true;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (lambda_[j] != 0) wt[j] = -bt_[j] / (2 * lambda_[j]);
      else if (std::abs(bt_[j]) > 1e-12 * scale) consistent = false;
      else wt[j] = qt[j];
    }
    if (consistent) consider(wt);
  }
  return best;
}

// ---------------------------------------------------------------------------
// PreferenceMap

PreferenceMap::PreferenceMap(int player, int own_offset, int own_dim, int joint_dim, Variant v)
    : player_(player), own_offset_(own_offset), own_dim_(own_dim), joint_dim_(joint_dim), v_(std::move(v)) {
  if (own_dim <= 0 || joint_dim <= 0 || own_offset < 0 || own_offset + own_dim > joint_dim)
    throw InputError("PreferenceMap: inconsistent dimensions");
}

PreferenceMap PreferenceMap::utility(int player, int own_offset, int own_dim, Polynomial u, double delta) {
  if (delta < 0) throw InputError("PreferenceMap: strictness margin must be nonnegative");
  const int n = u.nvars();
  PreferenceMap P(player, own_offset, own_dim, n, UtilityInduced{std::move(u), delta});
  P.finish();
  return P;
}

PreferenceMap PreferenceMap::direction(int player, int own_offset, int own_dim, int joint_dim, Mat slope, Vec intercept,
                                       double delta) {
  if (delta < 0) throw InputError("PreferenceMap: offset must be nonnegative");
  if (slope.rows() != own_dim || slope.cols() != joint_dim || intercept.size() != own_dim)
    throw InputError("PreferenceMap: direction field has wrong shape");
  PreferenceMap P(player, own_offset, own_dim, joint_dim, DirectionField{std::move(slope), std::move(intercept), delta});
  P.finish();
  return P;
}

PreferenceMap PreferenceMap::sampled(int player, int own_offset, int own_dim, int joint_dim, SampledTable table) {
  const auto m = static_cast<std::size_t>(joint_dim + own_dim);
  if (table.counts.size() != m || table.origin.size() != static_cast<Eigen::Index>(m))
    throw InputError("PreferenceMap: sampled table must span the graph space (x, z)");
  if (!(table.step > 0)) throw InputError("PreferenceMap: sampled table step must be positive");
  for (int c : table.counts)
    if (c <= 0) throw InputError("PreferenceMap: sampled table counts must be positive");
  if (table.preferred.size() != table.cell_count()) throw InputError("PreferenceMap: sampled table size mismatch");
  PreferenceMap P(player, own_offset, own_dim, joint_dim, std::move(table));
  P.finish();
  return P;
}

void PreferenceMap::finish() {
  const int n = joint_dim_, m = joint_dim_ + own_dim_;
  if (auto* u = std::get_if<UtilityInduced>(&v_)) {
    // gap(x', z') = u(x'_{-i}, z') - u(x') - delta over the graph space
    std::vector<Polynomial> lifted, swapped;
    for (int k = 0; k < n; ++k) {
      lifted.push_back(Polynomial::variable(m, k));
      const bool own = k >= own_offset_ && k < own_offset_ + own_dim_;
      swapped.push_back(Polynomial::variable(m, own ? n + (k - own_offset_) : k));
    }
    gap_ = u->utility.substitute(swapped) - u->utility.substitute(lifted) - Polynomial::constant(m, u->delta);
    for (int k = 0; k < own_dim_; ++k) own_grad_.push_back(u->utility.derivative(own_offset_ + k));
    std::vector<int> zvars;
    for (int k = 0; k < own_dim_; ++k) zvars.push_back(n + k);
    halfspace_valued_ = gap_->degree_in(zvars) <= 1;
  } else if (auto* d = std::get_if<DirectionField>(&v_)) {
    Polynomial g = Polynomial::constant(m, -d->delta);
    for (int j = 0; j < own_dim_; ++j) {
      Polynomial cj = Polynomial::constant(m, d->intercept[j]);
      for (int k = 0; k < n; ++k)
        if (d->slope(j, k) != 0) cj = cj + d->slope(j, k) * Polynomial::variable(m, k);
      g = g + cj * (Polynomial::variable(m, n + j) - Polynomial::variable(m, own_offset_ + j));
    }
    gap_ = std::move(g);
    halfspace_valued_ = true;
  }
  if (gap_ && gap_->degree() <= 2) quadric_.emplace(gap_->quadratic_form());
}

Vec PreferenceMap::with_own(const Vec& x, const Vec& z) const {
  Vec out = x;
  out.segment(own_offset_, own_dim_) = z;
  return out;
}

const Polynomial& PreferenceMap::gap_polynomial() const {
  if (!gap_) throw InputError("PreferenceMap: sampled tables have no gap polynomial");
  return *gap_;
}

double PreferenceMap::gap(const Vec& x, const Vec& z) const {
  if (auto* u = std::get_if<UtilityInduced>(&v_))
    return u->utility.eval(with_own(x, z)) - u->utility.eval(x) - u->delta;
  if (auto* d = std::get_if<DirectionField>(&v_)) {
    const Vec c = d->slope * x + d->intercept;
    if (c.isZero(0)) return -std::max(d->delta, 0.0);
    return c.dot(z - own(x)) - d->delta;
  }
  throw InputError("PreferenceMap: sampled tables have no gap function");
}

Vec PreferenceMap::direction_at(const Vec& x) const {
  const auto& d = std::get<DirectionField>(v_);
  return d.slope * x + d.intercept;
}

Vec PreferenceMap::own_gradient(const Vec& x) const {
  Vec g(own_dim_);
  for (int k = 0; k < own_dim_; ++k) g[k] = own_grad_[static_cast<std::size_t>(k)].eval(x);
  return g;
}

// ---------------------------------------------------------------------------
// Operations

bool preferred(const PreferenceMap& P, const Vec& x, const Vec& z) {
  require_dim(P.joint_dim(), x.size(), "preferred");
  require_dim(P.own_dim(), z.size(), "preferred");
  if (auto* t = std::get_if<SampledTable>(&P.variant())) {
    const auto cell = t->locate(concat(x, z));
    if (!cell) throw InputError("preferred: sampled preference queried off its declared grid");
    return t->preferred[*cell] != 0;
  }
  return P.gap(x, z) > 0;
}

std::vector<Vec> sample_preferred(const PreferenceMap& P, const Vec& x, const ConvexSetd& region, int budget,
                                  std::uint64_t seed) {
  require_dim(P.joint_dim(), x.size(), "sample_preferred");
  require_dim(P.own_dim(), region.dim(), "sample_preferred");
  if (budget < 1) throw InputError("sample_preferred: budget must be at least 1");
  std::vector<Vec> out;
  if (auto* t = std::get_if<SampledTable>(&P.variant())) {
    const int n = P.joint_dim();
    std::vector<std::vector<double>> axes;
    for (int k = 0; k < P.own_dim(); ++k) {
      std::vector<double> ax;
      for (int c = 0; c < t->counts[static_cast<std::size_t>(n + k)]; ++c) ax.push_back(t->origin[n + k] + t->step * c);
      axes.push_back(std::move(ax));
    }
    for (const auto& z : cartesian(axes)) {
      if (static_cast<int>(out.size()) >= budget) break;
      if (region.contains(z, 1e-12) && preferred(P, x, z)) out.push_back(z);
    }
    return out;
  }

  const Box<double> bb = region.bounding_box();
  const Eigen::Index d = P.own_dim();
  const int grid_budget = std::max(1, budget / 2);
  const int per_axis =
      std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(grid_budget), 1.0 / static_cast<double>(d)) + 1e-9)));
  std::vector<std::vector<double>> axes;
  for (Eigen::Index k = 0; k < d; ++k) axes.push_back(linspace(bb.lower[k], bb.upper[k], per_axis));
  const auto grid = cartesian(axes);
  int tried = 0;
  for (const auto& z : grid) {
    ++tried;
    if (region.contains(z, 0) && preferred(P, x, z)) out.push_back(z);
  }
  Rng rng = RngKey(seed).tag(static_cast<std::uint64_t>(P.player())).tag(x).make();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (; tried < budget; ++tried) {
    Vec z(d);
    for (Eigen::Index k = 0; k < d; ++k) z[k] = bb.lower[k] + (bb.upper[k] - bb.lower[k]) * unit(rng);
    if (region.contains(z, 0) && preferred(P, x, z)) out.push_back(z);
  }
  return out;
}

bool hull_preferred(const PreferenceMap& P, const Vec& x, const Vec& z, int sample_budget, const ConvexSetd& region,
                    std::uint64_t seed) {
  require_dim(P.own_dim(), z.size(), "hull_preferred");
  if (P.halfspace_valued()) return preferred(P, x, z);
  if (!P.is_sampled() && preferred(P, x, z)) return true;
  const auto samples = sample_preferred(P, x, region, sample_budget, seed);
  return in_hull(std::span<const Vec>(samples), z);
}

namespace {

double distance_to_region_edge(const Box<double>& region, const Vec& w) {
  double edge = kInf;
  for (Eigen::Index k = 0; k < w.size(); ++k)
    edge = std::min({edge, w[k] - region.lower[k], region.upper[k] - w[k]});
  return std::max(edge, 0.0);
}

/// Nearest lattice point (spacing h) of the region with gap <= 0, searched in
/// growing Chebyshev shells around w and capped at `cap`.
double grid_complement_distance(const Polynomial& gap, const Box<double>& region, double h, const Vec& w, double cap) {
  const Eigen::Index m = w.size();
  std::vector<long long> center(static_cast<std::size_t>(m));
  long long max_radius = 0;
  for (Eigen::Index k = 0; k < m; ++k) {
    center[static_cast<std::size_t>(k)] = std::llround(w[k] / h);
    max_radius = std::max(max_radius, static_cast<long long>(std::ceil((region.upper[k] - region.lower[k]) / h)) + 1);
  }
  double best = cap;
  std::vector<long long> off(static_cast<std::size_t>(m));
  for (long long r = 0; r <= max_radius; ++r) {
    if ((static_cast<double>(r) - 0.5) * h >= best) break;
    std::fill(off.begin(), off.end(), -r);
    for (;;) {
      long long ring = 0;
      for (auto o : off) ring = std::max(ring, std::abs(o));
      if (ring == r) {
        Vec p(m);
        bool inside = true;
        for (Eigen::Index k = 0; k < m; ++k) {
          p[k] = static_cast<double>(center[static_cast<std::size_t>(k)] + off[static_cast<std::size_t>(k)]) * h;
          if (p[k] < region.lower[k] - 1e-12 || p[k] > region.upper[k] + 1e-12) inside = false;
        }
        if (inside && gap.eval(p) <= 0) best = std::min(best, (p - w).norm());
      }
      std::size_t k = off.size();
      while (k-- > 0) {
        if (++off[k] <= r) break;
        off[k] = -r;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
  }
  return best;
}

}  // namespace

double graph_distance(const PreferenceMap& P, const GraphDistanceContext& ctx, const Vec& y, const Vec& z) {
  require_dim(P.joint_dim(), y.size(), "graph_distance");
  require_dim(P.own_dim(), z.size(), "graph_distance");
  const Vec w = concat(y, z);
  require_dim(ctx.region.lower.size(), w.size(), "graph_distance region");
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w[k] < ctx.region.lower[k] - 1e-9 || w[k] > ctx.region.upper[k] + 1e-9)
      throw InputError("graph_distance: query point outside the distance region");
  const double edge = distance_to_region_edge(ctx.region, w);

  if (auto* t = std::get_if<SampledTable>(&P.variant())) {
    // half the gap between the nearest non-preferred and nearest preferred
    // cell: positive exactly where the nearest cell is preferred
    double d_in = kInf, d_out = kInf;
    for (std::size_t cell = 0; cell < t->cell_count(); ++cell) {
      const double d = (t->point(cell) - w).norm();
      if (t->preferred[cell]) d_in = std::min(d_in, d);
      else d_out = std::min(d_out, d);
    }
    if (std::isinf(d_in)) return 0.0;
    if (std::isinf(d_out)) return edge;
    return std::max(0.0, (d_out - d_in) / 2);
  }
  if (!preferred(P, y, z)) return 0;
  if (P.complement_quadric() && !ctx.force_grid) return std::min(edge, P.complement_quadric()->distance(w));
  if (!(ctx.grid_h > 0)) throw InputError("graph_distance: grid resolution must be positive");
  return grid_complement_distance(P.gap_polynomial(), ctx.region, ctx.grid_h, w, edge);
}

}  // namespace projgnep
