#include "projgnep/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace projgnep {

namespace {

constexpr double kTieTol = 1e-9;

Vec concat(const Vec& a, const Vec& b) {
  Vec w(a.size() + b.size());
  w << a, b;
  return w;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

/// Lattice values of one axis of X within [lo, hi].
std::vector<double> axis_window(const std::vector<double>& axis, double lo, double hi) {
  auto first = std::lower_bound(axis.begin(), axis.end(), lo - 1e-12);
  auto last = std::upper_bound(axis.begin(), axis.end(), hi + 1e-12);
  return {first, last};
}

}  // namespace

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

// ---------------------------------------------------------------------------
// Fixed point

BestResponse best_response_distance(const GameInstance& G, int i, const Vec& x, const Vec& y, const SolverConfig& cfg) {
  require_dim(G.joint_dim(), x.size(), "best_response_distance");
  require_dim(G.joint_dim(), y.size(), "best_response_distance");
  const ConvexSetd K = G.constraint(i).at(x);
  const GraphDistanceContext ctx = G.graph_context(i, cfg);
  const PreferenceMap& P = G.preference(i);
  const auto grid = set_grid(K, cfg.h);

  BestResponse br;
  std::vector<double> values;
  values.reserve(grid.size());
  for (const auto& z : grid) {
    const double g = graph_distance(P, ctx, y, z);
    values.push_back(g);
    br.max_value = std::max(br.max_value, g);
  }
  if (br.max_value <= 0) {
    br.maximizers = grid;
    br.selected = project(K, Vec(G.block(y, i)));
    return br;
  }
  Vec sum = Vec::Zero(G.dim(i));
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (values[k] >= br.max_value - kTieTol) {
      br.maximizers.push_back(grid[k]);
      sum += grid[k];
    }
  br.selected = sum / static_cast<double>(br.maximizers.size());
  return br;
}

FixedPointResult solve_fixed_point(const GameInstance& G, const SolverConfig& cfg) {
  cfg.validate();
  const double eps = cfg.solver_eps();
  const auto grid = joint_grid(G, cfg.h);
  if (grid.empty()) throw InputError("solve_fixed_point: X has no lattice points at this resolution");

  FixedPointResult res;
  std::vector<Certificate> found;
  for (int s = 0; s < cfg.multistart; ++s) {
    std::size_t pick = 0;
    if (s > 0) {
      Rng rng = RngKey(cfg.seed).tag(0x66707374ULL).tag(static_cast<std::uint64_t>(s)).make();
      pick = std::uniform_int_distribution<std::size_t>(0, grid.size() - 1)(rng);
    }
    StartTrace tr;
    tr.x0 = grid[pick];
    Vec x = tr.x0, y = tr.x0;
    for (tr.iterations = 0; tr.iterations < cfg.max_iter;) {
      Vec sel(G.joint_dim());
      for (int i = 0; i < G.players(); ++i)
        sel.segment(G.offset(i), G.dim(i)) = best_response_distance(G, i, x, y, cfg).selected;
      const Vec y1 = (1 - cfg.lambda) * y + cfg.lambda * sel;
      const Vec x1 = G.project_X(y1);
      const double step = concat(x1 - x, y1 - y).norm();
      x = x1;
      y = y1;
      ++tr.iterations;
      if (step <= eps) {
        tr.converged = true;
        break;
      }
    }
    tr.x = x;
    tr.y = y;
    try {
      Certificate c = check_projected_solution(G, x, y, cfg, eps);
      tr.certified = c.pass;
      if (c.pass) found.push_back(std::move(c));
    } catch (const InputError&) {
      // e.g. a sampled preference cannot be evaluated off its table grid
      tr.certified = false;
    }
    res.starts.push_back(std::move(tr));
  }
  res.certificates = cluster_certificates(std::move(found), 2 * cfg.h);
  if (res.certificates.empty())
    res.advisory = "no start produced a certified point; the iteration is a heuristic, run the brute-force oracle";
  return res;
}

// ---------------------------------------------------------------------------
// QVI residual

QVIPoint qvi_residual(const GameInstance& G, const Vec& x, const Vec& y, const Vec& y_star, const SolverConfig& cfg,
                      double eps) {
  (void)cfg;
  require_dim(G.joint_dim(), x.size(), "qvi_residual");
  require_dim(G.joint_dim(), y.size(), "qvi_residual");
  require_dim(G.joint_dim(), y_star.size(), "qvi_residual");
  QVIPoint q{x, y, y_star, 0, Vec(G.joint_dim()), Vec(G.joint_dim())};
  const Vec v = y - x;
  for (int i = 0; i < G.players(); ++i) {
    const ConvexSetd K = G.constraint(i).at(x);
    const Vec yi = G.block(y, i);
    if ((yi - project(K, yi)).norm() > eps)
      throw InputError("qvi_residual: y is not in K(x) for player " + std::to_string(i + 1));
    const Vec vi = G.block(v, i);
    const Vec eta = support_point(G.choice_set(i), vi);
    const Vec w = -G.block(y_star, i);
    const Vec z = support_point(K, w);
    q.residual += vi.dot(eta - G.block(x, i)) + w.dot(z - yi);
    q.eta.segment(G.offset(i), G.dim(i)) = eta;
    q.z.segment(G.offset(i), G.dim(i)) = z;
  }
  return q;
}

QVIPoint best_qvi_point(const GameInstance& G, const Vec& x, const Vec& y, const TValue& T, const SolverConfig& cfg,
                        double eps) {
  Vec y_star = Vec::Zero(G.joint_dim());
  bool complete = true;
  for (int i = 0; i < G.players(); ++i) {
    const ConeSample& f = T.factors[static_cast<std::size_t>(i)];
    std::vector<Vec> gens = f.directions;
    if (f.is_full_space) gens.insert(gens.begin(), Vec::Zero(G.dim(i)));
    if (gens.empty()) {
      complete = false;
      continue;
    }
    const ConvexSetd K = G.constraint(i).at(x);
    const Vec yi = G.block(y, i);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& d : gens) {
      const double r = support(K, Vec(-d)) + d.dot(yi);
      if (r < best - 1e-15) {
        best = r;
        y_star.segment(G.offset(i), G.dim(i)) = d;
      }
    }
  }
  QVIPoint q = qvi_residual(G, x, y, y_star, cfg, eps);
  if (!complete) q.residual = std::numeric_limits<double>::infinity();
  return q;
}

std::vector<ScanRow> qvi_scan(const GameInstance& G, const SolverConfig& cfg, double eps) {
  cfg.validate();
  std::vector<ScanRow> rows;
  for (const auto& y : lattice_grid(G.Q(), cfg.h)) {
    ScanRow r;
    r.y = y;
    r.x = G.project_X(y);
    r.feasible = true;
    for (int i = 0; i < G.players() && r.feasible; ++i) {
      const ConvexSetd K = G.constraint(i).at(r.x);
      const Vec yi = G.block(y, i);
      r.feasible = (yi - project(K, yi)).norm() <= eps;
    }
    r.residual = std::numeric_limits<double>::infinity();
    if (r.feasible) {
      r.residual = best_qvi_point(G, r.x, y, t_map(G, y, cfg), cfg, eps).residual;
      r.qvi_ok = r.residual <= eps;
      r.certified = check_projected_solution(G, r.x, y, cfg, eps).pass;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

QviResult solve_qvi(const GameInstance& G, const SolverConfig& cfg) {
  cfg.validate();
  const double eps = cfg.solver_eps();
  QviResult res;
  std::vector<Certificate> found;
  for (const auto& y : lattice_grid(G.Q(), cfg.h)) {
    const Vec x = G.project_X(y);
    bool feasible = true;
    for (int i = 0; i < G.players() && feasible; ++i) {
      const ConvexSetd K = G.constraint(i).at(x);
      const Vec yi = G.block(y, i);
      feasible = (yi - project(K, yi)).norm() <= eps;
    }
    if (!feasible) continue;
    QVIPoint q = best_qvi_point(G, x, y, t_map(G, y, cfg), cfg, eps);
    if (!(q.residual <= eps)) continue;
    Certificate c = check_projected_solution(G, x, y, cfg, eps);
    if (!c.pass) continue;
    found.push_back(std::move(c));
    res.points.push_back(std::move(q));
  }
  res.certificates = cluster_certificates(std::move(found), 2 * cfg.h);
  return res;
}

// ---------------------------------------------------------------------------
// Oracle

std::vector<Certificate> brute_force_oracle(const GameInstance& G, const SolverConfig& cfg) {
  cfg.validate();
  const double eps = cfg.solver_eps();
  const Box<double> xb = G.X_bounds();
  std::vector<std::vector<double>> axes;
  double window = 1;
  for (Eigen::Index k = 0; k < xb.lower.size(); ++k) {
    axes.push_back(lattice_1d(xb.lower[k], xb.upper[k], cfg.h));
    window *= std::min(static_cast<double>(axes.back().size()), 2 * eps / cfg.h + 2);
  }
  double ys = 1;
  for (Eigen::Index k = 0; k < G.Q().lower.size(); ++k)
    ys *= static_cast<double>(lattice_1d(G.Q().lower[k], G.Q().upper[k], cfg.h).size());
  if (ys * window > 1e7)
    throw InputError("oracle: about " + format_real(std::round(ys * window)) +
                     " candidate pairs exceed the 1e7 guard; use a coarser --h");

  std::vector<Certificate> found;
  for (const auto& y : lattice_grid(G.Q(), cfg.h)) {
    const Vec p = G.project_X(y);
    std::vector<std::vector<double>> local;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const auto e = static_cast<Eigen::Index>(k);
      local.push_back(axis_window(axes[k], p[e] - eps, p[e] + eps));
    }
    for (const auto& x : cartesian(local)) {
      if ((x - p).norm() > eps || !G.in_X(x, 1e-12)) continue;
      bool feasible = true;
      for (int i = 0; i < G.players() && feasible; ++i) {
        const ConvexSetd K = G.constraint(i).at(x);
        const Vec yi = G.block(y, i);
        feasible = (yi - project(K, yi)).norm() <= eps;
      }
      if (!feasible) continue;
      Certificate c = check_projected_solution(G, x, y, cfg, eps);
      if (c.pass) found.push_back(std::move(c));
    }
  }
  return cluster_certificates(std::move(found), 2 * cfg.h);
}

std::vector<Certificate> cluster_certificates(std::vector<Certificate> certs, double radius) {
  if (certs.empty()) return {};
  const std::size_t m = certs.size();
  std::vector<Vec> pts;
  for (const auto& c : certs) pts.push_back(concat(c.x, c.y));
  const Eigen::Index d = pts.front().size();

  std::map<std::vector<long long>, std::vector<std::size_t>> cells;
  auto cell_of = [&](const Vec& p) {
    std::vector<long long> key(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) key[static_cast<std::size_t>(k)] = static_cast<long long>(std::floor(p[k] / radius));
    return key;
  };
  for (std::size_t a = 0; a < m; ++a) cells[cell_of(pts[a])].push_back(a);

  DisjointSets ds(m);
  for (std::size_t a = 0; a < m; ++a) {
    const auto base = cell_of(pts[a]);
    std::vector<long long> off(static_cast<std::size_t>(d), -1);
    for (;;) {
      std::vector<long long> key = base;
      for (std::size_t k = 0; k < key.size(); ++k) key[k] += off[k];
      if (auto it = cells.find(key); it != cells.end())
        for (std::size_t b : it->second)
          if (b > a && (pts[a] - pts[b]).norm() <= radius + 1e-12) ds.unite(a, b);
      std::size_t k = off.size();
      while (k-- > 0) {
        if (++off[k] <= 1) break;
        off[k] = -1;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t a = 0; a < m; ++a) groups[ds.find(a)].push_back(a);
  std::vector<Certificate> out;
  for (const auto& [root, members] : groups) {
    std::size_t rep = members.front();
    Box<double> bx{certs[rep].x, certs[rep].x}, by{certs[rep].y, certs[rep].y};
    for (std::size_t a : members) {
      const auto& c = certs[a];
      const auto& r = certs[rep];
      const double tc = c.total_residual(), tr = r.total_residual();
      if (tc < tr || (tc == tr && (lex_less(c.x, r.x) || (c.x == r.x && lex_less(c.y, r.y))))) rep = a;
      bx = {bx.lower.cwiseMin(c.x), bx.upper.cwiseMax(c.x)};
      by = {by.lower.cwiseMin(c.y), by.upper.cwiseMax(c.y)};
    }
    Certificate c = certs[rep];
    c.cluster_size = static_cast<int>(members.size());
    c.cluster_x = bx;
    c.cluster_y = by;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Certificate& a, const Certificate& b) {
    if (a.x != b.x) return lex_less(a.x, b.x);
    return lex_less(a.y, b.y);
  });
  return out;
}

}  // namespace projgnep
