// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "projgnep/cli.hpp"
#include "projgnep/normal_op.hpp"
#include "projgnep/solvers.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

using namespace projgnep;

namespace {

using Clock = std::chrono::steady_clock;

std::string path_of(const std::string& name) { return std::string(PROJGNEP_FIXTURE_DIR) + "/" + name + ".gnep"; }
Problem load(const std::string& name) { return load_problem(path_of(name)); }

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double box_distance(const Box<double>& b, const Vec& p) { return (p - p.cwiseMax(b.lower).cwiseMin(b.upper)).norm(); }

struct Outcome {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

SolverConfig at_h(const Problem& p, double h) {
  SolverConfig c = p.config;
  c.h = h;
  return c;
}

bool near_point(const Certificate& c, const Vec& x, const Vec& y, double tol) {
  return (c.x - x).lpNorm<Eigen::Infinity>() <= tol && (c.y - y).lpNorm<Eigen::Infinity>() <= tol;
}

Outcome criterion1() {
  Outcome o;
  const auto P = load("expand");
  const SolverConfig cfg = at_h(P, 0.01);
  const Vec xs = v2(1, 1), ys = v2(2, 2);
  auto t0 = Clock::now();
  const auto oracle = brute_force_oracle(P.game, cfg);
  if (seconds_since(t0) >= 10) o.fail("oracle slower than 10 s");
  if (oracle.size() != 1 || !near_point(oracle[0], xs, ys, 0.02)) o.fail("oracle clusters: " + std::to_string(oracle.size()));
  t0 = Clock::now();
  const auto fp = solve_fixed_point(P.game, cfg).certificates;
  if (seconds_since(t0) >= 10) o.fail("solve_fixed_point slower than 10 s");
  if (fp.empty() || !near_point(fp[0], xs, ys, 2 * cfg.h)) o.fail("solve_fixed_point missed (1,1),(2,2)");
  t0 = Clock::now();
  const auto qvi = solve_qvi(P.game, cfg).certificates;
  if (seconds_since(t0) >= 10) o.fail("solve_qvi slower than 10 s");
  if (qvi.empty() || !near_point(qvi[0], xs, ys, 2 * cfg.h)) o.fail("solve_qvi missed (1,1),(2,2)");
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto P = load("selfmap");
  const SolverConfig cfg = at_h(P, 0.01);
  const Vec c = v2(0.5, 0.5);
  const auto t0 = Clock::now();
  std::vector<std::pair<std::string, std::vector<Certificate>>> runs = {
      {"oracle", brute_force_oracle(P.game, cfg)},
      {"solve_fixed_point", solve_fixed_point(P.game, cfg).certificates},
      {"solve_qvi", solve_qvi(P.game, cfg).certificates}};
  if (seconds_since(t0) >= 10) o.fail("slower than 10 s");
  for (const auto& [name, certs] : runs) {
    if (certs.empty()) o.fail(name + " returned nothing");
    for (const auto& k : certs) {
      if (!near_point(k, c, c, 2 * cfg.h)) o.fail(name + " certificate away from (0.5,0.5)");
      if ((k.x - k.y).norm() > 2 * cfg.h) o.fail(name + " has |x - y| > 2h");
    }
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto P = load("spin");
  const SolverConfig cfg = at_h(P, 0.01);
  const auto t0 = Clock::now();
  const auto oracle = brute_force_oracle(P.game, cfg);
  const Certificate* target = nullptr;
  for (const auto& c : oracle) {
    const auto& bx = *c.cluster_x;
    const auto& by = *c.cluster_y;
    if ((bx.lower - v2(1, 0.5)).lpNorm<Eigen::Infinity>() <= 0.02 &&
        (bx.upper - v2(1, 0.5)).lpNorm<Eigen::Infinity>() <= 0.02 && std::abs(by.lower[1] - 0.5) <= 0.02 &&
        std::abs(by.upper[1] - 0.5) <= 0.02 && by.lower[0] >= 1 - 0.02 && by.upper[0] <= 1.25 + 0.02)
      target = &c;
  }
  if (!target) o.fail("no oracle cluster at x = (1, 0.5)");
  const auto fp = solve_fixed_point(P.game, cfg);
  bool hit = false;
  if (target)
    for (const auto& c : fp.certificates)
      if (box_distance(*target->cluster_x, c.x) <= 2 * cfg.h && box_distance(*target->cluster_y, c.y) <= 2 * cfg.h)
        hit = true;
  if (!hit) o.fail("solve_fixed_point did not certify a point in the cluster");
  if (seconds_since(t0) >= 30) o.fail("slower than 30 s");
  return o;
}

const std::vector<std::string> kFixtures = {"expand", "selfmap", "spin", "chase", "ball", "flat", "sampled"};

Outcome criterion4() {
  Outcome o;
  long violations = 0;
  for (const auto& name : kFixtures) {
    const auto P = load(name);
    const auto& G = P.game;
    Rng rng = RngKey(4).tag(std::hash<std::string>{}(name)).make();
    for (int i = 0; i < G.players(); ++i) {
      const auto ctx = G.graph_context(i, P.config);
      const Eigen::Index n = G.joint_dim();
      auto draw = [&] {
        Vec w(ctx.region.lower.size());
        for (Eigen::Index k = 0; k < w.size(); ++k)
          w[k] = std::uniform_real_distribution<double>(ctx.region.lower[k], ctx.region.upper[k])(rng);
        return w;
      };
      for (int t = 0; t < 1000; ++t) {
        const Vec a = draw(), b = draw();
        const double ga = graph_distance(G.preference(i), ctx, a.head(n), a.tail(a.size() - n));
        const double gb = graph_distance(G.preference(i), ctx, b.head(n), b.tail(b.size() - n));
        if (std::abs(ga - gb) > (a - b).norm() + 1e-9) ++violations;
      }
    }
  }
  if (violations) o.fail(std::to_string(violations) + " Lipschitz violations");
  return o;
}

ConvexSetd random_set(Rng& rng) {
  std::uniform_int_distribution<int> kind(0, 2), dim(1, 4);
  std::uniform_real_distribution<double> u(-2, 2), pos(0.1, 1.5);
  std::normal_distribution<double> g;
  const int d = dim(rng);
  Vec c(d);
  for (int k = 0; k < d; ++k) c[k] = u(rng);
  const int which = kind(rng);
  if (which == 0) {
    Vec lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      lo[k] = c[k] - pos(rng);
      hi[k] = c[k] + pos(rng);
    }
    return ConvexSetd::box(lo, hi);
  }
  if (which == 1) return ConvexSetd::ball(c, pos(rng));
  std::vector<Halfspace<double>> rows;
  const int m = d + 1 + static_cast<int>(rng() % 4);
  for (int r = 0; r < m; ++r) {
    Vec n(d);
    for (int k = 0; k < d; ++k) n[k] = g(rng);
    if (n.norm() < 1e-3) n[0] = 1;
    rows.push_back({n, n.dot(c) + pos(rng) * n.norm()});
  }
  return ConvexSetd::polytope(rows);
}

Outcome criterion5() {
  Outcome o;
  Rng rng = RngKey(5).tag(0x70726f6aULL).make();
  std::uniform_real_distribution<double> u(-4, 4);
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto S = random_set(rng);
    Vec a(S.dim()), b(S.dim());
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
    }
    const Vec pa = project(S, a), pb = project(S, b);
    if ((project(S, pa) - pa).norm() > 1e-9) ++violations;
    if ((pa - pb).norm() > (a - b).norm() + 1e-9) ++violations;
    if (projection_vi_residual(S, a, pa, 500, static_cast<std::uint64_t>(t)) < -1e-9) ++violations;
  }
  if (violations) o.fail(std::to_string(violations) + " projection violations");
  return o;
}

/// Evaluation points: 21 per axis over Q (2D joint), 21x21 over the own
/// square for a single 2D player, table points for sampled preferences.
std::vector<Vec> evaluation_points(const Problem& P) {
  const auto& G = P.game;
  if (G.preference(0).is_sampled()) {
    std::vector<Vec> out;
    for (double x : lattice_1d(G.X_bounds().lower[0], G.X_bounds().upper[0], P.config.h)) out.push_back(Vec::Constant(1, x));
    return out;
  }
  std::vector<std::vector<double>> axes;
  for (Eigen::Index k = 0; k < G.Q().lower.size(); ++k) axes.push_back(linspace(G.Q().lower[k], G.Q().upper[k], 21));
  return cartesian(axes);
}

Outcome criterion6() {
  Outcome o;
  SolverConfig cfg;
  cfg.random_budget = 128;
  for (const auto& name : kFixtures) {
    const auto P = load(name);
    const auto& G = P.game;
    SolverConfig c = cfg;
    c.h = P.config.h;
    for (const auto& x : evaluation_points(P))
      for (int i = 0; i < G.players(); ++i) {
        const auto f = normal_operator(G, i, x, c);
        const Vec xi = G.block(x, i);
        if (f.is_full_space) {
          if (!factor_contains(f, Vec::Zero(G.dim(i)))) o.fail(name + ": full-space factor misses 0");
          continue;
        }
        if (f.directions.empty()) {
          o.fail(name + ": no direction at nonempty preference");
          continue;
        }
        const auto samples = preferred_samples(G, i, x, c);
        const bool strict = G.preference(i).halfspace_valued();
        for (const auto& d : f.directions)
          for (const auto& z : samples) {
            const double s = d.dot(z - xi);
            if (s > 1e-9 || (strict && s >= 0)) o.fail(name + ": polar inequality violated at x = " + format_vec(x));
          }
      }
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto t0 = Clock::now();
  for (const std::string name : {"expand", "selfmap", "flat", "chase", "ball"}) {
    const auto P = load(name);
    if (!P.game.utility_reducible()) o.fail(name + " is not utility reducible");
    const SolverConfig cfg = at_h(P, 0.05);
    const double eps = cfg.h;
    const auto rows = qvi_scan(P.game, cfg, eps);
    auto matched = [&](const ScanRow& r, bool want_qvi) {
      for (const auto& s : rows)
        if ((want_qvi ? s.qvi_ok : s.certified) && (s.y - r.y).lpNorm<Eigen::Infinity>() <= cfg.h + 1e-9) return true;
      return false;
    };
    int unmatched = 0;
    for (const auto& r : rows) {
      if (r.qvi_ok && !r.certified && !matched(r, false)) ++unmatched;
      if (r.certified && !r.qvi_ok && !matched(r, true)) ++unmatched;
    }
    if (unmatched) o.fail(name + ": " + std::to_string(unmatched) + " unmatched grid pairs");
  }
  if (seconds_since(t0) >= 60) o.fail("slower than 60 s");
  return o;
}

Outcome criterion8() {
  Outcome o;
  for (const auto& name : kFixtures)
    for (const std::string cmd : {"solve-fp", "solve-qvi", "oracle"}) {
      std::vector<std::string> args = {cmd, path_of(name), "--seed", "11"};
      if (name != "sampled") args.insert(args.end(), {"--h", "0.05"});
      std::ostringstream a, b, ea, eb;
      const int ca = run(args, a, ea), cb = run(args, b, eb);
      if (ca != cb || a.str() != b.str()) o.fail(cmd + " " + name + " reports differ");
    }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"expand: oracle, fixed point and QVI agree on (1,1),(2,2)", criterion1},
      {"selfmap: all solvers collapse to (0.5,0.5)", criterion2},
      {"spin: oracle cluster at x=(1,0.5), fixed point lands in it", criterion3},
      {"graph distance is 1-Lipschitz on every fixture", criterion4},
      {"projection idempotent, 1-Lipschitz, variational", criterion5},
      {"normal operator directions satisfy the polar inequality", criterion6},
      {"QVI residual and projected-solution check agree on grids", criterion7},
      {"reports are byte-identical across repeated runs", criterion8},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::ostringstream line;
    line << (o.ok ? "PASS" : "FAIL") << " criterion " << k + 1 << ": " << criteria[k].first;
    if (!o.ok) line << " [" << o.detail << "]";
    line << " (" << std::fixed;
    line.precision(2);
    line << seconds_since(t0) << " s)";
    std::cout << line.str() << std::endl;
    if (!o.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
