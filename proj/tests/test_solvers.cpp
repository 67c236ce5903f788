#include "projgnep/solvers.hpp"

#include "projgnep/cli.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace projgnep;
using testing_support::fixture;
using testing_support::vec;

namespace {

SolverConfig with_h(const Problem& p, double h) {
  SolverConfig c = p.config;
  c.h = std::max(c.h, h);
  return c;
}

double box_distance(const Box<double>& b, const Vec& p) {
  return (p - p.cwiseMax(b.lower).cwiseMin(b.upper)).norm();
}

bool inside(const Certificate& c, const Vec& x, const Vec& y, double tol) {
  return box_distance(*c.cluster_x, x) <= tol && box_distance(*c.cluster_y, y) <= tol;
}

const std::vector<std::string>& all_fixtures() {
  static const std::vector<std::string> names = {"expand", "selfmap", "spin", "chase", "ball", "flat", "sampled"};
  return names;
}

}  // namespace

TEST(BestResponse, ExpandExamples) {
  const auto G = fixture("expand").game;
  SolverConfig cfg;
  const auto r0 = best_response_distance(G, 0, vec({0, 0}), vec({0, 0}), cfg);
  ASSERT_EQ(r0.maximizers.size(), 1u);
  EXPECT_DOUBLE_EQ(r0.selected[0], 1);
  EXPECT_NEAR(r0.max_value, 1 / std::sqrt(2.0), 1e-12);
  const auto r1 = best_response_distance(G, 0, vec({1, 1}), vec({2, 2}), cfg);
  EXPECT_DOUBLE_EQ(r1.max_value, 0);
  EXPECT_DOUBLE_EQ(r1.selected[0], 2);
}

TEST(FixedPoint, ExpandTrace) {
  const auto G = fixture("expand").game;
  SolverConfig cfg;
  const auto res = solve_fixed_point(G, cfg);
  ASSERT_FALSE(res.starts.empty());
  const auto& t = res.starts.front();
  EXPECT_TRUE(t.x0.isZero());
  EXPECT_TRUE(t.converged);
  EXPECT_EQ(t.iterations, 3);
  EXPECT_TRUE(t.x.isApprox(vec({1, 1})));
  EXPECT_TRUE(t.y.isApprox(vec({2, 2})));
  ASSERT_EQ(res.certificates.size(), 1u);
  EXPECT_TRUE(res.advisory.empty());
}

TEST(FixedPoint, AdvisoryWhenNothingCertified) {
  const auto G = fixture("expand").game;
  SolverConfig cfg;
  cfg.max_iter = 1;
  cfg.multistart = 1;
  const auto res = solve_fixed_point(G, cfg);
  EXPECT_TRUE(res.certificates.empty());
  EXPECT_FALSE(res.advisory.empty());
}

TEST(QviResidual, Examples) {
  const auto G = fixture("expand").game;
  SolverConfig cfg;
  EXPECT_LE(qvi_residual(G, vec({1, 1}), vec({2, 2}), vec({-1, -1}), cfg, 1e-6).residual, 1e-12);
  const auto q = qvi_residual(G, vec({0, 0}), vec({0, 0}), vec({-1, -1}), cfg, 1e-6);
  EXPECT_DOUBLE_EQ(q.residual, 2);
  EXPECT_TRUE(q.z.isApprox(vec({1, 1})));
  EXPECT_THROW(qvi_residual(G, vec({0, 0}), vec({3, 0}), vec({-1, -1}), cfg, 1e-6), InputError);
}

// The residual is convex in y*, so over a hull of generators its maximum is
// attained at a generator.
TEST(QviResidual, HullMaximumAttainedAtGenerators) {
  const auto G = fixture("chase").game;
  SolverConfig cfg;
  Rng rng = RngKey(31).make();
  std::uniform_real_distribution<double> u(-1, 1), w(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<Vec> gens;
    for (int k = 0; k < 3; ++k) gens.push_back(vec({u(rng), u(rng)}));
    const Vec y = vec({0.75, 0.25}), x = G.project_X(y);
    double gen_max = -std::numeric_limits<double>::infinity();
    for (const auto& g : gens) gen_max = std::max(gen_max, qvi_residual(G, x, y, g, cfg, 1e-6).residual);
    for (int k = 0; k < 20; ++k) {
      Vec lam = vec({w(rng), w(rng), w(rng)});
      lam /= lam.sum();
      const Vec mix = lam[0] * gens[0] + lam[1] * gens[1] + lam[2] * gens[2];
      EXPECT_LE(qvi_residual(G, x, y, mix, cfg, 1e-6).residual, gen_max + 1e-12);
    }
  }
}

TEST(SolveQvi, ExpandSingleCell) {
  const auto G = fixture("expand").game;
  SolverConfig cfg;
  cfg.h = 0.05;
  const auto res = solve_qvi(G, cfg);
  ASSERT_EQ(res.certificates.size(), 1u);
  EXPECT_TRUE(inside(res.certificates[0], vec({1, 1}), vec({2, 2}), 1e-12));
  for (const auto& p : res.points) EXPECT_TRUE(t_contains(G, t_map(G, p.y, cfg), p.y_star));
}

TEST(SolveQvi, SelfmapCentre) {
  const auto G = fixture("selfmap").game;
  SolverConfig cfg;
  cfg.h = 0.05;
  const auto res = solve_qvi(G, cfg);
  ASSERT_EQ(res.certificates.size(), 1u);
  EXPECT_TRUE(inside(res.certificates[0], vec({0.5, 0.5}), vec({0.5, 0.5}), 1e-12));
}

TEST(SolveQvi, VacuousGameKeepsEveryFeasiblePair) {
  const auto P = fixture("flat");
  const auto res = solve_qvi(P.game, P.config);
  EXPECT_EQ(res.points.size(), 21u * 21u);
}

TEST(Oracle, Examples) {
  {
    const auto G = fixture("expand").game;
    SolverConfig cfg;
    const auto certs = brute_force_oracle(G, cfg);
    ASSERT_EQ(certs.size(), 1u);
    EXPECT_LE((certs[0].x - vec({1, 1})).norm(), 0.02);
    EXPECT_LE((certs[0].y - vec({2, 2})).norm(), 0.02);
  }
  {
    const auto G = fixture("spin").game;
    SolverConfig cfg;
    cfg.h = 0.05;
    const auto certs = brute_force_oracle(G, cfg);
    bool found = false;
    for (const auto& c : certs)
      if ((c.x - vec({1, 0.5})).norm() <= 0.1 && c.cluster_y->lower[0] <= 1.0 + 0.1 && c.cluster_y->upper[0] >= 1.25 - 0.1)
        found = true;
    EXPECT_TRUE(found);
  }
  {
    const auto G = fixture("selfmap").game;
    SolverConfig cfg;
    cfg.h = 0.05;
    const auto certs = brute_force_oracle(G, cfg);
    ASSERT_EQ(certs.size(), 1u);
    EXPECT_TRUE(inside(certs[0], vec({0.5, 0.5}), vec({0.5, 0.5}), 1e-12));
  }
}

TEST(Oracle, GridGuard) {
  const auto G = fixture("expand").game;
  SolverConfig cfg;
  cfg.h = 1e-4;
  EXPECT_THROW(brute_force_oracle(G, cfg), InputError);
}

TEST(Solvers, OracleSubsumption) {
  for (const auto& name : all_fixtures()) {
    const auto P = fixture(name);
    const SolverConfig cfg = with_h(P, 0.05);
    const auto oracle = brute_force_oracle(P.game, cfg);
    auto covered = [&](const Certificate& c) {
      for (const auto& o : oracle)
        if (box_distance(*o.cluster_x, c.x) <= 2 * cfg.h + 1e-12) return true;
      return false;
    };
    for (const auto& c : solve_fixed_point(P.game, cfg).certificates) EXPECT_TRUE(covered(c)) << name;
    for (const auto& c : solve_qvi(P.game, cfg).certificates) EXPECT_TRUE(covered(c)) << name;
  }
}

TEST(Solvers, ProjectionFactorConsistency) {
  for (const char* name : {"expand", "selfmap", "chase", "ball"}) {
    const auto P = fixture(name);
    const SolverConfig cfg = with_h(P, 0.05);
    const double eps = cfg.solver_eps();
    for (const auto& q : solve_qvi(P.game, cfg).points) {
      ASSERT_LE(q.residual, eps);
      for (int i = 0; i < P.game.players(); ++i)
        EXPECT_GE(projection_vi_residual(P.game.choice_set(i), P.game.block(q.y, i), P.game.block(q.x, i), 64), -eps)
            << name;
    }
  }
}

TEST(Solvers, SelfMapCollapse) {
  const auto P = fixture("selfmap");
  const SolverConfig cfg = with_h(P, 0.05);
  std::vector<Certificate> all = brute_force_oracle(P.game, cfg);
  for (auto& c : solve_fixed_point(P.game, cfg).certificates) all.push_back(c);
  for (auto& c : solve_qvi(P.game, cfg).certificates) all.push_back(c);
  ASSERT_FALSE(all.empty());
  for (const auto& c : all) EXPECT_LE((c.x - c.y).norm(), 2 * cfg.h);
}

TEST(Solvers, Deterministic) {
  const auto P = fixture("spin");
  SolverConfig cfg = with_h(P, 0.05);
  cfg.seed = 7;
  auto render = [&] {
    const auto fp = solve_fixed_point(P.game, cfg);
    const auto qv = solve_qvi(P.game, cfg);
    return format_report("solve-fp", "solve_fixed_point", P, cfg, cfg.solver_eps(), fp.certificates, fp.advisory, "") +
           format_report("solve-qvi", "solve_qvi", P, cfg, cfg.solver_eps(), qv.certificates, "", "");
  };
  EXPECT_EQ(render(), render());
}

TEST(Cluster, MergesNeighboursAndPicksSmallestResidual) {
  auto make = [](double x, double r) {
    Certificate c;
    c.x = vec({x});
    c.y = vec({x});
    c.projection_residual = r;
    c.pass = true;
    return c;
  };
  const auto out = cluster_certificates({make(0.0, 0.3), make(0.01, 0.1), make(0.02, 0.2), make(1.0, 0)}, 0.015);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].cluster_size, 3);
  EXPECT_DOUBLE_EQ(out[0].x[0], 0.01);
  EXPECT_DOUBLE_EQ(out[0].cluster_x->lower[0], 0);
  EXPECT_DOUBLE_EQ(out[0].cluster_x->upper[0], 0.02);
  EXPECT_DOUBLE_EQ(out[1].x[0], 1);
}
