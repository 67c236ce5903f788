#include "projgnep/normal_op.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace projgnep;
using testing_support::fixture;
using testing_support::vec;

namespace {

GameInstance linear_1d() {
  return parse_problem("players 1 dims 1\nplayer 1\nbox 0 1\nkbox [0] [1]\nutility x1\n").game;
}

SolverConfig small_cfg() {
  SolverConfig c;
  c.h = 0.05;
  c.random_budget = 128;
  return c;
}

}  // namespace

TEST(NormalOperator, LinearUtilityIsMinusOne) {
  const auto G = linear_1d();
  for (double x : {0.0, 0.3, 1.0}) {
    const auto f = normal_operator(G, 0, vec({x}), small_cfg());
    ASSERT_EQ(f.directions.size(), 1u);
    EXPECT_FALSE(f.is_full_space);
    EXPECT_DOUBLE_EQ(f.directions[0][0], -1);
  }
}

TEST(NormalOperator, EmptyPreferenceIsFullSpace) {
  const auto G = fixture("flat").game;
  const auto f = normal_operator(G, 0, vec({1, 1}), small_cfg());
  EXPECT_TRUE(f.is_full_space);
  EXPECT_EQ(f.preferred_samples, 0);
  EXPECT_TRUE(factor_contains(f, vec({0})));
  EXPECT_TRUE(factor_contains(f, vec({-1})));
  EXPECT_TRUE(factor_contains(f, vec({0.5})));
  EXPECT_FALSE(factor_contains(f, vec({1.5})));
}

TEST(NormalOperator, ConstantDirectionField) {
  const auto G = parse_problem(
                     "players 1 dims 2\nplayer 1\nbox 0 0 1 1\nkbox [0, 0] [1, 1]\n"
                     "direction [0.6, -0.8] offset 0\n")
                     .game;
  const auto f = normal_operator(G, 0, vec({0.5, 0.5}), small_cfg());
  ASSERT_EQ(f.directions.size(), 1u);
  EXPECT_LE((f.directions[0] - vec({-0.6, 0.8})).norm(), 1e-12);
}

TEST(NormalOperator, ScanFallbackForConcaveUtility) {
  // at the peak the gradient vanishes while P(x) is empty; off the peak the
  // gradient shortcut applies
  const auto G = fixture("selfmap").game;
  const auto peak = normal_operator(G, 0, vec({0.5, 0.5}), small_cfg());
  EXPECT_TRUE(peak.is_full_space);
  const auto left = normal_operator(G, 0, vec({0.2, 0.5}), small_cfg());
  ASSERT_FALSE(left.directions.empty());
  EXPECT_DOUBLE_EQ(left.directions[0][0], -1);
}

TEST(TMap, ExpandAtSolution) {
  const auto G = fixture("expand").game;
  const auto T = t_map(G, vec({2, 2}), small_cfg());
  ASSERT_EQ(T.factors.size(), 2u);
  for (const auto& f : T.factors) {
    ASSERT_EQ(f.directions.size(), 1u);
    EXPECT_DOUBLE_EQ(f.directions[0][0], -1);
  }
  EXPECT_TRUE(t_contains(G, T, vec({-1, -1})));
  EXPECT_FALSE(t_contains(G, T, vec({0, -1})));
}

TEST(TMap, EmptyPreferenceFactorContainsZero) {
  const auto G = fixture("flat").game;
  const auto T = t_map(G, vec({0.7, 1.2}), small_cfg());
  EXPECT_TRUE(t_contains(G, T, vec({0, 0})));
}

TEST(UnitNormalDiagnostic, Examples) {
  const auto G = linear_1d();
  const auto clean = unit_normal_diagnostic(G, 0, vec({0.3}), vec({-1}), small_cfg());
  EXPECT_TRUE(clean.clean);
  EXPECT_GT(clean.samples, 0);
  const auto dirty = unit_normal_diagnostic(G, 0, vec({0.3}), vec({1}), small_cfg());
  EXPECT_FALSE(dirty.clean);
  EXPECT_EQ(static_cast<int>(dirty.witnesses.size()), dirty.samples);
  const auto empty = unit_normal_diagnostic(fixture("flat").game, 0, vec({1, 1}), vec({1}), small_cfg());
  EXPECT_TRUE(empty.clean);
  EXPECT_EQ(empty.samples, 0);
  EXPECT_THROW(unit_normal_diagnostic(G, 0, vec({0.3}), vec({0.5}), small_cfg()), InputError);
}

TEST(NormalOperator, InvariantUnderAffineUtilityRescaling) {
  const std::string base =
      "players 2 dims 1 1\nplayer 1\nbox 0 1\nkbox [0] [1.5]\nutility U1\n"
      "player 2\nbox 0 1\nkbox [0] [1.5]\nutility U2\n";
  auto with = [&](const std::string& u1, const std::string& u2) {
    std::string t = base;
    t.replace(t.find("U1"), 2, u1);
    t.replace(t.find("U2"), 2, u2);
    return parse_problem(t).game;
  };
  const auto A = with("-(x1 - x2 - 1)^2", "-(x2 - 0.25)^2");
  const auto B = with("2*(-(x1 - x2 - 1)^2) + 3", "2*(-(x2 - 0.25)^2) + 3");
  for (double a = 0; a <= 1.5; a += 0.25)
    for (double b = 0; b <= 1.5; b += 0.25)
      for (int i = 0; i < 2; ++i) {
        const auto fa = normal_operator(A, i, vec({a, b}), small_cfg());
        const auto fb = normal_operator(B, i, vec({a, b}), small_cfg());
        EXPECT_EQ(fa.is_full_space, fb.is_full_space);
        ASSERT_EQ(fa.directions.size(), fb.directions.size());
        for (std::size_t k = 0; k < fa.directions.size(); ++k)
          EXPECT_LE((fa.directions[k] - fb.directions[k]).norm(), 1e-12);
      }
}

TEST(NormalOperator, PolarValidityAndStrictness) {
  const auto cfg = small_cfg();
  for (const char* name : {"expand", "spin", "chase", "selfmap"}) {
    const auto G = fixture(name).game;
    const Box<double> Q = G.Q();
    for (double a : linspace(Q.lower[0], Q.upper[0], 7))
      for (double b : linspace(Q.lower[1], Q.upper[1], 7))
        for (int i = 0; i < 2; ++i) {
          const Vec x = vec({a, b});
          const auto f = normal_operator(G, i, x, cfg);
          EXPECT_FALSE(f.degenerate) << name;
          if (f.is_full_space) continue;
          const auto samples = preferred_samples(G, i, x, cfg);
          std::vector<Vec> shifted;
          for (const auto& z : samples) shifted.push_back(z - G.block(x, i));
          for (const auto& d : f.directions) {
            EXPECT_NEAR(d.norm(), 1, 1e-12);
            EXPECT_TRUE(polar_membership<double>(shifted, d, 1e-9)) << name;
            if (G.preference(i).halfspace_valued())
              for (const auto& s : shifted) EXPECT_LT(d.dot(s), 0) << name;
          }
        }
  }
}
