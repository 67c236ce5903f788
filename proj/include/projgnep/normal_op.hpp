#pragma once

// Normal operator of the convexified preference sets and the T-map built
// from it.

#include "projgnep/game.hpp"

#include <vector>

namespace projgnep {

/// Unit directions generating T_i = co(N ∩ sphere). With is_full_space the
/// operator is the whole space, T_i is the closed unit ball, and `directions`
/// holds a fixed sphere discretization.
struct ConeSample {
  std::vector<Vec> directions;
  int ambient_dim = 0;
  bool is_full_space = false;
  bool degenerate = false;  // preference nonempty but no separator found
  int preferred_samples = 0;
};

struct TValue {
  Vec x;
  std::vector<ConeSample> factors;
};

/// Sampled points of P_i(x) inside the player's graph-distance region.
std::vector<Vec> preferred_samples(const GameInstance& G, int i, const Vec& x, const SolverConfig& cfg);

ConeSample normal_operator(const GameInstance& G, int i, const Vec& x, const SolverConfig& cfg);
TValue t_map(const GameInstance& G, const Vec& x, const SolverConfig& cfg);

/// v in T_i: norm <= 1 for full-space factors, convex combination of the
/// stored directions otherwise.
bool factor_contains(const ConeSample& f, const Vec& v, double tol = 1e-9);
bool t_contains(const GameInstance& G, const TValue& T, const Vec& y_star, double tol = 1e-9);

struct UnitNormalReport {
  bool clean = true;
  int samples = 0;
  std::vector<Vec> witnesses;  // sampled z with <x_star, z - x_i> >= 0
};

/// Self-test of a claimed unit normal: no sampled preferred z may satisfy
/// <x_star, z - x_i> >= 0.
UnitNormalReport unit_normal_diagnostic(const GameInstance& G, int i, const Vec& x, const Vec& x_star, const SolverConfig& cfg);

}  // namespace projgnep
