#pragma once

// Fixed-point, QVI-residual and brute-force routes to projected solutions.

#include "projgnep/game.hpp"
#include "projgnep/normal_op.hpp"

#include <optional>
#include <string>
#include <vector>

namespace projgnep {

struct BestResponse {
  std::vector<Vec> maximizers;  // grid maximizers of g_i(y, .) over K_i(x)
  double max_value = 0;
  Vec selected;  // centroid of maximizers, or project(K_i(x), y_i) when max is 0
};

BestResponse best_response_distance(const GameInstance& G, int i, const Vec& x, const Vec& y, const SolverConfig& cfg);

struct StartTrace {
  Vec x0;
  Vec x;
  Vec y;
  int iterations = 0;
  bool converged = false;
  bool certified = false;
};

struct FixedPointResult {
  std::vector<Certificate> certificates;
  std::vector<StartTrace> starts;
  std::string advisory;  // set when nothing was certified
};

FixedPointResult solve_fixed_point(const GameInstance& G, const SolverConfig& cfg);

struct QVIPoint {
  Vec x;
  Vec y;
  Vec y_star;
  double residual = 0;
  Vec eta;  // worst pair (eta, z)
  Vec z;
};

/// max over (eta, z) in X x K(x) of -[<x - y, eta - x> + <y*, z - y>],
/// evaluated through support functions. Throws when y is not in K(x) within
/// eps.
QVIPoint qvi_residual(const GameInstance& G, const Vec& x, const Vec& y, const Vec& y_star, const SolverConfig& cfg,
                      double eps);

/// Smallest residual over y* drawn from the generators of T(y) (plus 0 for
/// full-space factors). The residual separates over players, so the choice is
/// made per player.
QVIPoint best_qvi_point(const GameInstance& G, const Vec& x, const Vec& y, const TValue& T, const SolverConfig& cfg,
                        double eps);

struct ScanRow {
  Vec x;
  Vec y;
  bool feasible = false;  // y in K(x) within eps
  double residual = 0;    // +inf when infeasible
  bool qvi_ok = false;
  bool certified = false;
};

/// Every lattice point y of Q with x = project(X, y): feasibility, the best
/// QVI residual, and the projected-solution check.
std::vector<ScanRow> qvi_scan(const GameInstance& G, const SolverConfig& cfg, double eps);

struct QviResult {
  std::vector<Certificate> certificates;
  std::vector<QVIPoint> points;  // QVI survivors that also certified
};

QviResult solve_qvi(const GameInstance& G, const SolverConfig& cfg);

/// Enumerates y on the Q lattice and x on the X lattice within eps of
/// project(X, y), keeps certified pairs and clusters them.
std::vector<Certificate> brute_force_oracle(const GameInstance& G, const SolverConfig& cfg);

/// Single-linkage clusters of certificates within `radius` on (x, y); each
/// representative has the smallest total residual and carries the cluster
/// bounds. Output sorted lexicographically.
std::vector<Certificate> cluster_certificates(std::vector<Certificate> certs, double radius);

bool lex_less(const Vec& a, const Vec& b);

}  // namespace projgnep
