#pragma once

// Game instances (X_i, K_i, P_i), the search domain, and the projected-solution
// certificate.

#include "projgnep/geometry.hpp"
#include "projgnep/preferences.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace projgnep {

/// x -> A x + b.
struct AffineMap {
  Mat A;
  Vec b;

  Vec operator()(const Vec& x) const { return A * x + b; }
  /// Componentwise range of A x + b over x in `box` (exact for affine maps).
  Box<double> range(const Box<double>& box) const;
};

/// Parses one affine expression in x1..xn into a single-row map.
AffineMap parse_affine(std::string_view text, int nvars, int line = 1, int column = 1);

struct MovingBox {
  AffineMap lower;
  AffineMap upper;
};

/// Rows <normal_k, z> <= offsets(x)_k.
struct MovingPolytope {
  std::vector<Vec> normals;
  AffineMap offsets;
};

class ConstraintMap {
 public:
  using Variant = std::variant<MovingBox, MovingPolytope>;

  static ConstraintMap moving_box(int player, AffineMap lower, AffineMap upper);
  static ConstraintMap moving_polytope(int player, std::vector<Vec> normals, AffineMap offsets);

  int player() const { return player_; }
  int own_dim() const { return own_dim_; }
  int joint_dim() const { return joint_dim_; }
  const Variant& variant() const { return v_; }

  /// K_i(x); throws InputError when the value is empty.
  ConvexSetd at(const Vec& x) const;
  /// Axis-aligned box containing K_i(x) for every x in `xbox`.
  Box<double> hull_bound(const Box<double>& xbox) const;

 private:
  ConstraintMap(int player, int own_dim, int joint_dim, Variant v)
      : player_(player), own_dim_(own_dim), joint_dim_(joint_dim), v_(std::move(v)) {}

  int player_;
  int own_dim_;
  int joint_dim_;
  Variant v_;
};

struct SolverConfig {
  double h = 0.01;
  std::optional<double> eps;  // unset: 2h for solvers, 1e-6 for verify
  int max_iter = 500;
  double lambda = 1.0;
  int multistart = 8;
  int random_budget = 512;
  std::uint64_t seed = 0;
  double delta = 0;                // default strictness margin of utility preferences
  std::optional<double> grid_h;    // graph-distance grid, unset: h
  int angular_resolution = 0;      // separator scan, 0: automatic
  double region_margin = 1.0;      // inflation of the graph-distance region

  double eps_or(double fallback) const { return eps.value_or(fallback); }
  double solver_eps() const { return eps.value_or(2 * h); }
  double distance_h() const { return grid_h.value_or(h); }
  void validate() const;
};

/// Outcome of the load-time hypothesis checks.
struct HypothesisSummary {
  bool nonempty_by_intervals = false;  // lower <= upper proven over bbox(X)
  int nonempty_probes = 0;
  int self_exclusion_probes = 0;
  int self_exclusion_budget = 0;
};

class GameInstance {
 public:
  struct Options {
    int probe_per_axis = 21;
    int self_exclusion_budget = 64;
    std::uint64_t seed = 0;
    bool run_checks = true;
  };

  /// Validates dimensions, computes Q, and runs the load-time checks
  /// (nonempty K values on X probes, self-exclusion on Q probes).
  static GameInstance build(std::vector<int> dims, std::vector<ConvexSetd> choice_sets,
                            std::vector<ConstraintMap> constraints, std::vector<PreferenceMap> preferences,
                            const Options& opts);
  static GameInstance build(std::vector<int> dims, std::vector<ConvexSetd> choice_sets,
                            std::vector<ConstraintMap> constraints, std::vector<PreferenceMap> preferences) {
    return build(std::move(dims), std::move(choice_sets), std::move(constraints), std::move(preferences), Options{});
  }

  int players() const { return static_cast<int>(dims_.size()); }
  int joint_dim() const { return n_; }
  int dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }
  int offset(int i) const { return offsets_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& dims() const { return dims_; }
  const ConvexSetd& choice_set(int i) const { return choice_[static_cast<std::size_t>(i)]; }
  const ConstraintMap& constraint(int i) const { return K_[static_cast<std::size_t>(i)]; }
  const PreferenceMap& preference(int i) const { return P_[static_cast<std::size_t>(i)]; }
  bool utility_reducible() const { return utility_reducible_; }
  const HypothesisSummary& hypotheses() const { return summary_; }

  Vec block(const Vec& x, int i) const { return x.segment(offset(i), dim(i)); }

  /// Product choice set X.
  Vec project_X(const Vec& y) const;
  bool in_X(const Vec& x, double tol = 1e-9) const;
  Box<double> X_bounds() const;
  /// Q: box containing K(x) for every x in X.
  const Box<double>& Q() const { return Q_; }
  Box<double> Q_block(int i) const;

  /// Region of the graph space of player i used for g_i.
  GraphDistanceContext graph_context(int i, const SolverConfig& cfg) const;

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int n_ = 0;
  std::vector<ConvexSetd> choice_;
  std::vector<ConstraintMap> K_;
  std::vector<PreferenceMap> P_;
  bool utility_reducible_ = false;
  Box<double> Q_;
  HypothesisSummary summary_;
};

GameInstance from_utilities(std::vector<int> dims, std::vector<ConvexSetd> choice_sets,
                            std::vector<ConstraintMap> constraints, const std::vector<Polynomial>& utilities,
                            double delta = 0, const GameInstance::Options& opts = {});

/// Lattice points (spacing h) of a convex set: the box lattice of its bounding
/// box, filtered by membership.
std::vector<Vec> set_grid(const ConvexSetd& S, double h);
/// Joint lattice of X in lexicographic order.
std::vector<Vec> joint_grid(const GameInstance& G, double h);

/// K_i(x) for x in X.
ConvexSetd constraint_set(const GameInstance& G, int i, const Vec& x);

struct PlayerRecord {
  double membership_residual = 0;
  std::optional<Vec> witness;       // point of P_i(y) ∩ K_i(x)
  double emptiness_resolution = 0;  // grid spacing of the emptiness scan
  int random_samples = 0;
};

struct Certificate {
  Vec x;
  Vec y;
  double projection_residual = 0;
  std::vector<PlayerRecord> players;
  double eps = 0;
  bool pass = false;
  std::string reason;  // empty on pass: "projection", "membership[i]", "preference[i]"

  // clustering metadata (oracle and grid solvers)
  int cluster_size = 1;
  std::optional<Box<double>> cluster_x;
  std::optional<Box<double>> cluster_y;

  double total_residual() const;
  std::string verdict() const { return pass ? "pass" : "fail(" + reason + ")"; }
};

/// Per-player membership residual plus a scan of K_i(x_fix) (lattice at cfg.h
/// plus cfg.random_budget seeded samples) for z in P_i(y).
std::vector<PlayerRecord> check_nep(const GameInstance& G, const Vec& x_fix, const Vec& y, const SolverConfig& cfg);

Certificate check_projected_solution(const GameInstance& G, const Vec& x_tilde, const Vec& y_tilde,
                                     const SolverConfig& cfg, double eps);

}  // namespace projgnep
