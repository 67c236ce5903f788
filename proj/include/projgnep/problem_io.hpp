#pragma once

// Line-oriented problem files: parsing, canonical serialization, digest.

#include "projgnep/game.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace projgnep {

struct Problem {
  GameInstance game;
  SolverConfig config;
  /// `config` lines in canonical key order, values as written back.
  std::vector<std::pair<std::string, std::string>> config_entries;
};

/// Parses and validates a problem file, running the load-time hypothesis
/// checks. Throws ParseError (with line/column) or HypothesisError.
Problem parse_problem(std::string_view text, const GameInstance::Options& opts = {});
Problem load_problem(const std::string& path, const GameInstance::Options& opts = {});

/// Canonical text; parse(serialize(p)) serializes identically.
std::string serialize(const Problem& p);

/// Lower-case hex SHA-256 of the canonical text.
std::string digest(const Problem& p);
std::string sha256_hex(std::string_view data);

/// Parses "a,b,c" into a vector.
Vec parse_real_list(std::string_view text);

}  // namespace projgnep
