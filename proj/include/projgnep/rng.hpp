#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace projgnep {

using Rng = std::mt19937_64;

/// Seeds a fresh generator from a base seed plus call-site tags, so every
/// probing call owns its stream and results do not depend on call order.
class RngKey {
 public:
  explicit RngKey(std::uint64_t seed) { push(seed); }

  RngKey& tag(std::uint64_t value) {
    push(value);
    return *this;
  }

  RngKey& tag(const Eigen::VectorXd& v) {
    push(static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index k = 0; k < v.size(); ++k) push(std::bit_cast<std::uint64_t>(v[k]));
    return *this;
  }

  Rng make() const {
    std::seed_seq seq(words_.begin(), words_.end());
    return Rng(seq);
  }

 private:
  void push(std::uint64_t value) {
    words_.push_back(static_cast<std::uint32_t>(value & 0xffffffffu));
    words_.push_back(static_cast<std::uint32_t>(value >> 32));
  }

  std::vector<std::uint32_t> words_;
};

}  // namespace projgnep
