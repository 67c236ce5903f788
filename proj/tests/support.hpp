#pragma once

#include "projgnep/problem_io.hpp"

#include <initializer_list>
#include <string>

namespace testing_support {

inline projgnep::Vec vec(std::initializer_list<double> v) {
  projgnep::Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

inline std::string fixture_path(const std::string& name) {
  return std::string(PROJGNEP_FIXTURE_DIR) + "/" + name + ".gnep";
}

inline projgnep::Problem fixture(const std::string& name) { return projgnep::load_problem(fixture_path(name)); }

}  // namespace testing_support
