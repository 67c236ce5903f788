#pragma once

#include "projgnep/geometry.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace projgnep {

/// Sparse real polynomial in variables x1..xn.
class Polynomial {
 public:
  using Exponents = std::vector<int>;

  struct Term {
    double coef;
    Exponents exps;
  };

  /// h(w) = w^T A w + b^T w + c, A symmetric.
  struct QuadraticForm {
    Mat A;
    Vec b;
    double c = 0;
  };

  explicit Polynomial(int nvars = 0) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double value);
  static Polynomial variable(int nvars, int index);  // 0-based index

  int nvars() const { return nvars_; }
  int degree() const;
  /// Degree in the variables listed in `vars` only.
  int degree_in(const std::vector<int>& vars) const;
  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  double eval(const Vec& x) const;
  Polynomial derivative(int var) const;
  /// Replaces variable k by repl[k]; all replacements share one variable space.
  Polynomial substitute(const std::vector<Polynomial>& repl) const;
  QuadraticForm quadratic_form() const;  // requires degree() <= 2

  /// Canonical text form, re-parseable by parse_polynomial.
  std::string to_string() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double s, const Polynomial& a);
  Polynomial operator-() const { return -1.0 * *this; }
  Polynomial pow(int k) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    if (a.nvars_ != b.nvars_ || a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t k = 0; k < a.terms_.size(); ++k)
      if (a.terms_[k].coef != b.terms_[k].coef || a.terms_[k].exps != b.terms_[k].exps) return false;
    return true;
  }

 private:
  static Polynomial from_map(int nvars, const std::map<Exponents, double>& m);
  std::map<Exponents, double> to_map() const;

  int nvars_;
  std::vector<Term> terms_;  // sorted by exponent vector, no zero coefficients
};

/// Parses sums, differences, products, integer powers and parentheses over
/// numeric literals and variables x1..xn. `line`/`column` locate the text in
/// its enclosing document for error messages.
Polynomial parse_polynomial(std::string_view text, int nvars, int max_degree = 4, int line = 1, int column = 1);

/// Formats a double with 17 significant digits.
std::string format_real(double v);
/// Comma-separated components, each through format_real.
std::string format_vec(const Vec& v);

}  // namespace projgnep
