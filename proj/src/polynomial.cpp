#include "projgnep/polynomial.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace projgnep {

std::string format_real(double v) {
  if (v == 0) v = 0;  // fold -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_vec(const Vec& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += ",";
    out += format_real(v[k]);
  }
  return out;
}

Polynomial Polynomial::from_map(int nvars, const std::map<Exponents, double>& m) {
  Polynomial p(nvars);
  for (const auto& [e, c] : m)
    if (c != 0) p.terms_.push_back({c, e});
  return p;
}

std::map<Polynomial::Exponents, double> Polynomial::to_map() const {
  std::map<Exponents, double> m;
  for (const auto& t : terms_) m[t.exps] += t.coef;
  return m;
}

Polynomial Polynomial::constant(int nvars, double value) {
  std::map<Exponents, double> m;
  m[Exponents(static_cast<std::size_t>(nvars), 0)] = value;
  return from_map(nvars, m);
}

Polynomial Polynomial::variable(int nvars, int index) {
  if (index < 0 || index >= nvars) throw InputError("Polynomial::variable: index out of range");
  Exponents e(static_cast<std::size_t>(nvars), 0);
  e[static_cast<std::size_t>(index)] = 1;
  return from_map(nvars, {{e, 1.0}});
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms_) {
    int s = 0;
    for (int e : t.exps) s += e;
    d = std::max(d, s);
  }
  return d;
}

int Polynomial::degree_in(const std::vector<int>& vars) const {
  int d = 0;
  for (const auto& t : terms_) {
    int s = 0;
    for (int v : vars) s += t.exps[static_cast<std::size_t>(v)];
    d = std::max(d, s);
  }
  return d;
}

double Polynomial::eval(const Vec& x) const {
  require_dim(nvars_, x.size(), "Polynomial::eval");
  double total = 0;
  for (const auto& t : terms_) {
    double v = t.coef;
    for (int k = 0; k < nvars_; ++k)
      for (int e = 0; e < t.exps[static_cast<std::size_t>(k)]; ++e) v *= x[k];
    total += v;
  }
  return total;
}

Polynomial Polynomial::derivative(int var) const {
  std::map<Exponents, double> m;
  for (const auto& t : terms_) {
    const int e = t.exps[static_cast<std::size_t>(var)];
    if (e == 0) continue;
    Exponents d = t.exps;
    d[static_cast<std::size_t>(var)] -= 1;
    m[d] += t.coef * e;
  }
  return from_map(nvars_, m);
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  if (a.nvars_ != b.nvars_) throw InputError("Polynomial: variable count mismatch");
  auto m = a.to_map();
  for (const auto& t : b.terms_) m[t.exps] += t.coef;
  return Polynomial::from_map(a.nvars_, m);
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0 * b); }

Polynomial operator*(double s, const Polynomial& a) {
  Polynomial out(a.nvars_);
  if (s == 0) return out;
  for (const auto& t : a.terms_) out.terms_.push_back({s * t.coef, t.exps});
  return out;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.nvars_ != b.nvars_) throw InputError("Polynomial: variable count mismatch");
  std::map<Polynomial::Exponents, double> m;
  for (const auto& s : a.terms_)
    for (const auto& t : b.terms_) {
      Polynomial::Exponents e(s.exps.size());
      for (std::size_t k = 0; k < e.size(); ++k) e[k] = s.exps[k] + t.exps[k];
      m[e] += s.coef * t.coef;
    }
  return Polynomial::from_map(a.nvars_, m);
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw InputError("Polynomial::pow: negative exponent");
  Polynomial out = constant(nvars_, 1.0);
  for (int j = 0; j < k; ++j) out = out * *this;
  return out;
}

Polynomial Polynomial::substitute(const std::vector<Polynomial>& repl) const {
  if (static_cast<int>(repl.size()) != nvars_) throw InputError("Polynomial::substitute: wrong replacement count");
  const int target = repl.empty() ? 0 : repl.front().nvars();
  Polynomial out(target);
  for (const auto& t : terms_) {
    Polynomial term = constant(target, t.coef);
    for (int k = 0; k < nvars_; ++k)
      if (t.exps[static_cast<std::size_t>(k)] > 0) term = term * repl[static_cast<std::size_t>(k)].pow(t.exps[static_cast<std::size_t>(k)]);
    out = out + term;
  }
  return out;
}

Polynomial::QuadraticForm Polynomial::quadratic_form() const {
  if (degree() > 2) throw InputError("Polynomial::quadratic_form: degree exceeds 2");
  QuadraticForm q{Mat::Zero(nvars_, nvars_), Vec::Zero(nvars_), 0.0};
  for (const auto& t : terms_) {
    std::vector<int> vars;
    for (int k = 0; k < nvars_; ++k)
      for (int e = 0; e < t.exps[static_cast<std::size_t>(k)]; ++e) vars.push_back(k);
    if (vars.empty()) q.c += t.coef;
    else if (vars.size() == 1) q.b[vars[0]] += t.coef;
    else if (vars[0] == vars[1]) q.A(vars[0], vars[0]) += t.coef;
    else {
      q.A(vars[0], vars[1]) += t.coef / 2;
      q.A(vars[1], vars[0]) += t.coef / 2;
    }
  }
  return q;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    std::string mono;
    for (int k = 0; k < nvars_; ++k) {
      const int e = it->exps[static_cast<std::size_t>(k)];
      if (e == 0) continue;
      if (!mono.empty()) mono += "*";
      mono += "x" + std::to_string(k + 1);
      if (e > 1) mono += "^" + std::to_string(e);
    }
    double c = it->coef;
    if (first) {
      if (c < 0) {
        out += "-";
        c = -c;
      }
    } else {
      out += c < 0 ? " - " : " + ";
      c = std::abs(c);
    }
    if (mono.empty()) out += format_real(c);
    else if (c == 1) out += mono;
    else out += format_real(c) + "*" + mono;
    first = false;
  }
  return out;
}

namespace {

class PolyParser {
 public:
  PolyParser(std::string_view text, int nvars, int max_degree, int line, int column)
      : text_(text), nvars_(nvars), max_degree_(max_degree), line_(line), column_(column) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    if (p.degree() > max_degree_)
      fail("polynomial degree " + std::to_string(p.degree()) + " exceeds limit " + std::to_string(max_degree_));
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, column_ + static_cast<int>(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void guard(const Polynomial& p) const {
    if (p.degree() > max_degree_) fail("polynomial degree exceeds limit " + std::to_string(max_degree_));
  }

  Polynomial expr() {
    Polynomial acc = term();
    for (;;) {
      if (accept('+')) acc = acc + term();
      else if (accept('-')) acc = acc - term();
      else return acc;
    }
  }

  Polynomial term() {
    Polynomial acc = unary();
    while (accept('*')) {
      acc = acc * unary();
      guard(acc);
    }
    return acc;
  }

  Polynomial unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer exponent");
      const int k = std::atoi(std::string(text_.substr(start, pos_ - start)).c_str());
      if (k > max_degree_) fail("exponent exceeds degree limit");
      base = base.pow(k);
      guard(base);
    }
    return base;
  }

  Polynomial primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial p = expr();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    if (c == 'x') {
      const std::size_t at = pos_;
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected variable index after 'x'");
      const int idx = std::atoi(std::string(text_.substr(start, pos_ - start)).c_str());
      if (idx < 1 || idx > nvars_) {
        pos_ = at;
        fail("variable x" + std::to_string(idx) + " outside declared dimensions 1.." + std::to_string(nvars_));
      }
      return Polynomial::variable(nvars_, idx - 1);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const std::string copy(text_.substr(pos_));
      const double v = std::strtod(copy.c_str(), &end);
      const std::size_t used = static_cast<std::size_t>(end - copy.c_str());
      if (used == 0) fail("malformed number");
      pos_ += used;
      return Polynomial::constant(nvars_, v);
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  int nvars_;
  int max_degree_;
  int line_;
  int column_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, int nvars, int max_degree, int line, int column) {
  return PolyParser(text, nvars, max_degree, line, column).parse();
}

}  // namespace projgnep
