#include "projgnep/problem_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace projgnep {

namespace {

const std::array<const char*, 9> kConfigKeys = {"budget", "delta", "eps", "grid-h", "h", "lambda", "max-iter",
                                                "multistart", "seed"};

bool is_integer_key(std::string_view k) {
  return k == "budget" || k == "max-iter" || k == "multistart" || k == "seed";
}

/// Cursor over one line with 1-based column tracking.
class LineScanner {
 public:
  LineScanner(std::string_view text, int line) : text_(text), line_(line) {}

  int line() const { return line_; }
  int column() const { return static_cast<int>(pos_) + 1; }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, column()); }
  [[noreturn]] void fail_at(const std::string& msg, int col) const { throw ParseError(msg, line_, col); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '[') ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void keyword(std::string_view kw) {
    const int col = (skip_ws(), column());
    const std::string w = word();
    if (w != kw) fail_at("expected '" + std::string(kw) + "', found '" + w + "'", col);
  }

  double real() {
    skip_ws();
    const int col = column();
    const std::string w = word();
    if (w.empty()) fail_at("expected a number", col);
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end != w.c_str() + w.size() || !std::isfinite(v)) fail_at("malformed number '" + w + "'", col);
    return v;
  }

  long long integer() {
    skip_ws();
    const int col = column();
    const std::string w = word();
    if (w.empty()) fail_at("expected an integer", col);
    char* end = nullptr;
    const long long v = std::strtoll(w.c_str(), &end, 10);
    if (end != w.c_str() + w.size()) fail_at("malformed integer '" + w + "'", col);
    return v;
  }

  /// Contents of a [...] group split at top-level commas, each with its column.
  std::vector<std::pair<std::string, int>> bracket() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '[') fail("expected '['");
    ++pos_;
    std::vector<std::pair<std::string, int>> items;
    std::size_t start = pos_;
    int depth = 0;
    for (;; ++pos_) {
      if (pos_ >= text_.size()) fail("unterminated '['");
      const char c = text_[pos_];
      if (c == '(') ++depth;
      else if (c == ')') --depth;
      else if ((c == ',' && depth == 0) || c == ']') {
        items.emplace_back(std::string(text_.substr(start, pos_ - start)), static_cast<int>(start) + 1);
        start = pos_ + 1;
        if (c == ']') {
          ++pos_;
          break;
        }
      }
    }
    for (const auto& [s, col] : items)
      if (s.find_first_not_of(" \t") == std::string::npos) fail_at("empty entry in [...]", col);
    return items;
  }

  std::string rest() {
    skip_ws();
    std::string r(text_.substr(pos_));
    pos_ = text_.size();
    return r;
  }

 private:
  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

struct PlayerDraft {
  int line = 0;
  std::optional<ConvexSetd> choice;
  std::optional<std::pair<AffineMap, AffineMap>> kbox;
  std::vector<Vec> krow_normals;
  std::vector<AffineMap> krow_offsets;
  std::optional<Polynomial> utility;
  std::optional<std::tuple<Mat, Vec, double>> direction;
  std::optional<SampledTable> sampled;
  int preference_line = 0;
};

AffineMap stack(const std::vector<AffineMap>& rows, int n) {
  AffineMap m{Mat(static_cast<Eigen::Index>(rows.size()), n), Vec(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    m.A.row(static_cast<Eigen::Index>(k)) = rows[k].A.row(0);
    m.b[static_cast<Eigen::Index>(k)] = rows[k].b[0];
  }
  return m;
}

AffineMap affine_vec(LineScanner& s, int n, int expected) {
  const int col = (s.skip_ws(), s.column());
  const auto items = s.bracket();
  if (static_cast<int>(items.size()) != expected)
    s.fail_at("expected " + std::to_string(expected) + " entries, found " + std::to_string(items.size()), col);
  std::vector<AffineMap> rows;
  for (const auto& [text, c] : items) rows.push_back(parse_affine(text, n, s.line(), c));
  return stack(rows, n);
}

std::string affine_text(const Mat& A, const Vec& b, Eigen::Index row) {
  const auto n = static_cast<int>(A.cols());
  Polynomial p = Polynomial::constant(n, b[row]);
  for (int k = 0; k < n; ++k)
    if (A(row, k) != 0) p = p + A(row, k) * Polynomial::variable(n, k);
  return p.to_string();
}

std::string affine_vec_text(const AffineMap& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.A.rows(); ++r) out += (r ? ", " : "") + affine_text(m.A, m.b, r);
  return out + "]";
}

std::string reals(const Vec& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) out += " " + format_real(v[k]);
  return out;
}

void apply_config(SolverConfig& cfg, const std::string& key, double v) {
  if (key == "h") cfg.h = v;
  else if (key == "eps") cfg.eps = v;
  else if (key == "lambda") cfg.lambda = v;
  else if (key == "budget") cfg.random_budget = static_cast<int>(v);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(v);
  else if (key == "max-iter") cfg.max_iter = static_cast<int>(v);
  else if (key == "multistart") cfg.multistart = static_cast<int>(v);
  else if (key == "delta") cfg.delta = v;
  else if (key == "grid-h") cfg.grid_h = v;
}

}  // namespace

Vec parse_real_list(std::string_view text) {
  std::vector<double> vals;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
    if (a == std::string::npos) throw InputError("empty entry in number list '" + std::string(text) + "'");
    const std::string t = item.substr(a, b - a + 1);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v)) throw InputError("malformed number '" + t + "'");
    vals.push_back(v);
  }
  if (vals.empty()) throw InputError("empty number list");
  return Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Problem parse_problem(std::string_view text, const GameInstance::Options& opts) {
  std::vector<int> dims;
  int n = 0;
  std::vector<PlayerDraft> players;
  SolverConfig cfg;
  std::map<std::string, std::pair<double, int>> config;  // key -> (value, line)
  int header_line = 0;

  std::size_t start = 0;
  int lineno = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view raw = text.substr(start, stop - start);
    start = stop + 1;
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    LineScanner s(raw, lineno);
    if (s.at_end()) continue;
    const int kcol = s.column();
    const std::string kw = s.word();

    if (kw == "players") {
      if (header_line) s.fail_at("duplicate header", kcol);
      header_line = lineno;
      const long long N = s.integer();
      if (N < 1 || N > 64) s.fail("player count must be between 1 and 64");
      s.keyword("dims");
      for (long long i = 0; i < N; ++i) {
        const long long d = s.integer();
        if (d < 1 || d > 8) s.fail("player dimension must be between 1 and 8");
        dims.push_back(static_cast<int>(d));
        n += static_cast<int>(d);
      }
      if (!s.at_end()) s.fail("unexpected text after header");
      continue;
    }
    if (!header_line) s.fail_at("expected header 'players N dims n1 ... nN'", kcol);

    if (kw == "config") {
      const int col = (s.skip_ws(), s.column());
      const std::string key = s.word();
      if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
        s.fail_at("unknown config key '" + key + "'", col);
      if (config.count(key)) s.fail_at("duplicate config key '" + key + "'", col);
      const double v = is_integer_key(key) ? static_cast<double>(s.integer()) : s.real();
      if (!s.at_end()) s.fail("unexpected text after config value");
      config[key] = {v, lineno};
      continue;
    }
    if (kw == "player") {
      const long long idx = s.integer();
      if (idx != static_cast<long long>(players.size()) + 1)
        s.fail_at("expected 'player " + std::to_string(players.size() + 1) + "'", kcol);
      if (idx > static_cast<long long>(dims.size())) s.fail_at("more player blocks than declared players", kcol);
      if (!s.at_end()) s.fail("unexpected text after player index");
      players.push_back({});
      players.back().line = lineno;
      continue;
    }
    if (players.empty()) s.fail_at("'" + kw + "' outside a player block", kcol);
    PlayerDraft& P = players.back();
    const int i = static_cast<int>(players.size()) - 1;
    const int ni = dims[static_cast<std::size_t>(i)];

    if (kw == "box" || kw == "ball") {
      if (P.choice) s.fail_at("duplicate choice set", kcol);
      if (kw == "box") {
        Vec lo(ni), hi(ni);
        for (int k = 0; k < ni; ++k) lo[k] = s.real();
        for (int k = 0; k < ni; ++k) hi[k] = s.real();
        for (int k = 0; k < ni; ++k)
          if (lo[k] > hi[k]) s.fail_at("box lower bound exceeds upper bound", kcol);
        P.choice = ConvexSetd::box(lo, hi);
      } else {
        Vec c(ni);
        for (int k = 0; k < ni; ++k) c[k] = s.real();
        const double r = s.real();
        if (r < 0) s.fail_at("ball radius must be nonnegative", kcol);
        P.choice = ConvexSetd::ball(c, r);
      }
    } else if (kw == "kbox") {
      if (P.kbox || !P.krow_normals.empty()) s.fail_at("duplicate constraint map", kcol);
      AffineMap lo = affine_vec(s, n, ni);
      AffineMap hi = affine_vec(s, n, ni);
      P.kbox.emplace(std::move(lo), std::move(hi));
    } else if (kw == "krow") {
      if (P.kbox) s.fail_at("'krow' cannot be combined with 'kbox'", kcol);
      const auto items = s.bracket();
      if (static_cast<int>(items.size()) != ni) s.fail_at("row normal needs " + std::to_string(ni) + " entries", kcol);
      Vec normal(ni);
      for (int k = 0; k < ni; ++k) {
        LineScanner inner(items[static_cast<std::size_t>(k)].first, lineno);
        try {
          normal[k] = inner.real();
        } catch (const ParseError&) {
          s.fail_at("malformed number in row normal", items[static_cast<std::size_t>(k)].second);
        }
      }
      s.keyword("<=");
      const int col = (s.skip_ws(), s.column());
      P.krow_normals.push_back(normal);
      P.krow_offsets.push_back(parse_affine(s.rest(), n, lineno, col));
    } else if (kw == "utility" || kw == "direction" || kw == "sampled") {
      if (P.utility || P.direction || P.sampled) s.fail_at("duplicate preference", kcol);
      P.preference_line = lineno;
      if (kw == "utility") {
        const int col = (s.skip_ws(), s.column());
        const std::string body = s.rest();
        if (body.empty()) s.fail_at("expected a polynomial", col);
        P.utility = parse_polynomial(body, n, 4, lineno, col);
      } else if (kw == "direction") {
        AffineMap c = affine_vec(s, n, ni);
        s.keyword("offset");
        const double d = s.real();
        if (d < 0) s.fail("offset must be nonnegative");
        P.direction.emplace(c.A, c.b, d);
      } else {
        SampledTable t;
        const int m = n + ni;
        s.keyword("origin");
        t.origin.resize(m);
        for (int k = 0; k < m; ++k) t.origin[k] = s.real();
        s.keyword("step");
        t.step = s.real();
        if (!(t.step > 0)) s.fail("step must be positive");
        s.keyword("counts");
        for (int k = 0; k < m; ++k) {
          const long long c = s.integer();
          if (c < 1 || c > 100000) s.fail("counts must be between 1 and 100000");
          t.counts.push_back(static_cast<int>(c));
        }
        if (static_cast<double>(t.cell_count()) > 5e6) s.fail("sampled table too large");
        t.preferred.assign(t.cell_count(), 0);
        s.keyword("preferred");
        const long long K = s.integer();
        for (long long k = 0; k < K; ++k) {
          const int col = (s.skip_ws(), s.column());
          const long long idx = s.integer();
          if (idx < 0 || idx >= static_cast<long long>(t.cell_count())) s.fail_at("cell index out of range", col);
          t.preferred[static_cast<std::size_t>(idx)] = 1;
        }
        P.sampled = std::move(t);
      }
    } else {
      s.fail_at("unknown keyword '" + kw + "'", kcol);
    }
    if (!s.at_end()) s.fail("unexpected text at end of line");
  }

  if (!header_line) throw ParseError("missing header 'players N dims n1 ... nN'", 1, 1);
  if (players.size() != dims.size())
    throw ParseError("declared " + std::to_string(dims.size()) + " players but found " + std::to_string(players.size()) +
                         " player blocks",
                     lineno, 1);

  Problem out{GameInstance{}, cfg, {}};
  for (const auto& [key, vl] : config) {
    apply_config(out.config, key, vl.first);
    out.config_entries.emplace_back(key, is_integer_key(key) ? std::to_string(static_cast<long long>(vl.first))
                                                             : format_real(vl.first));
  }
  try {
    out.config.validate();
  } catch (const InputError& e) {
    throw ParseError(e.what(), config.begin()->second.second, 1);
  }

  std::vector<ConvexSetd> choice;
  std::vector<ConstraintMap> K;
  std::vector<PreferenceMap> prefs;
  int offset = 0;
  for (std::size_t i = 0; i < players.size(); ++i) {
    const PlayerDraft& P = players[i];
    const auto ii = static_cast<int>(i);
    const int ni = dims[i];
    if (!P.choice) throw ParseError("player " + std::to_string(i + 1) + " has no choice set (box/ball)", P.line, 1);
    if (!P.kbox && P.krow_normals.empty())
      throw ParseError("player " + std::to_string(i + 1) + " has no constraint map (kbox/krow)", P.line, 1);
    if (!P.utility && !P.direction && !P.sampled)
      throw ParseError("player " + std::to_string(i + 1) + " has no preference", P.line, 1);
    choice.push_back(*P.choice);
    try {
      if (P.kbox) K.push_back(ConstraintMap::moving_box(ii, P.kbox->first, P.kbox->second));
      else K.push_back(ConstraintMap::moving_polytope(ii, P.krow_normals, stack(P.krow_offsets, n)));
      if (P.utility) prefs.push_back(PreferenceMap::utility(ii, offset, ni, *P.utility, out.config.delta));
      else if (P.direction)
        prefs.push_back(PreferenceMap::direction(ii, offset, ni, n, std::get<0>(*P.direction), std::get<1>(*P.direction),
                                                 std::get<2>(*P.direction)));
      else prefs.push_back(PreferenceMap::sampled(ii, offset, ni, n, *P.sampled));
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(e.what(), P.line, 1);
    }
    offset += ni;
  }
  out.game = GameInstance::build(dims, std::move(choice), std::move(K), std::move(prefs), opts);
  return out;
}

Problem load_problem(const std::string& path, const GameInstance::Options& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open problem file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str(), opts);
}

std::string serialize(const Problem& p) {
  const GameInstance& G = p.game;
  std::string out = "players " + std::to_string(G.players()) + " dims";
  for (int d : G.dims()) out += " " + std::to_string(d);
  out += "\n";
  for (const auto& [k, v] : p.config_entries) out += "config " + k + " " + v + "\n";
  for (int i = 0; i < G.players(); ++i) {
    out += "player " + std::to_string(i + 1) + "\n";
    const ConvexSetd& X = G.choice_set(i);
    if (auto* b = X.as_box()) out += "box" + reals(b->lower) + reals(b->upper) + "\n";
    else if (auto* b = X.as_ball()) out += "ball" + reals(b->center) + " " + format_real(b->radius) + "\n";
    else throw InputError("serialize: polytope choice sets have no file syntax");

    const auto& K = G.constraint(i).variant();
    if (auto* b = std::get_if<MovingBox>(&K)) {
      out += "kbox " + affine_vec_text(b->lower) + " " + affine_vec_text(b->upper) + "\n";
    } else {
      const auto& poly = std::get<MovingPolytope>(K);
      for (std::size_t r = 0; r < poly.normals.size(); ++r) {
        out += "krow [";
        for (Eigen::Index k = 0; k < poly.normals[r].size(); ++k) out += (k ? ", " : "") + format_real(poly.normals[r][k]);
        out += "] <= " + affine_text(poly.offsets.A, poly.offsets.b, static_cast<Eigen::Index>(r)) + "\n";
      }
    }

    const auto& P = G.preference(i).variant();
    if (auto* u = std::get_if<UtilityInduced>(&P)) {
      out += "utility " + u->utility.to_string() + "\n";
    } else if (auto* d = std::get_if<DirectionField>(&P)) {
      out += "direction " + affine_vec_text(AffineMap{d->slope, d->intercept}) + " offset " + format_real(d->delta) + "\n";
    } else {
      const auto& t = std::get<SampledTable>(P);
      out += "sampled origin" + reals(t.origin) + " step " + format_real(t.step) + " counts";
      for (int c : t.counts) out += " " + std::to_string(c);
      std::string idx;
      std::size_t count = 0;
      for (std::size_t k = 0; k < t.preferred.size(); ++k)
        if (t.preferred[k]) {
          idx += " " + std::to_string(k);
          ++count;
        }
      out += " preferred " + std::to_string(count) + idx + "\n";
    }
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", md[k]);
    hex += buf;
  }
  return hex;
}

std::string digest(const Problem& p) { return sha256_hex(serialize(p)); }

}  // namespace projgnep
