#include "qrestrict/surface.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace qr {

namespace {

struct Statement {
  std::string text;
  int line;
  int col;  // 1-based column of the statement start
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void syntax(const Statement& st, int offset, const std::string& msg) {
  std::ostringstream os;
  os << "syntax error at line " << st.line << ", column " << (st.col + offset) << ": " << msg;
  throw InputError(os.str());
}

std::vector<Statement> split_statements(const std::string& text) {
  std::vector<Statement> out;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t start = 0;
    while (start <= line.size()) {
      size_t semi = line.find(';', start);
      std::string piece = line.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
      size_t lead = piece.find_first_not_of(" \t\r");
      if (lead != std::string::npos)
        out.push_back({trim(piece), ln, static_cast<int>(start + lead) + 1});
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
  }
  return out;
}

class PolyParser {
 public:
  PolyParser(const Statement& st, const std::string& s, int base, int d)
      : st_(st), s_(s), base_(base), d_(d) {}

  // returns a (not yet symmetrized) coefficient map (i<=j) -> c
  std::map<std::pair<int, int>, Rational> parse(std::vector<std::string>& warnings) {
    std::map<std::pair<int, int>, Rational> acc;
    std::set<std::pair<int, int>> seen;
    skip();
    if (pos_ >= s_.size()) fail("empty polynomial");
    bool first = true;
    while (pos_ < s_.size()) {
      int sign = 1;
      if (s_[pos_] == '+' || s_[pos_] == '-') {
        sign = (s_[pos_] == '-') ? -1 : 1;
        ++pos_;
        skip();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      int term_start = static_cast<int>(pos_);
      Rational coef = 1;
      bool has_coef = false;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        coef = number();
        has_coef = true;
        skip();
        if (pos_ < s_.size() && s_[pos_] == '/') {
          ++pos_;
          skip();
          if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("expected denominator");
          Rational den = number();
          if (den == 0) fail("zero denominator");
          coef /= den;
        }
        skip();
      }
      std::vector<int> vars;
      bool need_factor = !has_coef;
      while (pos_ < s_.size()) {
        if (s_[pos_] == '*') {
          ++pos_;
          skip();
          need_factor = true;
          continue;
        }
        if (s_[pos_] != 'x') break;
        ++pos_;
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("expected variable index after 'x'");
        long idx = number().get_num().get_si();
        if (idx < 1 || idx > d_) fail("variable x" + std::to_string(idx) + " outside x1..x" + std::to_string(d_));
        skip();
        long power = 1;
        if (pos_ < s_.size() && s_[pos_] == '^') {
          ++pos_;
          skip();
          if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("expected exponent");
          power = number().get_num().get_si();
          skip();
        }
        if (power < 0 || power > 2) fail("exponent must be at most 2");
        for (long p = 0; p < power; ++p) vars.push_back(static_cast<int>(idx) - 1);
        need_factor = false;
      }
      if (need_factor && vars.empty() && !has_coef) fail("expected a term");
      if (need_factor) fail("dangling '*'");
      if (vars.empty() && coef == 0) continue;  // a literal 0 term
      if (vars.size() != 2) {
        pos_ = static_cast<size_t>(term_start);
        fail("term is not quadratic (degree " + std::to_string(vars.size()) + ")");
      }
      auto key = std::minmax(vars[0], vars[1]);
      if (!seen.insert(key).second)
        warnings.push_back("duplicate monomial x" + std::to_string(key.first + 1) + "*x" +
                           std::to_string(key.second + 1) + " merged by adding coefficients");
      acc[key] += sign * coef;
      skip();
    }
    return acc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { syntax(st_, base_ + static_cast<int>(pos_), msg); }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  Rational number() {
    size_t b = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return Rational(mpz_class(s_.substr(b, pos_ - b)));
  }

  const Statement& st_;
  std::string s_;
  size_t pos_ = 0;
  int base_;
  int d_;
};

// [[a,b],[c,d]]
RatMatrix parse_matrix(const Statement& st, const std::string& body, int base, int d) {
  std::string s;
  for (char c : body)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.size() < 4 || s.front() != '[' || s.back() != ']') syntax(st, base, "matrix must look like [[..],[..]]");
  std::vector<std::vector<Rational>> rows;
  size_t i = 1;
  while (i < s.size() - 1) {
    if (s[i] == ',') { ++i; continue; }
    if (s[i] != '[') syntax(st, base, "expected '[' opening a matrix row");
    size_t close = s.find(']', i);
    if (close == std::string::npos) syntax(st, base, "unterminated matrix row");
    std::vector<Rational> row;
    std::stringstream cells(s.substr(i + 1, close - i - 1));
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        row.push_back(parse_rat(cell));
      } catch (const InputError&) {
        syntax(st, base, "bad matrix entry '" + cell + "'");
      }
    }
    rows.push_back(row);
    i = close + 1;
  }
  if (static_cast<int>(rows.size()) != d) syntax(st, base, "matrix must have d rows");
  RatMatrix m(d, d);
  for (int r = 0; r < d; ++r) {
    if (static_cast<int>(rows[r].size()) != d) syntax(st, base, "matrix row " + std::to_string(r + 1) + " must have d entries");
    for (int c = 0; c < d; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

StructuralMeta parse_meta(const Statement& st, const std::string& rest) {
  StructuralMeta m;
  static const std::regex kv(R"((\w+)\s*=\s*(\[[^\]]*\]|[^\s]+))");
  std::string cleaned = rest;
  auto begin = std::sregex_iterator(cleaned.begin(), cleaned.end(), kv);
  size_t covered = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    std::string gap = cleaned.substr(covered, it->position() - covered);
    if (!trim(gap).empty()) syntax(st, 5 + static_cast<int>(covered), "unexpected '" + trim(gap) + "' in meta");
    covered = it->position() + it->length();
    std::string key = (*it)[1], val = (*it)[2];
    auto as_int = [&](const std::string& v) {
      try {
        size_t used = 0;
        int x = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
      } catch (const std::exception&) {
        syntax(st, 5 + static_cast<int>(it->position()), "meta value for " + key + " must be an integer");
      }
    };
    if (key == "case") {
      if (!is_known_case(val)) syntax(st, 5 + static_cast<int>(it->position()), "unknown case '" + val + "'");
      m.case_tag = val;
    } else if (key == "lambda") {
      if (val.front() == '[') {
        std::stringstream items(val.substr(1, val.size() - 2));
        std::string item;
        while (std::getline(items, item, ',')) {
          item = trim(item);
          if (!item.empty()) m.lambda.push_back(as_int(item));
        }
      } else {
        m.lambda.push_back(as_int(val));
      }
    } else if (key == "w1") {
      m.w1 = as_int(val);
    } else if (key == "theta") {
      m.theta = as_int(val);
    } else if (key == "k") {
      m.k = as_int(val);
    } else if (key == "eta") {
      m.eta = as_int(val);
    } else {
      syntax(st, 5 + static_cast<int>(it->position()), "unknown meta key '" + key + "'");
    }
  }
  if (!trim(cleaned.substr(covered)).empty()) syntax(st, 5 + static_cast<int>(covered), "trailing text in meta");
  if (m.case_tag.empty()) syntax(st, 0, "meta requires case=<tag>");
  return m;
}

SymMatrix monomial(int d, int i, int j) {
  SymMatrix s(d);
  s.add_monomial(i, j, 1);
  return s;
}

// nonzero scalar multiple of the target
bool proportional(const SymMatrix& a, const SymMatrix& target) {
  Rational ratio = 0;
  for (size_t t = 0; t < a.e.size(); ++t) {
    if (target.e[t] == 0) {
      if (a.e[t] != 0) return false;
      continue;
    }
    if (a.e[t] == 0) return false;
    Rational r = a.e[t] / target.e[t];
    if (ratio == 0) ratio = r;
    else if (r != ratio) return false;
  }
  return ratio != 0;
}

[[noreturn]] void meta_fail(const std::string& what) { throw InputError("inconsistent metadata: " + what); }

std::string qname(int j) { return "Q" + std::to_string(j); }
std::string xname(int i) { return "x" + std::to_string(i); }

}  // namespace

bool is_known_case(const std::string& tag) {
  static const std::set<std::string> tags = {"1", "2a", "2b", "2c", "3", "4", "5a", "5b", "5c", "5d"};
  return tags.count(tag) > 0;
}

SurfaceSpec parse_surface(const std::string& text) {
  auto stmts = split_statements(text);
  if (stmts.empty()) throw InputError("syntax error at line 1, column 1: empty surface spec");
  static const std::regex header(R"(^d\s*=\s*(\d+)\s*[, ]\s*n\s*=\s*(\d+)$)");
  static const std::regex header2(R"(^d\s*=\s*(\d+)\s+n\s*=\s*(\d+)$)");
  std::smatch mh;
  const Statement& h = stmts.front();
  if (!std::regex_match(h.text, mh, header) && !std::regex_match(h.text, mh, header2))
    syntax(h, 0, "expected header 'd=<int> n=<int>'");
  int d = std::stoi(mh[1]), n = std::stoi(mh[2]);
  if (d < 1 || n < 1) syntax(h, 0, "d and n must be positive");
  if (d > 24 || n > 24) syntax(h, 0, "d and n above 24 are not supported");
  SurfaceSpec spec;
  spec.tuple = QuadTuple(d, n);
  std::vector<bool> defined(n, false);
  static const std::regex comp(R"(^([QA])\s*(\d+)\s*=(.*)$)");
  for (size_t s = 1; s < stmts.size(); ++s) {
    const Statement& st = stmts[s];
    std::smatch mc;
    if (st.text.rfind("meta", 0) == 0 && (st.text.size() == 4 || std::isspace(static_cast<unsigned char>(st.text[4])))) {
      if (spec.meta) syntax(st, 0, "duplicate meta statement");
      spec.meta = parse_meta(st, st.text.substr(4));
      continue;
    }
    if (!std::regex_match(st.text, mc, comp)) syntax(st, 0, "expected 'Qj = <poly>', 'Aj = [[..]]' or 'meta ...'");
    int j = std::stoi(mc[2]);
    if (j < 1 || j > n) syntax(st, 1, "component index " + std::to_string(j) + " outside 1.." + std::to_string(n));
    if (defined[j - 1]) syntax(st, 0, "component " + std::to_string(j) + " defined twice");
    defined[j - 1] = true;
    int base = static_cast<int>(mc.position(3));
    if (mc[1] == "Q") {
      PolyParser pp(st, mc[3].str(), base, d);
      auto coeffs = pp.parse(spec.warnings);
      SymMatrix a(d);
      for (const auto& [ij, c] : coeffs) a.add_monomial(ij.first, ij.second, c);
      spec.tuple.forms[j - 1] = a;
    } else {
      RatMatrix m = parse_matrix(st, mc[3].str(), base, d);
      bool asym = false;
      spec.tuple.forms[j - 1] = SymMatrix::symmetrize(m, &asym);
      if (asym) spec.warnings.push_back("A" + std::to_string(j) + " was not symmetric; replaced by (A+A^T)/2");
    }
  }
  for (int j = 0; j < n; ++j)
    if (!defined[j]) throw InputError("syntax error: component Q" + std::to_string(j + 1) + " missing");
  if (spec.meta) check_meta_consistency(spec.tuple, *spec.meta);
  return spec;
}

std::string form_to_poly_text(const SymMatrix& a) {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < a.dim; ++i)
    for (int j = i; j < a.dim; ++j) {
      Rational c = (i == j) ? a(i, i) : Rational(2 * a(i, j));
      if (c == 0) continue;
      bool neg = c < 0;
      Rational m = abs(c);
      os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
      first = false;
      if (m != 1) os << m.get_str() << "*";
      if (i == j) os << "x" << (i + 1) << "^2";
      else os << "x" << (i + 1) << "*x" << (j + 1);
    }
  if (first) os << "0";
  return os.str();
}

std::string serialize_surface(const SurfaceSpec& spec) {
  std::ostringstream os;
  os << "d=" << spec.tuple.d << " n=" << spec.tuple.n << "\n";
  for (int j = 0; j < spec.tuple.n; ++j) os << "Q" << (j + 1) << " = " << form_to_poly_text(spec.tuple.forms[j]) << "\n";
  if (spec.meta) {
    const auto& m = *spec.meta;
    os << "meta case=" << m.case_tag;
    if (!m.lambda.empty()) {
      os << " lambda=[";
      for (size_t i = 0; i < m.lambda.size(); ++i) os << (i ? "," : "") << m.lambda[i];
      os << "]";
    }
    if (m.w1) os << " w1=" << *m.w1;
    if (m.theta) os << " theta=" << *m.theta;
    if (m.k) os << " k=" << *m.k;
    if (m.eta) os << " eta=" << *m.eta;
    os << "\n";
  }
  return os.str();
}

PolyCaseShape polynomial_case_shape(const QuadTuple& q, const StructuralMeta& meta) {
  const char c = meta.case_tag[0];
  if (c != '2' && c != '5') meta_fail("polynomial shape requested for case " + meta.case_tag);
  const int n = q.n, d = q.d;
  if (!meta.w1) meta_fail("case " + meta.case_tag + " needs w1");
  if (meta.lambda.size() != 1) meta_fail("case " + meta.case_tag + " needs a single lambda");
  const int w1 = *meta.w1, lam = meta.lambda[0];
  if (w1 < 1 || w1 > n) meta_fail("w1 must lie in 1..n");
  if (lam < 1 || lam > d) meta_fail("lambda must lie in 1..d");
  if (!proportional(q.forms[0], monomial(d, 0, 0))) meta_fail(qname(1) + " must be x1^2");
  for (int j = 2; j <= w1; ++j)
    if (!proportional(q.forms[j - 1], monomial(d, 0, j - 1))) meta_fail(qname(j) + " must be x1*" + xname(j));
  PolyCaseShape out;
  std::set<int> dep;
  for (int j = w1 + 1; j <= n; ++j) {
    SymMatrix p = q.forms[j - 1];
    p.add_monomial(lam - 1, j - 1, -1);
    if (c == '5' && j == n)
      for (int t = n + 1; t <= d; ++t) p.add_monomial(t - 1, t - 1, -1);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (p(a, b) != 0) {
          if (a != 0 && a != lam - 1) dep.insert(a);
          if (b != 0 && b != lam - 1) dep.insert(b);
        }
    out.residual.push_back(p);
  }
  out.theta = static_cast<int>(dep.size());
  return out;
}

void check_meta_consistency(const QuadTuple& q, const StructuralMeta& meta) {
  const int d = q.d, n = q.n;
  const std::string& tag = meta.case_tag;
  if (!is_known_case(tag)) meta_fail("unknown case '" + tag + "'");
  const char c = tag[0];
  if (c == '1' || c == '2') {
    if (d != n) meta_fail("case " + tag + " requires d = n");
    if (meta.k && *meta.k != 0) meta_fail("k must be 0 when d = n");
  }
  if (c == '3' || c == '4' || c == '5') {
    if (d <= n) meta_fail("case " + tag + " requires d = n + k with k >= 1");
    if (meta.k && *meta.k != d - n) meta_fail("declared k=" + std::to_string(*meta.k) + " but d - n = " + std::to_string(d - n));
  }
  if (c == '1') {
    if (static_cast<int>(meta.lambda.size()) != n) meta_fail("case 1 needs n lambda entries");
    for (int j = 1; j <= n; ++j) {
      int l = meta.lambda[j - 1];
      if (l < 1 || l > n) meta_fail("lambda_" + std::to_string(j) + " outside 1..n");
      if (!proportional(q.forms[j - 1], monomial(d, l - 1, j - 1)))
        meta_fail(qname(j) + " is not " + xname(l) + "*" + xname(j));
    }
  } else if (c == '3') {
    const int k = d - n;
    if (static_cast<int>(meta.lambda.size()) != n) meta_fail("case 3 needs n lambda entries (for j = k+1..n+k)");
    for (int j = 1; j <= n; ++j) {
      int var = j + k, l = meta.lambda[j - 1];
      if (l < 1 || l > d) meta_fail("lambda_" + std::to_string(var) + " outside 1..n+k");
      if (!proportional(q.forms[j - 1], monomial(d, l - 1, var - 1)))
        meta_fail(qname(j) + " is not " + xname(l) + "*" + xname(var));
    }
  } else if (c == '4') {
    const int k = d - n;
    if (!meta.eta) meta_fail("case 4 needs eta");
    const int eta = *meta.eta;
    if (eta < 1 || eta >= n) meta_fail("case 4 needs 1 <= eta < n");
    if (static_cast<int>(meta.lambda.size()) != n - eta) meta_fail("case 4 needs n - eta lambda entries");
    for (int j = 1; j <= eta; ++j)
      if (!proportional(q.forms[j - 1], monomial(d, j - 1, j - 1))) meta_fail(qname(j) + " is not " + xname(j) + "^2");
    for (int j = eta + 1; j <= n; ++j) {
      int var = j + k, l = meta.lambda[j - eta - 1];
      if (l < 1 || l > d) meta_fail("lambda_" + std::to_string(var) + " outside 1..n+k");
      if (!proportional(q.forms[j - 1], monomial(d, l - 1, var - 1)))
        meta_fail(qname(j) + " is not " + xname(l) + "*" + xname(var));
    }
  } else {
    PolyCaseShape shape = polynomial_case_shape(q, meta);
    if (meta.theta && *meta.theta != shape.theta)
      meta_fail("declared theta=" + std::to_string(*meta.theta) + " but the P_j depend on " +
                std::to_string(shape.theta) + " extra variables");
  }
}

}  // namespace qr
