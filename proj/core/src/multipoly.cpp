#include "qrestrict/multipoly.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace qr {

MultiPoly MultiPoly::constant(int vars, const Rational& c) {
  MultiPoly p(vars);
  p.add_term(Exponent(vars, 0), c);
  return p;
}

MultiPoly MultiPoly::variable(int vars, int k, const Rational& c) {
  MultiPoly p(vars);
  Exponent e(vars, 0);
  e[k] = 1;
  p.add_term(e, c);
  return p;
}

void MultiPoly::add_term(const Exponent& e, const Rational& c) {
  if (static_cast<int>(e.size()) != vars_) throw InputError("exponent length mismatch");
  if (c == 0) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Rational MultiPoly::coeff(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Rational(0) : it->second;
}

MultiPoly MultiPoly::operator+(const MultiPoly& o) const {
  MultiPoly r = *this;
  if (r.vars_ == 0) r.vars_ = o.vars_;
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

MultiPoly MultiPoly::operator-(const MultiPoly& o) const { return *this + (-o); }

MultiPoly MultiPoly::operator*(const MultiPoly& o) const {
  MultiPoly r(std::max(vars_, o.vars_));
  for (const auto& [e1, c1] : terms_)
    for (const auto& [e2, c2] : o.terms_) {
      Exponent e(e1.size());
      for (size_t k = 0; k < e.size(); ++k) e[k] = e1[k] + e2[k];
      r.add_term(e, c1 * c2);
    }
  return r;
}

MultiPoly MultiPoly::operator*(const Rational& c) const {
  MultiPoly r(vars_);
  if (c == 0) return r;
  for (const auto& [e, v] : terms_) r.terms_.emplace(e, v * c);
  return r;
}

Rational MultiPoly::eval(const std::vector<Rational>& x) const {
  if (static_cast<int>(x.size()) != vars_) throw InputError("eval: wrong point dimension");
  Rational s = 0;
  for (const auto& [e, c] : terms_) {
    Rational t = c;
    for (int k = 0; k < vars_; ++k)
      for (int p = 0; p < e[k]; ++p) t *= x[k];
    s += t;
  }
  return s;
}

MultiPoly MultiPoly::at_difference() const {
  int v2 = 2 * vars_;
  MultiPoly r(v2);
  for (const auto& [e, c] : terms_) {
    MultiPoly t = constant(v2, c);
    for (int k = 0; k < vars_; ++k) {
      MultiPoly diff = variable(v2, vars_ + k) - variable(v2, k);
      for (int p = 0; p < e[k]; ++p) t = t * diff;
    }
    r = r + t;
  }
  return r;
}

int MultiPoly::max_total_degree() const {
  int m = -1;
  for (const auto& [e, c] : terms_) m = std::max(m, std::accumulate(e.begin(), e.end(), 0));
  return m;
}

int MultiPoly::min_total_degree() const {
  int m = -1;
  for (const auto& [e, c] : terms_) {
    int t = std::accumulate(e.begin(), e.end(), 0);
    m = (m < 0) ? t : std::min(m, t);
  }
  return m;
}

std::string MultiPoly::str(const std::string& var) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  // highest exponent vectors first reads more naturally
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    Rational a = abs(c);
    bool neg = c < 0;
    if (first) os << (neg ? "-" : "");
    else os << (neg ? " - " : " + ");
    first = false;
    bool is_const = std::all_of(e.begin(), e.end(), [](int p) { return p == 0; });
    bool wrote = false;
    if (a != 1 || is_const) {
      os << a.get_str();
      wrote = true;
    }
    for (int k = 0; k < vars_; ++k) {
      if (e[k] == 0) continue;
      if (wrote) os << "*";
      os << var << (k + 1);
      if (e[k] > 1) os << "^" << e[k];
      wrote = true;
    }
  }
  return os.str();
}

MultiPoly poly_determinant(const std::vector<std::vector<MultiPoly>>& m) {
  const int n = static_cast<int>(m.size());
  int vars = 0;
  for (const auto& row : m)
    for (const auto& p : row) vars = std::max(vars, p.vars());
  if (n == 0) return MultiPoly::constant(vars, 1);
  for (const auto& row : m)
    if (static_cast<int>(row.size()) != n) throw InputError("poly_determinant: not square");
  if (n > 20) throw InputError("poly_determinant: matrix too large");
  // minor over rows [r, n) and the column set `mask`, r = n - popcount(mask)
  std::unordered_map<unsigned, MultiPoly> memo;
  std::function<MultiPoly(unsigned)> minor = [&](unsigned mask) -> MultiPoly {
    int r = n - __builtin_popcount(mask);
    if (r == n) return MultiPoly::constant(vars, 1);
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    MultiPoly acc(vars);
    int sign_pos = 0;
    for (int c = 0; c < n; ++c) {
      if (!(mask >> c & 1u)) continue;
      const MultiPoly& entry = m[r][c];
      if (!entry.is_zero()) {
        MultiPoly sub = minor(mask & ~(1u << c));
        MultiPoly t = entry * sub;
        acc = (sign_pos % 2 == 0) ? acc + t : acc - t;
      }
      ++sign_pos;
    }
    memo.emplace(mask, acc);
    return acc;
  };
  return minor((n == 32) ? 0xffffffffu : ((1u << n) - 1u));
}

}  // namespace qr
