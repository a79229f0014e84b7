#pragma once
// univariate rational polynomials, real-root counting by Sturm sequences
#include <gmpxx.h>

#include <algorithm>
#include <utility>
#include <vector>

#include "qrestrict/multipoly.hpp"

namespace qr::upoly {

using Rational = mpq_class;
using UPoly = std::vector<Rational>;  // c[0] + c[1] s + ...

inline void trim(UPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}
inline int deg(const UPoly& p) { return static_cast<int>(p.size()) - 1; }  // -1 for zero

inline UPoly add(const UPoly& a, const UPoly& b, const Rational& sb = 1) {
  UPoly r(std::max(a.size(), b.size()));
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] += sb * b[i];
  trim(r);
  return r;
}

inline UPoly mul(const UPoly& a, const UPoly& b) {
  if (a.empty() || b.empty()) return {};
  UPoly r(a.size() + b.size() - 1);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  trim(r);
  return r;
}

inline std::pair<UPoly, UPoly> divmod(UPoly a, const UPoly& b) {
  UPoly q;
  trim(a);
  if (deg(a) < deg(b)) return {q, a};
  q.assign(a.size() - b.size() + 1, 0);
  while (deg(a) >= deg(b) && !a.empty()) {
    int shift = deg(a) - deg(b);
    Rational f = a.back() / b.back();
    q[shift] = f;
    for (size_t i = 0; i < b.size(); ++i) a[i + shift] -= f * b[i];
    a.pop_back();
    trim(a);
  }
  trim(q);
  return {q, a};
}

inline UPoly monic(UPoly p) {
  trim(p);
  if (p.empty()) return p;
  Rational lc = p.back();
  for (auto& c : p) c /= lc;
  return p;
}

inline UPoly gcd(UPoly a, UPoly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    UPoly r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

inline UPoly derivative(const UPoly& p) {
  if (p.size() <= 1) return {};
  UPoly r(p.size() - 1);
  for (size_t i = 1; i < p.size(); ++i) r[i - 1] = p[i] * static_cast<long>(i);
  trim(r);
  return r;
}

inline Rational eval(const UPoly& p, const Rational& x) {
  Rational s = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * x + *it;
  return s;
}

inline UPoly squarefree(const UPoly& p) {
  UPoly g = gcd(p, derivative(p));
  if (deg(g) <= 0) return monic(p);
  return monic(divmod(p, g).first);
}

inline std::vector<UPoly> sturm(const UPoly& p) {
  std::vector<UPoly> s{p, derivative(p)};
  while (!s.back().empty()) {
    UPoly r = divmod(s[s.size() - 2], s.back()).second;
    for (auto& c : r) c = -c;
    if (r.empty()) break;
    s.push_back(r);
  }
  if (s.back().empty()) s.pop_back();
  return s;
}

inline int sign_changes_at(const std::vector<UPoly>& seq, const Rational& x) {
  int changes = 0, last = 0;
  for (const auto& p : seq) {
    int v = sgn(eval(p, x));
    if (v == 0) continue;
    if (last != 0 && v != last) ++changes;
    last = v;
  }
  return changes;
}

// sign of the leading behaviour at +/- infinity
inline int sign_changes_inf(const std::vector<UPoly>& seq, bool positive) {
  int changes = 0, last = 0;
  for (const auto& p : seq) {
    if (p.empty()) continue;
    int v = sgn(p.back());
    if (!positive && deg(p) % 2 == 1) v = -v;
    if (last != 0 && v != last) ++changes;
    last = v;
  }
  return changes;
}

// distinct real roots in (a, b]; p must be square-free and nonzero
inline int count_roots(const std::vector<UPoly>& seq, const Rational& a, const Rational& b) {
  return sign_changes_at(seq, a) - sign_changes_at(seq, b);
}

inline int count_all_roots(const UPoly& p) {
  if (deg(p) <= 0) return 0;
  auto seq = sturm(squarefree(p));
  return sign_changes_inf(seq, false) - sign_changes_inf(seq, true);
}

// Cauchy bound: all roots lie in (-B, B)
inline Rational root_bound(const UPoly& p) {
  Rational m = 0;
  for (size_t i = 0; i + 1 < p.size(); ++i) m = std::max(m, Rational(abs(p[i] / p.back())));
  return m + 1;
}

struct RootBox {
  Rational lo, hi;  // root in (lo, hi], and it is the only root of the square-free poly there
  bool exact = false;  // lo == hi == the root
};

// isolate real roots of a square-free nonzero poly, intervals of width below `width`
inline std::vector<RootBox> isolate(const UPoly& sqf, const Rational& width = Rational(1, 1 << 20)) {
  std::vector<RootBox> out;
  if (deg(sqf) <= 0) return out;
  auto seq = sturm(sqf);
  Rational B = root_bound(sqf);
  std::vector<std::pair<Rational, Rational>> stack{{-B, B}};
  while (!stack.empty()) {
    auto [lo, hi] = stack.back();
    stack.pop_back();
    int c = count_roots(seq, lo, hi);
    if (c == 0) continue;
    if (c == 1 && hi - lo < width) {
      RootBox rb{lo, hi, false};
      if (eval(sqf, hi) == 0) rb = {hi, hi, true};
      out.push_back(rb);
      continue;
    }
    Rational mid = (lo + hi) / 2;
    stack.push_back({mid, hi});
    stack.push_back({lo, mid});
  }
  std::sort(out.begin(), out.end(), [](const RootBox& a, const RootBox& b) { return a.hi < b.hi; });
  return out;
}

// does the root isolated in `box` (of square-free f) also annihilate h?
inline bool root_kills(const UPoly& f, const RootBox& box, const UPoly& h) {
  if (h.empty()) return true;
  if (box.exact) return eval(h, box.hi) == 0;
  UPoly g = gcd(f, h);
  if (deg(g) <= 0) return false;
  auto seq = sturm(squarefree(g));
  return count_roots(seq, box.lo, box.hi) > 0;
}

// univariate view of a one-variable MultiPoly
inline UPoly from_multipoly(const MultiPoly& m) {
  UPoly r;
  for (const auto& [e, c] : m.terms()) {
    size_t k = static_cast<size_t>(e.at(0));
    if (r.size() <= k) r.resize(k + 1);
    r[k] += c;
  }
  trim(r);
  return r;
}

}  // namespace qr::upoly
