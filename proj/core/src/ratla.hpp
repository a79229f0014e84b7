#pragma once
// small exact linear-algebra helpers over Q
#include <vector>

#include "qrestrict/quadform.hpp"

namespace qr::ratla {

// reduced row echelon form in place; returns pivot columns
inline std::vector<int> rref(RatMatrix& m) {
  std::vector<int> piv;
  int r = 0;
  for (int c = 0; c < m.cols && r < m.rows; ++c) {
    int p = -1;
    for (int i = r; i < m.rows; ++i)
      if (m(i, c) != 0) { p = i; break; }
    if (p < 0) continue;
    if (p != r)
      for (int j = 0; j < m.cols; ++j) std::swap(m(p, j), m(r, j));
    Rational inv = 1 / m(r, c);
    for (int j = 0; j < m.cols; ++j) m(r, j) *= inv;
    for (int i = 0; i < m.rows; ++i) {
      if (i == r || m(i, c) == 0) continue;
      Rational f = m(i, c);
      for (int j = 0; j < m.cols; ++j) m(i, j) -= f * m(r, j);
    }
    piv.push_back(c);
    ++r;
  }
  return piv;
}

// columns form a basis of {x : m x = 0}
inline RatMatrix nullspace(const RatMatrix& m) {
  RatMatrix a = m;
  auto piv = rref(a);
  std::vector<bool> is_piv(m.cols, false);
  for (int c : piv) is_piv[c] = true;
  std::vector<int> free_cols;
  for (int c = 0; c < m.cols; ++c)
    if (!is_piv[c]) free_cols.push_back(c);
  RatMatrix ns(m.cols, static_cast<int>(free_cols.size()));
  for (size_t f = 0; f < free_cols.size(); ++f) {
    int fc = free_cols[f];
    ns(fc, static_cast<int>(f)) = 1;
    for (size_t r = 0; r < piv.size(); ++r) ns(piv[r], static_cast<int>(f)) = -a(static_cast<int>(r), fc);
  }
  return ns;
}

// columns form a basis of the column space
inline RatMatrix colspace(const RatMatrix& m) {
  RatMatrix t = m.transpose();
  auto piv = rref(t);
  RatMatrix out(m.rows, static_cast<int>(piv.size()));
  for (size_t r = 0; r < piv.size(); ++r)
    for (int i = 0; i < m.rows; ++i) out(i, static_cast<int>(r)) = t(static_cast<int>(r), i);
  return out;
}

inline RatMatrix hcat(const RatMatrix& a, const RatMatrix& b) {
  RatMatrix out(a.rows ? a.rows : b.rows, a.cols + b.cols);
  for (int i = 0; i < out.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) out(i, j) = a(i, j);
    for (int j = 0; j < b.cols; ++j) out(i, a.cols + j) = b(i, j);
  }
  return out;
}

// columns of m padded with zero columns up to `cols`
inline RatMatrix pad_cols(const RatMatrix& m, int cols) {
  RatMatrix out(m.rows, cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols && j < cols; ++j) out(i, j) = m(i, j);
  return out;
}

struct Inertia {
  int pos = 0, neg = 0, zero = 0;
};

// Sylvester inertia by congruence elimination
inline Inertia inertia(RatMatrix s) {
  Inertia in;
  int n = s.rows;
  std::vector<bool> done(n, false);
  for (int step = 0; step < n; ++step) {
    int p = -1;
    for (int i = 0; i < n; ++i)
      if (!done[i] && s(i, i) != 0) { p = i; break; }
    if (p < 0) {
      // all remaining diagonal zero; look for an off-diagonal entry
      int a = -1, b = -1;
      for (int i = 0; i < n && a < 0; ++i)
        for (int j = i + 1; j < n; ++j)
          if (!done[i] && !done[j] && s(i, j) != 0) { a = i; b = j; break; }
      if (a < 0) break;
      // row/col a += row/col b
      for (int j = 0; j < n; ++j) s(a, j) += s(b, j);
      for (int i = 0; i < n; ++i) s(i, a) += s(i, b);
      p = a;
    }
    Rational piv = s(p, p);
    if (piv > 0) ++in.pos; else ++in.neg;
    done[p] = true;
    for (int i = 0; i < n; ++i) {
      if (done[i] || s(i, p) == 0) continue;
      Rational f = s(i, p) / piv;
      for (int j = 0; j < n; ++j) s(i, j) -= f * s(p, j);
      for (int j = 0; j < n; ++j) s(j, i) = s(i, j);
    }
  }
  in.zero = n - in.pos - in.neg;
  return in;
}

// nonzero real v with v^T s v = 0 exists
inline bool has_isotropic_vector(const RatMatrix& s) {
  if (s.rows == 0) return false;
  Inertia in = inertia(s);
  return in.zero > 0 || (in.pos > 0 && in.neg > 0);
}

}  // namespace qr::ratla
