#include "qrestrict/quadform.hpp"

#include <sstream>

#include "qrestrict/multipoly.hpp"

namespace qr {

Rational rat(long num, long den) {
  if (den == 0) throw InputError("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

std::string rat_str(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Rational parse_rat(const std::string& s) {
  Rational r;
  if (s.empty() || r.set_str(s, 10) != 0) throw InputError("bad rational '" + s + "'");
  if (r.get_den() == 0) throw InputError("zero denominator in '" + s + "'");
  r.canonicalize();
  return r;
}

RatMatrix RatMatrix::identity(int n) {
  RatMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RatMatrix RatMatrix::transpose() const {
  RatMatrix t(cols, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  return t;
}

RatMatrix RatMatrix::operator*(const RatMatrix& o) const {
  if (cols != o.rows) throw InputError("matrix product dimension mismatch");
  RatMatrix r(rows, o.cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) {
      const Rational& v = (*this)(i, k);
      if (v == 0) continue;
      for (int j = 0; j < o.cols; ++j) r(i, j) += v * o(k, j);
    }
  return r;
}

int RatMatrix::rank() const {
  RatMatrix m = *this;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int piv = -1;
    for (int i = r; i < rows; ++i)
      if (m(i, c) != 0) { piv = i; break; }
    if (piv < 0) continue;
    if (piv != r)
      for (int j = 0; j < cols; ++j) std::swap(m(piv, j), m(r, j));
    for (int i = r + 1; i < rows; ++i) {
      if (m(i, c) == 0) continue;
      Rational f = m(i, c) / m(r, c);
      for (int j = c; j < cols; ++j) m(i, j) -= f * m(r, j);
    }
    ++r;
  }
  return r;
}

Rational determinant(RatMatrix m) {
  if (m.rows != m.cols) throw InputError("determinant of non-square matrix");
  int n = m.rows;
  Rational det = 1;
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int i = c; i < n; ++i)
      if (m(i, c) != 0) { piv = i; break; }
    if (piv < 0) return 0;
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(m(piv, j), m(c, j));
      det = -det;
    }
    det *= m(c, c);
    for (int i = c + 1; i < n; ++i) {
      if (m(i, c) == 0) continue;
      Rational f = m(i, c) / m(c, c);
      for (int j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

void SymMatrix::set(int i, int j, const Rational& v) {
  e[static_cast<size_t>(i) * dim + j] = v;
  e[static_cast<size_t>(j) * dim + i] = v;
}

void SymMatrix::add_monomial(int i, int j, const Rational& c) {
  if (i == j) {
    e[static_cast<size_t>(i) * dim + i] += c;
  } else {
    Rational h = c / 2;
    e[static_cast<size_t>(i) * dim + j] += h;
    e[static_cast<size_t>(j) * dim + i] += h;
  }
}

SymMatrix SymMatrix::symmetrize(const RatMatrix& m, bool* was_asymmetric) {
  if (m.rows != m.cols) throw InputError("form matrix must be square");
  SymMatrix s(m.rows);
  bool asym = false;
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) {
      if (m(i, j) != m(j, i)) asym = true;
      s.e[static_cast<size_t>(i) * s.dim + j] = (m(i, j) + m(j, i)) / 2;
    }
  if (was_asymmetric) *was_asymmetric = asym;
  return s;
}

RatMatrix SymMatrix::as_matrix() const {
  RatMatrix m(dim, dim);
  m.a = e;
  return m;
}

bool SymMatrix::is_zero() const {
  for (const auto& v : e)
    if (v != 0) return false;
  return true;
}

QuadTuple::QuadTuple(int d_, int n_) : d(d_), n(n_), forms(n_, SymMatrix(d_)) {
  if (d_ < 1 || n_ < 1) throw InputError("need d >= 1 and n >= 1");
}

std::vector<Rational> evaluate(const QuadTuple& q, const std::vector<Rational>& xi) {
  if (static_cast<int>(xi.size()) != q.d) throw InputError("evaluate: point has wrong dimension");
  std::vector<Rational> out(q.n);
  for (int j = 0; j < q.n; ++j) {
    Rational s = 0;
    for (int a = 0; a < q.d; ++a) {
      if (xi[a] == 0) continue;
      for (int b = 0; b < q.d; ++b) s += xi[a] * q.forms[j](a, b) * xi[b];
    }
    out[j] = s;
  }
  return out;
}

std::vector<std::vector<MultiPoly>> gradient_matrix(const QuadTuple& q) {
  std::vector<std::vector<MultiPoly>> g(q.n, std::vector<MultiPoly>(q.d, MultiPoly(q.d)));
  for (int j = 0; j < q.n; ++j)
    for (int k = 0; k < q.d; ++k)
      for (int m = 0; m < q.d; ++m) {
        const Rational& c = q.forms[j](k, m);
        if (c == 0) continue;
        Exponent e(q.d, 0);
        e[m] = 1;
        g[j][k].add_term(e, 2 * c);
      }
  return g;
}

int nv(const QuadTuple& q) {
  int count = 0;
  for (int k = 0; k < q.d; ++k) {
    bool used = false;
    for (int j = 0; j < q.n && !used; ++j)
      for (int m = 0; m < q.d; ++m)
        if (q.forms[j](k, m) != 0) { used = true; break; }
    count += used;
  }
  return count;
}

QuadTuple change_of_variables(const QuadTuple& q, const RatMatrix& m1, const RatMatrix& m2) {
  if (m1.rows != q.d || m1.cols != q.d) throw InputError("M1 must be d x d");
  if (m2.rows != q.n || m2.cols < 1) throw InputError("M2 must be n x n' with n' >= 1");
  QuadTuple out;
  out.d = q.d;
  out.n = m2.cols;
  std::vector<RatMatrix> pulled;
  pulled.reserve(q.n);
  RatMatrix m1t = m1.transpose();
  for (int j = 0; j < q.n; ++j) pulled.push_back(m1t * q.forms[j].as_matrix() * m1);
  for (int jp = 0; jp < m2.cols; ++jp) {
    RatMatrix acc(q.d, q.d);
    for (int j = 0; j < q.n; ++j) {
      const Rational& c = m2(j, jp);
      if (c == 0) continue;
      for (size_t t = 0; t < acc.a.size(); ++t) acc.a[t] += c * pulled[j].a[t];
    }
    out.forms.push_back(SymMatrix::symmetrize(acc));
  }
  return out;
}

std::vector<std::vector<double>> to_double(const SymMatrix& s) {
  std::vector<std::vector<double>> m(s.dim, std::vector<double>(s.dim));
  for (int i = 0; i < s.dim; ++i)
    for (int j = 0; j < s.dim; ++j) m[i][j] = s(i, j).get_d();
  return m;
}

}  // namespace qr
