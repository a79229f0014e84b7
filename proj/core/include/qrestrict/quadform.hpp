#pragma once
#include <gmpxx.h>

#include <string>
#include <vector>

#include "qrestrict/errors.hpp"

namespace qr {

using Rational = mpq_class;

Rational rat(long num, long den = 1);
// "p/q" with q > 0, always both parts
std::string rat_str(const Rational& r);
// accepts "p", "p/q", "-p/q"
Rational parse_rat(const std::string& s);

// dense rows x cols rational matrix
struct RatMatrix {
  int rows = 0, cols = 0;
  std::vector<Rational> a;

  RatMatrix() = default;
  RatMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
  static RatMatrix identity(int n);

  Rational& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  const Rational& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  RatMatrix transpose() const;
  RatMatrix operator*(const RatMatrix& o) const;
  int rank() const;
  bool operator==(const RatMatrix& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

Rational determinant(RatMatrix m);

struct SymMatrix {
  int dim = 0;
  std::vector<Rational> e;

  SymMatrix() = default;
  explicit SymMatrix(int d) : dim(d), e(static_cast<size_t>(d) * d) {}

  const Rational& operator()(int i, int j) const { return e[static_cast<size_t>(i) * dim + j]; }
  // writes both (i,j) and (j,i)
  void set(int i, int j, const Rational& v);
  // adds coefficient c of the monomial x_i x_j (i may equal j)
  void add_monomial(int i, int j, const Rational& c);

  // (A + A^T)/2; flags whether A was not symmetric
  static SymMatrix symmetrize(const RatMatrix& m, bool* was_asymmetric = nullptr);
  RatMatrix as_matrix() const;
  bool is_zero() const;
  bool operator==(const SymMatrix& o) const { return dim == o.dim && e == o.e; }
};

struct QuadTuple {
  int d = 0, n = 0;
  std::vector<SymMatrix> forms;

  QuadTuple() = default;
  QuadTuple(int d_, int n_);
  bool operator==(const QuadTuple& o) const { return d == o.d && n == o.n && forms == o.forms; }
};

class MultiPoly;

std::vector<Rational> evaluate(const QuadTuple& q, const std::vector<Rational>& xi);
// entry (j,k) = d/dxi_k of Q_j = 2 (A_j xi)_k
std::vector<std::vector<MultiPoly>> gradient_matrix(const QuadTuple& q);
int nv(const QuadTuple& q);
// component j' = sum_j M2(j,j') * M1^T A_j M1
QuadTuple change_of_variables(const QuadTuple& q, const RatMatrix& m1, const RatMatrix& m2);

// floating copies, used by numerics and classification
std::vector<std::vector<double>> to_double(const SymMatrix& s);

}  // namespace qr
