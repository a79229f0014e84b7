#pragma once
#include <map>
#include <string>
#include <vector>

#include "qrestrict/quadform.hpp"

namespace qr {

using Exponent = std::vector<int>;

// sparse polynomial in `vars` variables with rational coefficients; zero terms never stored
class MultiPoly {
 public:
  MultiPoly() = default;
  explicit MultiPoly(int vars) : vars_(vars) {}

  static MultiPoly constant(int vars, const Rational& c);
  static MultiPoly variable(int vars, int k, const Rational& c = 1);

  int vars() const { return vars_; }
  const std::map<Exponent, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  size_t size() const { return terms_.size(); }

  void add_term(const Exponent& e, const Rational& c);
  Rational coeff(const Exponent& e) const;

  MultiPoly operator+(const MultiPoly& o) const;
  MultiPoly operator-(const MultiPoly& o) const;
  MultiPoly operator*(const MultiPoly& o) const;
  MultiPoly operator*(const Rational& c) const;
  MultiPoly operator-() const { return *this * Rational(-1); }
  bool operator==(const MultiPoly& o) const { return vars_ == o.vars_ && terms_ == o.terms_; }

  Rational eval(const std::vector<Rational>& x) const;
  // substitute x_k -> (x'_k - x_k), returning a poly in 2*vars variables (x first, then x')
  MultiPoly at_difference() const;
  // -1 for the zero poly
  int max_total_degree() const;
  int min_total_degree() const;

  // e.g. "-2*x1^2 + 4*x1*x2"
  std::string str(const std::string& var = "x") const;

 private:
  int vars_ = 0;
  std::map<Exponent, Rational> terms_;
};

// determinant of a square matrix of polynomials (fraction-free cofactor expansion with memo)
MultiPoly poly_determinant(const std::vector<std::vector<MultiPoly>>& m);

}  // namespace qr
