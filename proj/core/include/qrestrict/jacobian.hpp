#pragma once
#include <optional>
#include <string>
#include <vector>

#include "qrestrict/multipoly.hpp"

namespace qr {

// strictly increasing 1-based indices, d - n of them
using IndexSelection = std::vector<int>;

enum class Comparability { ExactMonomial, LowerBoundMonomial, IdenticallyZero, Undetermined };
std::string comparability_name(Comparability c);

struct ComparabilityVerdict {
  Comparability kind = Comparability::Undetermined;
  Rational coeff;      // ExactMonomial only
  Exponent w;          // exponent vector of the (lower bound) monomial
  std::string certificate;
  std::optional<int> max_power;
};

struct JacobianAnalysis {
  IndexSelection selection;
  MultiPoly poly;
  ComparabilityVerdict verdict;
  std::optional<int> bilinear_p;  // max_j w_j + 3
};

void validate_selection(const QuadTuple& q, const IndexSelection& sel);
MultiPoly jacobian_poly(const QuadTuple& q, const IndexSelection& sel);
ComparabilityVerdict monomial_comparability(const MultiPoly& j);
JacobianAnalysis analyze_selection(const QuadTuple& q, const IndexSelection& sel);
// every selection in lexicographic order
std::vector<JacobianAnalysis> all_selections(const QuadTuple& q);
JacobianAnalysis best_selection(const QuadTuple& q);
// J at the difference xi' - xi; variables x1..xd are xi, x(d+1)..x(2d) are xi'
MultiPoly bilinear_change_of_variables_jacobian(const QuadTuple& q, const IndexSelection& sel);

}  // namespace qr
