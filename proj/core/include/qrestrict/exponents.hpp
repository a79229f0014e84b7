#pragma once
#include <optional>
#include <string>
#include <vector>

#include "qrestrict/invariants.hpp"
#include "qrestrict/surface.hpp"

namespace qr {

struct CaseParameters {
  std::string case_tag;
  int d = 0, n = 0, k = 0, eta = 0;
  std::vector<int> lambda;
  std::vector<int> w;  // w[j-1] = multiplicity of index j, length d
  std::optional<int> w1, w_lambda, theta;
  bool valid = true;
  std::vector<std::string> violated;
};

// a * (1/p) + b * (1/q) < c
struct LinearConstraint {
  Rational a, b, c;
};

struct ExponentRange {
  Rational q_critical;
  std::vector<LinearConstraint> constraints;
  bool sharp_up_to_endpoint = true;
};

CaseParameters case_parameters(const SurfaceSpec& spec);
// InputError when params are invalid
ExponentRange predicted_range(const CaseParameters& params);
// range of the form q > m + 3, 1/p + (m+2)/q < 1
ExponentRange monomial_type_range(int max_w);

// d = n = 2 canonical classes: (x1^2, x1*x2) gives m = 2, the other two nondegenerate classes m = 1
ExponentRange class_range(Class2x2 c);

Rational necessary_q_box(const std::vector<int>& w, const std::vector<Rational>& t);

struct SharpnessResult {
  Rational q_lower;
  std::vector<Rational> argmax_t;
  long points = 0;
};
// grid {0, 1/m, ..., 1}^n; m = 2 is the default grid
SharpnessResult sharpness_optimizer(const std::vector<int>& w, int denominator = 2);

struct Vertex {
  Rational inv_p, inv_q;
  bool operator==(const Vertex&) const = default;
};
// closure of the admissible region inside the unit square of (1/p, 1/q); counter-clockwise
std::vector<Vertex> admissible_region_vertices(const ExponentRange& range);

// tuples of shape (x1^2, x1*x2, ..., x1*x(n-1), x1*xn + x2^2): expected but unproven range
std::optional<std::string> conjecture_flag(const QuadTuple& q);

}  // namespace qr
