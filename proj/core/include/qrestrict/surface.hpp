#pragma once
#include <optional>
#include <string>
#include <vector>

#include "qrestrict/quadform.hpp"

namespace qr {

// declared structural case data; indices are 1-based
struct StructuralMeta {
  std::string case_tag;  // 1, 2a, 2b, 2c, 3, 4, 5a, 5b, 5c, 5d
  std::vector<int> lambda;
  std::optional<int> w1, theta, k, eta;
  bool operator==(const StructuralMeta&) const = default;
};

struct SurfaceSpec {
  QuadTuple tuple;
  std::optional<StructuralMeta> meta;
  std::vector<std::string> warnings;
};

bool is_known_case(const std::string& tag);

// grammar: header `d=<int> n=<int>`, `Qj = <poly>` or `Aj = [[...],[...]]`, optional `meta ...`;
// statements split on newlines and ';', '#' starts a comment
SurfaceSpec parse_surface(const std::string& text);
std::string serialize_surface(const SurfaceSpec& spec);
std::string form_to_poly_text(const SymMatrix& a);

// throws InputError naming the failed shape check
void check_meta_consistency(const QuadTuple& q, const StructuralMeta& meta);

// variables (0-based) that P_j = Q_j - x_lambda x_j depends on, for the polynomial cases
struct PolyCaseShape {
  std::vector<SymMatrix> residual;  // P_j for j = w1+1..n (index 0 is j = w1+1)
  int theta = 0;
};
PolyCaseShape polynomial_case_shape(const QuadTuple& q, const StructuralMeta& meta);

}  // namespace qr
