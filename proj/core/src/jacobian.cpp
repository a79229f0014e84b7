#include "qrestrict/jacobian.hpp"

#include <algorithm>
#include <functional>

namespace qr {

std::string comparability_name(Comparability c) {
  switch (c) {
    case Comparability::ExactMonomial: return "ExactMonomial";
    case Comparability::LowerBoundMonomial: return "LowerBoundMonomial";
    case Comparability::IdenticallyZero: return "IdenticallyZero";
    default: return "Undetermined";
  }
}

void validate_selection(const QuadTuple& q, const IndexSelection& sel) {
  if (q.d < q.n) throw InputError("Jacobian analysis needs d >= n (got d=" + std::to_string(q.d) + ", n=" + std::to_string(q.n) + ")");
  if (static_cast<int>(sel.size()) != q.d - q.n)
    throw InputError("selection must have d-n = " + std::to_string(q.d - q.n) + " entries");
  for (size_t i = 0; i < sel.size(); ++i) {
    if (sel[i] < 1 || sel[i] > q.d) throw InputError("selection index " + std::to_string(sel[i]) + " outside 1..d");
    if (i > 0 && sel[i] <= sel[i - 1]) throw InputError("selection must be strictly increasing");
  }
}

MultiPoly jacobian_poly(const QuadTuple& q, const IndexSelection& sel) {
  validate_selection(q, sel);
  auto rows = gradient_matrix(q);
  for (int idx : sel) {
    std::vector<MultiPoly> r(q.d, MultiPoly(q.d));
    r[idx - 1] = MultiPoly::constant(q.d, 1);
    rows.push_back(r);
  }
  return poly_determinant(rows);
}

ComparabilityVerdict monomial_comparability(const MultiPoly& j) {
  ComparabilityVerdict v;
  if (j.is_zero()) {
    v.kind = Comparability::IdenticallyZero;
    v.certificate = "zero polynomial";
    return v;
  }
  auto max_exp = [](const Exponent& e) { return e.empty() ? 0 : *std::max_element(e.begin(), e.end()); };
  if (j.size() == 1) {
    const auto& [e, c] = *j.terms().begin();
    v.kind = Comparability::ExactMonomial;
    v.coeff = c;
    v.w = e;
    v.max_power = max_exp(e);
    v.certificate = "single term";
    return v;
  }
  int sign = 0;
  for (const auto& [e, c] : j.terms()) {
    if (std::any_of(e.begin(), e.end(), [](int k) { return k % 2 != 0; })) return v;
    int s = sgn(c);
    if (sign != 0 && s != sign) return v;
    sign = s;
  }
  // one-signed sum of monomial squares: |J| >= each square
  // smallest max power; ties go to the earliest variable, i.e. the lexicographically largest exponent
  const Exponent* best = nullptr;
  for (const auto& [e, c] : j.terms()) {
    if (!best || max_exp(e) < max_exp(*best) || (max_exp(e) == max_exp(*best) && e > *best)) best = &e;
  }
  v.kind = Comparability::LowerBoundMonomial;
  v.w = *best;
  v.max_power = max_exp(*best);
  MultiPoly kept(j.vars());
  kept.add_term(*best, 1);
  v.certificate = std::string(sign > 0 ? "nonnegative" : "nonpositive") + " sum of " + std::to_string(j.size()) +
                  " monomial squares, each coefficient " + (sign > 0 ? ">" : "<") + " 0, so |J| >= c*" + kept.str();
  return v;
}

JacobianAnalysis analyze_selection(const QuadTuple& q, const IndexSelection& sel) {
  JacobianAnalysis a;
  a.selection = sel;
  a.poly = jacobian_poly(q, sel);
  a.verdict = monomial_comparability(a.poly);
  if (a.verdict.kind == Comparability::ExactMonomial || a.verdict.kind == Comparability::LowerBoundMonomial)
    a.bilinear_p = *a.verdict.max_power + 3;
  return a;
}

std::vector<JacobianAnalysis> all_selections(const QuadTuple& q) {
  if (q.d < q.n) throw InputError("Jacobian analysis needs d >= n");
  std::vector<JacobianAnalysis> out;
  IndexSelection sel(q.d - q.n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == q.d - q.n) {
      out.push_back(analyze_selection(q, sel));
      return;
    }
    for (int i = start; i <= q.d; ++i) {
      sel[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(1, 0);
  return out;
}

JacobianAnalysis best_selection(const QuadTuple& q) {
  auto all = all_selections(q);
  const JacobianAnalysis* best = nullptr;
  for (const auto& a : all) {
    if (!a.bilinear_p) continue;
    if (!best || *a.verdict.max_power < *best->verdict.max_power) best = &a;  // lexicographic order already
  }
  if (best) return *best;
  // nothing usable: prefer an undetermined one over zero, so the report shows a polynomial
  for (const auto& a : all)
    if (a.verdict.kind == Comparability::Undetermined) return a;
  return all.front();
}

MultiPoly bilinear_change_of_variables_jacobian(const QuadTuple& q, const IndexSelection& sel) {
  return jacobian_poly(q, sel).at_difference();
}

}  // namespace qr
