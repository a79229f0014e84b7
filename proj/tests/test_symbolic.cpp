#include <gtest/gtest.h>

#include "qrestrict/exponents.hpp"
#include "qrestrict/invariants.hpp"
#include "qrestrict/jacobian.hpp"

using namespace qr;

namespace {
QuadTuple tuple(const std::string& s) { return parse_surface(s).tuple; }
const char* kPair = "d=3 n=2\nQ1 = x1^2\nQ2 = x2^2 + x1*x3";
}  // namespace

TEST(Pencil, ExactMinimalRank) {
  auto r = min_rank_pencil(tuple(kPair));
  EXPECT_EQ(r.rank, 1);
  EXPECT_TRUE(r.exact);
  auto h = min_rank_pencil(tuple("d=2 n=2\nQ1 = x1^2 + x2^2\nQ2 = x1*x2"));
  EXPECT_EQ(h.rank, 1);  // y2 = 2 y1 gives a square
  EXPECT_TRUE(h.exact);
  auto full = min_rank_pencil(tuple("d=2 n=2\nQ1 = x1*x2\nQ2 = x1^2 - x2^2"));
  EXPECT_EQ(full.rank, 2);
  EXPECT_TRUE(full.exact);
}

TEST(DInvariant, KnownValues) {
  auto q = tuple(kPair);
  auto d31 = d_invariant(q, 3, 1);
  EXPECT_EQ(d31.value, 1);
  EXPECT_TRUE(d31.exact);
  EXPECT_EQ(d_invariant(q, 3, 2).value, 3);
  auto fam = tuple("d=3 n=2\nQ1 = x1^2 + x2^2\nQ2 = 2*x1^2 - x2^2 + x1*x2 + x3^2");
  auto f31 = d_invariant(fam, 3, 1);
  EXPECT_EQ(f31.value, 2);
  EXPECT_TRUE(f31.exact);
}

TEST(DInvariant, CertificateAttainsValue) {
  auto q = tuple(kPair);
  auto r = d_invariant(q, 2, 2);
  EXPECT_EQ(r.value, 1);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.m1.rank(), 2);
  EXPECT_EQ(nv(change_of_variables(q, r.m1, r.m2)), r.value);
}

TEST(CmCondition, Characterization) {
  EXPECT_EQ(cm_check_3_2(tuple(kPair)).satisfied, Tri::False);
  EXPECT_EQ(cm_check_3_2(tuple("d=3 n=2\nQ1 = x1^2 + x2^2\nQ2 = 2*x1^2 - x2^2 + x1*x2 + x3^2")).satisfied, Tri::True);
  EXPECT_THROW(cm_check_3_2(tuple("d=3 n=2\nQ1 = x1^2\nQ2 = x2^2")), InputError);
}

TEST(CmCondition, ProbeAgreesOnExamples) {
  // satisfied family: no blow-up below n/d
  auto good = cm_integral_probe(tuple("d=3 n=2\nQ1 = x1^2 + x2^2\nQ2 = 2*x1^2 - x2^2 + x1*x2 + x3^2"), 0.5, 64);
  EXPECT_FALSE(good.divergent);
  // det(y.Q) = -y2^3/4, so |det|^-gamma is integrable on the circle only for gamma < 1/3
  auto bad = cm_integral_probe(tuple(kPair), 0.6, 64);
  EXPECT_TRUE(bad.divergent);
}

TEST(Classify2x2, Classes) {
  EXPECT_EQ(classify_2x2(tuple("d=2 n=2\nQ1 = x1^2\nQ2 = x1*x2")).cls, Class2x2::XiSq_XiXj);
  EXPECT_EQ(classify_2x2(tuple("d=2 n=2\nQ1 = x1^2\nQ2 = x2^2")).cls, Class2x2::XiSq_XjSq);
  EXPECT_EQ(classify_2x2(tuple("d=2 n=2\nQ1 = x1*x2\nQ2 = x1^2 - x2^2")).cls, Class2x2::Hyperbolic_Pair);
  EXPECT_EQ(classify_2x2(tuple("d=2 n=2\nQ1 = x1^2 + x2^2\nQ2 = x1*x2")).cls, Class2x2::XiSq_XjSq);
  EXPECT_EQ(classify_2x2(tuple("d=2 n=2\nQ1 = x1^2\nQ2 = 2*x1^2")).cls, Class2x2::Degenerate);
  auto c = classify_2x2(tuple("d=2 n=2\nQ1 = 3*x1^2 + 2*x1*x2\nQ2 = x1^2 - 5*x1*x2 + x2^2"));
  EXPECT_LE(c.residual, kClassifyTolerance);
}

TEST(HurwitzRadon, Values) {
  EXPECT_EQ(hurwitz_radon(1), 1);
  EXPECT_EQ(hurwitz_radon(2), 2);
  EXPECT_EQ(hurwitz_radon(4), 4);
  EXPECT_EQ(hurwitz_radon(8), 8);
  EXPECT_EQ(hurwitz_radon(16), 9);
  EXPECT_EQ(hurwitz_radon(12), 4);
  EXPECT_THROW(hurwitz_radon(0), InputError);
}

TEST(Jacobian, ParabolicPair) {
  auto q = tuple(kPair);
  auto x1 = MultiPoly::variable(3, 0), x2 = MultiPoly::variable(3, 1);
  EXPECT_EQ(jacobian_poly(q, {2}), x1 * x1 * Rational(-2));
  EXPECT_EQ(jacobian_poly(q, {3}), x1 * x2 * Rational(4));
  EXPECT_TRUE(jacobian_poly(q, {1}).is_zero());
  auto best = best_selection(q);
  EXPECT_EQ(best.selection, IndexSelection{3});
  ASSERT_TRUE(best.bilinear_p.has_value());
  EXPECT_EQ(*best.bilinear_p, 4);
}

TEST(Jacobian, SelectionValidation) {
  auto q = tuple(kPair);
  EXPECT_THROW(validate_selection(q, {}), InputError);
  EXPECT_THROW(validate_selection(q, {4}), InputError);
  EXPECT_THROW(validate_selection(q, {1, 2}), InputError);
  EXPECT_EQ(all_selections(q).size(), 3u);
}

TEST(Jacobian, Comparability) {
  auto x = MultiPoly::variable(2, 0), y = MultiPoly::variable(2, 1);
  EXPECT_EQ(monomial_comparability(x * y * Rational(3)).kind, Comparability::ExactMonomial);
  EXPECT_EQ(monomial_comparability(x * x + y * y).kind, Comparability::LowerBoundMonomial);
  EXPECT_EQ(monomial_comparability(x * x + y * y).w, (Exponent{2, 0}));
  EXPECT_EQ(monomial_comparability(x * x - y * y).kind, Comparability::Undetermined);
  EXPECT_EQ(monomial_comparability(MultiPoly(2)).kind, Comparability::IdenticallyZero);
}

TEST(Jacobian, BilinearDifference) {
  auto q = tuple(kPair);
  auto j = bilinear_change_of_variables_jacobian(q, {3});
  // 4 (x1' - x1)(x2' - x2)
  std::vector<Rational> pt{1, 2, 0, 4, 7, 0};
  EXPECT_EQ(j.eval(pt), Rational(4 * 3 * 5));
}

TEST(Exponents, MonomialRange) {
  auto r = monomial_type_range(2);
  EXPECT_EQ(r.q_critical, Rational(5));
  ASSERT_EQ(r.constraints.size(), 2u);
  EXPECT_EQ(r.constraints[1].b, Rational(4));
  auto vs = admissible_region_vertices(r);
  bool has = false;
  for (const auto& v : vs) has |= (v.inv_p == rat(1, 5) && v.inv_q == rat(1, 5));
  EXPECT_TRUE(has);
}

TEST(Exponents, CaseOneParameters) {
  auto s = parse_surface("d=2 n=2\nQ1 = x1^2\nQ2 = x1*x2\nmeta case=1 lambda=[1,1]");
  auto p = case_parameters(s);
  EXPECT_TRUE(p.valid);
  EXPECT_EQ(p.w, (std::vector<int>{2, 0}));
  EXPECT_EQ(predicted_range(p).q_critical, Rational(5));
  EXPECT_THROW(case_parameters(parse_surface("d=2 n=2\nQ1 = x1^2\nQ2 = x1*x2")), InputError);
}

TEST(Exponents, ClassRanges) {
  EXPECT_EQ(class_range(Class2x2::XiSq_XiXj).q_critical, Rational(5));
  EXPECT_EQ(class_range(Class2x2::Hyperbolic_Pair).q_critical, Rational(4));
  EXPECT_THROW(class_range(Class2x2::Degenerate), InputError);
}

TEST(Exponents, SharpnessOptimizer) {
  EXPECT_EQ(sharpness_optimizer({2, 0}).q_lower, Rational(5));
  EXPECT_EQ(sharpness_optimizer({1, 3, 0}).q_lower, Rational(6));
  EXPECT_EQ(necessary_q_box({2, 0}, {1, 0}), Rational(5));
  EXPECT_EQ(necessary_q_box({1, 1}, {1, 1}), Rational(4));
  EXPECT_THROW(sharpness_optimizer(std::vector<int>(17, 1)), BudgetError);
  EXPECT_THROW(sharpness_optimizer({0, 0}), InputError);
}

TEST(Exponents, ConjectureFlag) {
  EXPECT_TRUE(conjecture_flag(tuple("d=3 n=3\nQ1 = x1^2\nQ2 = x1*x2\nQ3 = x1*x3 + x2^2")).has_value());
  EXPECT_FALSE(conjecture_flag(tuple(kPair)).has_value());
}
