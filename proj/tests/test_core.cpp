#include <gtest/gtest.h>

#include "qrestrict/multipoly.hpp"
#include "qrestrict/surface.hpp"

using namespace qr;

TEST(Rational, FormatsAsFraction) {
  EXPECT_EQ(rat_str(parse_rat("3/6")), "1/2");
  EXPECT_EQ(rat_str(parse_rat("-4")), "-4/1");
  EXPECT_EQ(parse_rat("-7/3"), rat(-7, 3));
  EXPECT_THROW(parse_rat("1/0"), InputError);
  EXPECT_THROW(parse_rat("abc"), InputError);
}

TEST(RatMatrix, RankAndDeterminant) {
  RatMatrix m(3, 3);
  int v[] = {2, 1, 0, 1, 3, 1, 0, 1, 4};
  for (int i = 0; i < 9; ++i) m.a[i] = v[i];
  EXPECT_EQ(m.rank(), 3);
  EXPECT_EQ(determinant(m), Rational(18));
  RatMatrix z(2, 3);
  z(0, 0) = 1;
  z(1, 0) = 2;
  EXPECT_EQ(z.rank(), 1);
  EXPECT_EQ((RatMatrix::identity(3) * m), m);
}

TEST(SymMatrix, SymmetrizeFlagsAsymmetry) {
  RatMatrix m(2, 2);
  m(0, 1) = 2;
  bool asym = false;
  auto s = SymMatrix::symmetrize(m, &asym);
  EXPECT_TRUE(asym);
  EXPECT_EQ(s(0, 1), Rational(1));
  EXPECT_EQ(s(1, 0), Rational(1));
}

TEST(Surface, PolynomialAndMatrixFormsAgree) {
  auto a = parse_surface("d=3 n=2\nQ1 = x1^2\nQ2 = x2^2 + x1*x3").tuple;
  auto b = parse_surface("d=3 n=2; A1 = [[1,0,0],[0,0,0],[0,0,0]]; A2 = [[0,0,1/2],[0,1,0],[1/2,0,0]]").tuple;
  EXPECT_EQ(a, b);
}

TEST(Surface, CommentsAndSeparators) {
  auto s = parse_surface("# header comment\nd=2 n=1 ; Q1 = 3*x1^2 - x1*x2 # trailing\n");
  EXPECT_EQ(s.tuple.d, 2);
  EXPECT_EQ(s.tuple.forms[0](0, 0), Rational(3));
  EXPECT_EQ(s.tuple.forms[0](0, 1), rat(-1, 2));
}

TEST(Surface, RejectsMalformedInput) {
  EXPECT_THROW(parse_surface("d=2\nQ1 = x1^2"), InputError);
  EXPECT_THROW(parse_surface("d=2 n=2\nQ1 = x1^2"), InputError);
  EXPECT_THROW(parse_surface("d=2 n=1\nQ1 = x3^2"), InputError);
  EXPECT_THROW(parse_surface("d=2 n=1\nQ1 = x1^3"), InputError);
  EXPECT_THROW(parse_surface("d=2 n=1\nQ1 = x1 + x2"), InputError);
  EXPECT_THROW(parse_surface("d=2 n=1\nQ1 = x1^^2"), InputError);
  EXPECT_THROW(parse_surface(""), InputError);
}

TEST(Surface, SerializeRoundTrip) {
  auto s = parse_surface("d=2 n=2\nQ1 = x1^2\nQ2 = x1*x2\nmeta case=1 lambda=[1,1]");
  ASSERT_TRUE(s.meta.has_value());
  auto back = parse_surface(serialize_surface(s));
  EXPECT_EQ(back.tuple, s.tuple);
  EXPECT_EQ(back.meta, s.meta);
}

TEST(Surface, MetaConsistencyIsChecked) {
  EXPECT_THROW(parse_surface("d=2 n=2\nQ1 = x1^2\nQ2 = x2^2\nmeta case=1 lambda=[1,1]"), InputError);
  EXPECT_THROW(parse_surface("d=2 n=2\nQ1 = x1^2\nQ2 = x1*x2\nmeta case=9"), InputError);
}

TEST(QuadForm, NumberOfVariables) {
  EXPECT_EQ(nv(parse_surface("d=3 n=2\nQ1 = x1^2\nQ2 = x2^2 + x1*x3").tuple), 3);
  EXPECT_EQ(nv(parse_surface("d=4 n=1\nQ1 = x2*x3").tuple), 2);
}

TEST(QuadForm, ChangeOfVariablesComposes) {
  auto q = parse_surface("d=2 n=2\nQ1 = x1^2\nQ2 = x1*x2").tuple;
  RatMatrix swap(2, 2);
  swap(0, 1) = 1;
  swap(1, 0) = 1;
  auto c = change_of_variables(q, swap, RatMatrix::identity(2));
  EXPECT_EQ(c.forms[0](1, 1), Rational(1));
  EXPECT_EQ(change_of_variables(c, swap, RatMatrix::identity(2)), q);
}

TEST(MultiPoly, ArithmeticAndDeterminant) {
  auto x = MultiPoly::variable(2, 0), y = MultiPoly::variable(2, 1);
  auto p = (x + y) * (x - y);
  EXPECT_EQ(p, x * x - y * y);
  EXPECT_EQ(p.eval({Rational(3), Rational(1)}), Rational(8));
  auto det = poly_determinant({{x, y}, {y, x}});
  EXPECT_EQ(det, x * x - y * y);
  EXPECT_EQ(det.max_total_degree(), 2);
  EXPECT_EQ(MultiPoly(2).max_total_degree(), -1);
}

TEST(MultiPoly, DifferenceSubstitution) {
  auto x = MultiPoly::variable(1, 0, 3);
  auto d = x.at_difference();  // 3 (x' - x)
  EXPECT_EQ(d.vars(), 2);
  EXPECT_EQ(d.eval({Rational(1), Rational(4)}), Rational(9));
}
