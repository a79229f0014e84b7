#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qrestrict/exponents.hpp"
#include "qrestrict/invariants.hpp"
#include "qrestrict/jacobian.hpp"
#include "qrestrict/numerics.hpp"

using namespace qr;

namespace {

// small rational entries, many zeros so the structure is not always generic
QuadTuple random_tuple(std::mt19937_64& rng, int d, int n) {
  std::uniform_int_distribution<int> num(-3, 3), den(1, 2), zero(0, 2);
  QuadTuple q(d, n);
  for (auto& f : q.forms)
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b)
        if (zero(rng) == 0) f.set(a, b, rat(num(rng), den(rng)));
  return q;
}

RatMatrix random_invertible(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> e(-2, 2);
  for (;;) {
    RatMatrix m(n, n);
    for (auto& v : m.a) v = e(rng);
    if (m.rank() == n) return m;
  }
}

}  // namespace

TEST(Property, SerializeParseRoundTrip) {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 200; ++it) {
    int d = 1 + static_cast<int>(rng() % 4), n = 1 + static_cast<int>(rng() % 3);
    SurfaceSpec s;
    s.tuple = random_tuple(rng, d, n);
    auto back = parse_surface(serialize_surface(s));
    ASSERT_EQ(back.tuple, s.tuple) << serialize_surface(s);
  }
}

TEST(Property, InvariantsUnderChangeOfVariables) {
  std::mt19937_64 rng(12);
  for (int it = 0; it < 25; ++it) {
    auto q = random_tuple(rng, 3, 2);
    auto c = change_of_variables(q, random_invertible(rng, 3), random_invertible(rng, 2));
    EXPECT_EQ(min_rank_pencil(q).rank, min_rank_pencil(c).rank);
    auto a = d_invariant(q, 3, 1), b = d_invariant(c, 3, 1);
    if (a.exact && b.exact) EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(d_invariant(q, 3, 2).value, d_invariant(c, 3, 2).value);
  }
}

TEST(Property, DInvariantCertificates) {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 25; ++it) {
    auto q = random_tuple(rng, 3, 2);
    for (auto [ds, ns] : {std::pair{2, 1}, {3, 1}, {2, 2}}) {
      auto r = d_invariant(q, ds, ns);
      EXPECT_LE(r.lower_bound, r.value);
      EXPECT_EQ(r.m1.rank(), ds);
      EXPECT_EQ(r.m2.rank(), ns);
      if (r.certificate_attains) EXPECT_EQ(nv(change_of_variables(q, r.m1, r.m2)), r.value);
    }
  }
}

TEST(Property, JacobianMatchesNumericDeterminant) {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<int> e(-5, 5);
  for (int it = 0; it < 40; ++it) {
    int d = 2 + static_cast<int>(rng() % 3), n = 1 + static_cast<int>(rng() % (d - 1));
    auto q = random_tuple(rng, d, n);
    for (const auto& sel : all_selections(q)) {
      std::vector<Rational> xi(d);
      for (auto& v : xi) v = rat(e(rng), 1 + static_cast<long>(rng() % 3));
      RatMatrix m(d, d);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < d; ++k) {
          Rational s = 0;
          for (int c = 0; c < d; ++c) s += q.forms[j](k, c) * xi[c];
          m(j, k) = 2 * s;
        }
      for (size_t r = 0; r < sel.selection.size(); ++r) m(n + static_cast<int>(r), sel.selection[r] - 1) = 1;
      EXPECT_EQ(sel.poly.eval(xi), determinant(m));
    }
  }
}

TEST(Property, ExtensionBoundedByL1) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int it = 0; it < 10; ++it) {
    auto q = random_tuple(rng, 2, 1);
    int res = std::max(16, required_resolution(q, std::sqrt(3.0)));
    auto f = GridFunction::random(2, {res, res}, rng());
    double l1 = f.l1_norm();
    std::vector<std::vector<double>> xs;
    for (int k = 0; k < 5; ++k) xs.push_back({u(rng), u(rng), u(rng)});
    for (auto v : extension_eval_oracle(q, f, xs)) EXPECT_LE(std::abs(v), l1 * (1 + 1e-12));
  }
}

TEST(Property, FastMatchesOracleRandom) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int it = 0; it < 6; ++it) {
    int d = 1 + it % 2, n = 1 + it % 2;
    auto q = random_tuple(rng, d, n);
    std::vector<int> res(d, std::max(16, required_resolution(q, 0.4 * std::sqrt(d + n))));
    auto f = GridFunction::random(d, res, rng());
    TensorGrid g;
    for (int k = 0; k < d + n; ++k) g.axes.push_back({u(rng), u(rng)});
    auto fast = extension_eval_fast(q, f, g);
    EXPECT_LE(fast_vs_oracle_check(q, f, g, fast, static_cast<int>(g.size()), rng(), 1e-8), 1e-8);
  }
}

TEST(Property, BoxEvaluatorSymmetries) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3);
  auto q = parse_surface("d=2 n=1\nQ1 = x1*x2").tuple;
  BoxEvaluator ev(q, Box{{0.25, 0.25}, {0.5, 0.5}});
  for (int it = 0; it < 20; ++it) {
    double a = u(rng), b = u(rng), c = u(rng);
    // conj(E(x)) = E(-x)
    EXPECT_LT(std::abs(std::conj(ev.eval({a, b, c})) - ev.eval({-a, -b, -c})), 1e-10);
    // swapping axes is a symmetry of x1*x2 on this box
    EXPECT_LT(std::abs(ev.eval({a, b, c}) - ev.eval({b, a, c})), 1e-10);
  }
}

TEST(Property, RegionVerticesSatisfyConstraints) {
  for (int m = 1; m <= 6; ++m) {
    auto r = monomial_type_range(m);
    auto vs = admissible_region_vertices(r);
    ASSERT_GE(vs.size(), 3u);
    for (const auto& v : vs) {
      EXPECT_GE(v.inv_p, 0);
      EXPECT_LE(v.inv_p, 1);
      EXPECT_GE(v.inv_q, 0);
      EXPECT_LE(v.inv_q, 1);
      for (const auto& c : r.constraints) EXPECT_LE(c.a * v.inv_p + c.b * v.inv_q, c.c);
    }
    EXPECT_EQ(r.q_critical, Rational(m + 3));
  }
}

TEST(Property, SharpnessEqualsMaxPlusThree) {
  std::mt19937_64 rng(18);
  for (int it = 0; it < 200; ++it) {
    int n = 1 + static_cast<int>(rng() % 6);
    std::vector<int> w(n);
    for (auto& v : w) v = static_cast<int>(rng() % 5);
    if (*std::max_element(w.begin(), w.end()) == 0) w[0] = 1;
    EXPECT_EQ(sharpness_optimizer(w).q_lower, Rational(*std::max_element(w.begin(), w.end()) + 3));
  }
}

TEST(Property, CsvDoublesExact) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-30, 30);
  std::vector<CsvRow> rows;
  for (int i = 0; i < 100; ++i) rows.push_back({std::exp(u(rng)), u(rng), {u(rng)}, std::exp(u(rng)), u(rng), "ok"});
  auto back = csv_read(csv_write(rows, 1));
  ASSERT_EQ(back.size(), rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].R, rows[i].R);
    EXPECT_EQ(back[i].p_or_q, rows[i].p_or_q);
    EXPECT_EQ(back[i].mu, rows[i].mu);
    EXPECT_EQ(back[i].value, rows[i].value);
    EXPECT_EQ(back[i].slope_running, rows[i].slope_running);
  }
}

TEST(Property, BilinearGrowthWithSeparationScale) {
  // the bilinear ratio stays within a constant factor across mu when transversal in both coordinates
  auto q = parse_surface("d=2 n=1\nQ1 = x1*x2").tuple;
  std::vector<double> vals;
  for (double mu : {4.0, 8.0}) {
    Box a{{0, 0}, {1 / mu, 1 / mu}}, b{{3 / mu, 3 / mu}, {1 / mu, 1 / mu}};
    check_separation(a, b, 3);
    vals.push_back(bd_ratio(q, a, b, 16, 4).value);
  }
  EXPECT_LT(vals[1] / vals[0], 4 * 1.5);
  EXPECT_GT(vals[1] / vals[0], 1 / (4 * 1.5));
}
