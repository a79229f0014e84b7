#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "qrestrict/numerics.hpp"
#include "qrestrict/surface.hpp"

using namespace qr;

namespace {
QuadTuple tuple(const std::string& s) { return parse_surface(s).tuple; }
Box make_box(std::vector<double> corner, std::vector<double> side) { return Box{std::move(corner), std::move(side)}; }
const char* kMixed = "d=2 n=2\nQ1 = x1^2\nQ2 = x1*x2";
}  // namespace

TEST(Oracle, ConstantAtOrigin) {
  auto q = tuple("d=1 n=1\nQ1 = x1^2");
  auto f = GridFunction::box(make_box({0}, {1}), {64});
  auto v = extension_eval_oracle(q, f, {{0.0, 0.0}});
  EXPECT_NEAR(v[0].real(), 1.0, 1e-14);
  EXPECT_NEAR(v[0].imag(), 0.0, 1e-14);
}

TEST(Oracle, HalfFrequencyClosedForm) {
  // int_0^1 e^{i pi s} ds = 2i/pi
  auto q = tuple("d=1 n=1\nQ1 = x1^2");
  auto f = GridFunction::box(make_box({0}, {1}), {2000});
  auto v = extension_eval_oracle(q, f, {{0.5, 0.0}});
  EXPECT_NEAR(v[0].real(), 0.0, 1e-6);
  EXPECT_NEAR(v[0].imag(), 2 / std::numbers::pi, 1e-6);
}

TEST(Oracle, RefusesCoarseGrid) {
  auto q = tuple(kMixed);
  auto f = GridFunction::random(2, {8, 8}, 3);
  EXPECT_THROW(extension_eval_oracle(q, f, {{3.0, 0.0, 1.0, 1.0}}), InputError);
  EXPECT_EQ(required_resolution(q, 1.0), 8 * (1 + 2 * 2));
}

TEST(FastEval, MatchesOracleOnGrid) {
  auto q = tuple("d=2 n=1\nQ1 = x1*x2");
  auto f = GridFunction::random(2, {32, 40}, 7);
  TensorGrid g{{{-0.5, 0.3}, {0.2, 0.4, -0.1}, {-0.6, 0.1}}};
  auto fast = extension_eval_fast(q, f, g, 2);
  ASSERT_EQ(fast.size(), g.size());
  std::vector<std::vector<double>> pts;
  for (size_t i = 0; i < g.size(); ++i) pts.push_back(g.point(i));
  auto slow = extension_eval_oracle(q, f, pts);
  for (size_t i = 0; i < g.size(); ++i) EXPECT_LT(std::abs(fast[i] - slow[i]), 1e-12) << i;
  EXPECT_LT(fast_vs_oracle_check(q, f, g, fast, 5, 1), 1e-10);
}

TEST(FastEval, DetectsCorruption) {
  auto q = tuple("d=2 n=1\nQ1 = x1*x2");
  auto f = GridFunction::random(2, {32, 32}, 9);
  TensorGrid g{{{-0.5, 0.3}, {0.2, 0.4}, {0.1}}};
  auto fast = extension_eval_fast(q, f, g);
  for (auto& v : fast) v *= 1.01;
  EXPECT_THROW(fast_vs_oracle_check(q, f, g, fast, 4, 1), VerificationError);
}

TEST(FastEval, ZeroAndLinear) {
  auto q = tuple(kMixed);
  TensorGrid g{{{0.1, -0.2}, {0.3}, {0.05, 0.2}, {-0.1}}};
  auto z = extension_eval_fast(q, GridFunction::zero(2, {40, 40}), g);
  for (auto v : z) EXPECT_EQ(v, cplx(0));
  auto a = GridFunction::random(2, {40, 40}, 1), b = GridFunction::random(2, {40, 40}, 2), c = a;
  for (size_t i = 0; i < c.size(); ++i) c.samples[i] = 2.0 * a.samples[i] - cplx(0, 3) * b.samples[i];
  auto ea = extension_eval_fast(q, a, g), eb = extension_eval_fast(q, b, g), ec = extension_eval_fast(q, c, g);
  for (size_t i = 0; i < g.size(); ++i) EXPECT_LT(std::abs(ec[i] - (2.0 * ea[i] - cplx(0, 3) * eb[i])), 1e-12);
}

TEST(BoxEvaluator, AgreesWithFineQuadrature) {
  auto q = tuple(kMixed);
  auto box = make_box({0.25, 0.0}, {0.5, 0.5});
  BoxEvaluator ev(q, box);
  auto f = GridFunction::box(box, {800, 800});
  std::vector<std::vector<double>> pts{{0, 0, 0, 0}, {1.5, -0.5, 2.0, 1.0}, {-2.0, 1.0, -3.0, 0.5}};
  auto ref = extension_eval_oracle(q, f, pts);
  for (size_t i = 0; i < pts.size(); ++i) EXPECT_LT(std::abs(ev.eval(pts[i]) - ref[i]), 2e-4) << i;
  EXPECT_NEAR(std::abs(ev.eval({0, 0, 0, 0})), 0.25, 1e-12);
}

TEST(LqNorm, Basics) {
  std::vector<double> a{1, 2}, w{1, 1};
  EXPECT_NEAR(lq_norm_ball(a, w, 2).value, std::sqrt(5.0), 1e-15);
  EXPECT_EQ(lq_norm_ball(a, w, INFINITY).value, 2);
  EXPECT_NEAR(lq_norm_ball(a, {0.5, 2}, 1).value, 4.5, 1e-15);
  EXPECT_THROW(lq_norm_ball(a, w, 0.5), InputError);
  EXPECT_THROW(lq_norm_ball(std::vector<double>{}, {}, 2), InputError);
}

TEST(GradedAxis, CoversInterval) {
  SamplingOptions opt;
  auto ax = graded_axis(32, 0.5, opt, 1000);
  double sum = 0;
  for (double w : ax.widths) sum += w;
  EXPECT_NEAR(sum, 64, 1e-9);
  EXPECT_TRUE(std::is_sorted(ax.nodes.begin(), ax.nodes.end()));
  EXPECT_GE(ax.nodes.front(), -32);
  EXPECT_LE(ax.nodes.back(), 32);
  // fine cells near the origin
  EXPECT_NEAR(*std::min_element(ax.widths.begin(), ax.widths.end()), 1 / (opt.fine_per_width * 0.5), 1e-12);
  EXPECT_THROW(graded_axis(0, 1, opt, 1), InputError);
}

TEST(DpRatio, FactorizedEqualsBruteForce) {
  auto q = tuple(kMixed);
  auto box = make_box({0, 0}, {0.5, 1});
  SamplingOptions opt;
  for (double R : {2.0, 4.0}) {
    auto s = ball_sampling(q, {box}, R, opt);
    double brute = dp_integral_bruteforce(q, box, s, 4.5);
    double expect = std::pow(brute, 1 / 4.5) / std::pow(box.volume(), 1 / 4.5);
    EXPECT_NEAR(dp_ratio(q, box, R, 4.5, opt).value / expect, 1.0, 1e-10) << R;
  }
}

TEST(DpRatio, TrivialBoundAndGrowth) {
  auto q = tuple(kMixed);
  auto box = make_box({0, 0}, {1, 1});
  // |E chi| <= |box|, so the ratio is at most |box|^{1-1/p} |cube|^{1/p}
  double p = 4;
  double r1 = dp_ratio(q, box, 1, p).value;
  EXPECT_LE(r1, std::pow(16.0, 1 / p) + 1e-12);
  EXPECT_GT(r1, 0);
  double prev = r1;
  for (double R : {2.0, 4.0, 8.0}) {
    double v = dp_ratio(q, box, R, p).value;
    EXPECT_GT(v, 0.99 * prev) << R;
    prev = v;
  }
  EXPECT_THROW(dp_ratio(q, box, 4, 0.5), InputError);
}

TEST(DpRatio, RefinementFlagReported) {
  auto q = tuple(kMixed);
  SamplingOptions opt;
  opt.refinement_check = true;
  auto e = dp_ratio(q, make_box({0, 0}, {1, 1}), 4, 4, opt);
  EXPECT_GT(e.refined_value, 0);
  EXPECT_EQ(e.quadrature_error_flag, std::abs(e.refined_value - e.value) > 0.01 * e.value);
}

TEST(BdRatio, RefusalsAndBruteForce) {
  auto q = tuple(kMixed);
  auto a = make_box({0, 0}, {0.25, 0.25}), b = make_box({0.75, 0.75}, {0.25, 0.25});
  EXPECT_THROW(bd_ratio(q, a, a, 4, 4), InputError);
  EXPECT_THROW(check_separation(a, make_box({0.25, 0.5}, {0.25, 0.25}), 2), InputError);
  EXPECT_THROW(check_separation(a, make_box({0.5, 0.5}, {0.5, 0.5})), InputError);
  EXPECT_NO_THROW(check_separation(a, b, 3));
  SamplingOptions opt;
  auto s = ball_sampling(q, {a, b}, 4, opt);
  double brute = bd_integral_bruteforce(q, a, b, s, 4);
  double expect = std::pow(brute, 0.25) / std::sqrt(std::pow(a.volume(), 0.25) * std::pow(b.volume(), 0.25));
  EXPECT_NEAR(bd_ratio(q, a, b, 4, 4, opt).value / expect, 1.0, 1e-10);
}

TEST(ScalingFit, ExactPowers) {
  std::vector<std::pair<double, double>> s;
  for (double R : {16.0, 32.0, 64.0, 128.0}) s.push_back({R, 3 * R * R});
  auto f = scaling_fit(s);
  EXPECT_NEAR(f.slope, 2, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_LT(f.stderr_, 1e-10);
  for (auto& [r, v] : s) v = 7;
  EXPECT_NEAR(scaling_fit(s).slope, 0, 1e-12);
}

TEST(ScalingFit, NoisySlope) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  std::vector<std::pair<double, double>> s;
  for (int k = 0; k < 8; ++k) {
    double R = std::pow(2.0, 4 + k);
    s.push_back({R, std::sqrt(R) * (1 + u(rng))});
  }
  auto f = scaling_fit(s);
  EXPECT_NEAR(f.slope, 0.5, 0.02);
  EXPECT_GT(f.stderr_, 0);
}

TEST(ScalingFit, Errors) {
  EXPECT_THROW(scaling_fit({{1, 1}, {2, 2}, {4, 4}}), InputError);
  EXPECT_THROW(scaling_fit({{1, 1}, {2, 2}, {4, 4}, {9, 8}}), InputError);
  EXPECT_THROW(scaling_fit({{1, 1}, {2, 2}, {4, 0}, {8, 8}}), InputError);
  EXPECT_THROW(scaling_fit({{1, 1}, {2, 2}, {2, 3}, {4, 8}}), InputError);
}

TEST(Partition, CountsAndCap) {
  auto boxes = partition_boxes({1, 0.5}, 16);
  EXPECT_EQ(boxes.size(), 64u);
  double vol = 0;
  for (const auto& b : boxes) vol += b.volume();
  EXPECT_NEAR(vol, 1, 1e-12);
  EXPECT_THROW(partition_boxes({1, 1}, 1000), BudgetError);
  EXPECT_THROW(partition_boxes({1.5, 0}, 4), InputError);
}

TEST(SquareFunction, SingleBoxIsPlainNorm) {
  auto q = tuple(kMixed);
  SamplingOptions opt;
  auto box = make_box({0, 0}, {1, 1});
  auto s = ball_sampling(q, {box}, 4, opt);
  double brute = dp_integral_bruteforce(q, box, s, 5);
  double sf = square_function_sharpness(q, {0, 0}, 4, 5, opt).value;
  EXPECT_NEAR(sf / brute, 1, 1e-10);
}

TEST(SquareFunction, SixteenBoxesAgainstBruteForce) {
  auto q = tuple(kMixed);
  SamplingOptions opt;
  auto boxes = partition_boxes({1, 1}, 4);
  ASSERT_EQ(boxes.size(), 16u);
  auto s = ball_sampling(q, boxes, 4, opt);
  std::vector<BoxEvaluator> evs;
  for (const auto& b : boxes) evs.emplace_back(q, b);
  double brute = 0;
  for (size_t i = 0; i < s.points.size(); ++i) {
    double sq = 0;
    for (const auto& e : evs) sq += std::norm(e.eval(s.points[i]));
    brute += s.weights[i] * std::pow(sq, 2.5);
  }
  auto multi = square_function_integrals(q, boxes, 4, {5, 4}, opt);
  EXPECT_NEAR(multi[0].value / brute, 1, 1e-10);
  EXPECT_NEAR(square_function_sharpness(q, {1, 1}, 4, 5, opt).value / brute, 1, 1e-10);
  EXPECT_THROW(square_function_sharpness(q, {1, 1}, 2, 5, opt), InputError);
}

TEST(Tube, LocallyConstantOnMonomials) {
  auto q = tuple(kMixed);
  auto tc = tube_locally_constant_check(q, {1, 0}, 16, 50);
  EXPECT_EQ(tc.samples, 50);
  EXPECT_NEAR(tc.ratio_at_zero, 1, 1e-12);
  EXPECT_GT(tc.min_ratio, 0.99);
  EXPECT_LE(tc.max_ratio, 1 + 1e-9);
  EXPECT_THROW(tube_locally_constant_check(tuple("d=2 n=1\nQ1 = x1^2 + x2^2"), {1, 0}, 16), InputError);
}

TEST(SignificantSet, DisjointCaps) {
  auto q = tuple("d=1 n=1\nQ1 = x1^2");
  auto f = GridFunction::box(make_box({0}, {0.5}), {200});
  std::vector<Box> caps{make_box({0}, {0.5}), make_box({0.5}, {0.5})};
  auto s = significant_set(q, caps, f, {0.3, 0.2});
  EXPECT_EQ(s.members, std::vector<int>{0});
  EXPECT_EQ(s.cap_values[1], 0);
  EXPECT_NEAR(s.cap_values[0], s.total, 1e-12);
  // overlapping caps: cells are counted once
  auto o = significant_set(q, {make_box({0}, {1}), make_box({0}, {0.5})}, f, {0.3, 0.2});
  EXPECT_EQ(o.members, std::vector<int>{0});
  EXPECT_THROW(significant_set(q, {}, f, {0, 0}), InputError);
}

TEST(Csv, RoundTripIsExact) {
  std::vector<CsvRow> rows(2);
  rows[0] = CsvRow{16, 4.5, {4, 0.1}, 0.123456789012345678, std::nullopt, ""};
  rows[1] = CsvRow{32, 4.5, {8, 1.0 / 3}, 1e-300, -0.0123, "pass"};
  auto back = csv_read(csv_write(rows, 2));
  ASSERT_EQ(back.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].R, rows[i].R);
    EXPECT_EQ(back[i].mu, rows[i].mu);
    EXPECT_EQ(back[i].value, rows[i].value);
    EXPECT_EQ(back[i].slope_running, rows[i].slope_running);
    EXPECT_EQ(back[i].flag, rows[i].flag);
  }
  EXPECT_THROW(csv_write(rows, 1), InputError);
  EXPECT_THROW(csv_read("a,b\n1,2\n"), InputError);
  EXPECT_THROW(csv_read("R,p_or_q,value,slope_running,flag\n1,x,3,,\n"), InputError);
}

TEST(Cache, RoundTripAndCorruption) {
  auto dir = std::filesystem::temp_directory_path();
  auto path = (dir / "qrestrict_cache_test.bin").string();
  auto q = tuple(kMixed);
  std::vector<cplx> data{{1, 2}, {-0.5, 0.25}, {3, 0}};
  cache_write(path, surface_hash(q), {3}, data);
  auto blob = cache_read(path);
  EXPECT_EQ(blob.hash, surface_hash(q));
  EXPECT_EQ(blob.dims, std::vector<std::uint32_t>{3});
  ASSERT_EQ(blob.samples.size(), 3u);
  EXPECT_EQ(blob.samples[1], std::complex<float>(-0.5f, 0.25f));
  EXPECT_NE(surface_hash(q), surface_hash(tuple("d=2 n=2\nQ1 = x1^2\nQ2 = x2^2")));
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "QRX2garbage";
  }
  EXPECT_THROW(cache_read(path), InputError);
  std::filesystem::remove(path);
}

TEST(Threads, EnvironmentVariable) {
  unsetenv("QRESTRICT_THREADS");
  EXPECT_EQ(default_threads(), 1);
  setenv("QRESTRICT_THREADS", "3", 1);
  EXPECT_EQ(default_threads(), 3);
  setenv("QRESTRICT_THREADS", "three", 1);
  EXPECT_THROW(default_threads(), InputError);
  setenv("QRESTRICT_THREADS", "0", 1);
  EXPECT_THROW(default_threads(), InputError);
  unsetenv("QRESTRICT_THREADS");
}

TEST(ThreadCount, ResultsIndependent) {
  auto q = tuple(kMixed);
  auto box = make_box({0, 0}, {1, 0.5});
  SamplingOptions one, four;
  four.threads = 4;
  EXPECT_EQ(dp_ratio(q, box, 8, 4.5, one).value, dp_ratio(q, box, 8, 4.5, four).value);
}
