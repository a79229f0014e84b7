// one line per criterion; exit status 1 when any fails
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "qrestrict/exponents.hpp"
#include "qrestrict/invariants.hpp"
#include "qrestrict/jacobian.hpp"
#include "qrestrict/numerics.hpp"
#include "report.hpp"

using namespace qr;
using Clock = std::chrono::steady_clock;

namespace {

const char* kPair = "d=3 n=2\nQ1 = x1^2\nQ2 = x2^2 + x1*x3\n";
const char* kMixed = "d=2 n=2\nQ1 = x1^2\nQ2 = x1*x2\n";

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*g", digits, v);
  return b;
}

bool same_up_to_sign(const MultiPoly& a, const MultiPoly& b) { return a == b || a == -b; }

Outcome jacobian_values() {
  auto q = parse_surface(kPair).tuple;
  auto x1 = MultiPoly::variable(3, 0), x2 = MultiPoly::variable(3, 1);
  auto j2 = jacobian_poly(q, {2}), j3 = jacobian_poly(q, {3});
  auto best = best_selection(q);
  bool ok = same_up_to_sign(j2, x1 * x1 * Rational(2)) && same_up_to_sign(j3, x1 * x2 * Rational(4)) &&
            best.selection == IndexSelection{3} && best.bilinear_p == 4;
  return {ok, "J(.;2) = " + j2.str() + ", J(.;3) = " + j3.str() + ", best {" + std::to_string(best.selection.at(0)) +
                  "}, p = " + (best.bilinear_p ? std::to_string(*best.bilinear_p) : "none")};
}

Outcome degenerate_jacobian() {
  auto cycle = parse_surface("d=4 n=4\nQ1 = x1*x2\nQ2 = x2*x3\nQ3 = x3*x4\nQ4 = x4*x1").tuple;
  auto jc = jacobian_poly(cycle, {});
  auto hyp = parse_surface("d=2 n=2\nQ1 = x1*x2\nQ2 = x1^2 - x2^2").tuple;
  auto jh = jacobian_poly(hyp, {});
  auto v = monomial_comparability(jh);
  bool ok = jc.is_zero() && v.kind == Comparability::LowerBoundMonomial && v.w == Exponent{2, 0};
  std::string w;
  for (int e : v.w) w += (w.empty() ? "" : ",") + std::to_string(e);
  return {ok, "four-cycle J = " + (jc.is_zero() ? std::string("0") : jc.str()) + "; hyperbolic J = " + jh.str() + " -> " +
                  comparability_name(v.kind) + " w=(" + w + ")"};
}

Outcome invariant_values() {
  auto pair = parse_surface(kPair).tuple;
  auto d31 = d_invariant(pair, 3, 1);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> num(-9, 9), den(1, 4);
  Rational b11, b22, b12;
  do {
    b11 = rat(num(rng), den(rng));
    b22 = rat(num(rng), den(rng));
    b12 = rat(num(rng), den(rng));
  } while (b12 == 0 && b11 == b22);
  auto term = [](const Rational& c, const std::string& mono) -> std::string {
    if (c == 0) return "";
    return (c < 0 ? " - " : " + ") + rat_str(abs(c)) + "*" + mono;
  };
  std::string fam = "d=3 n=2\nQ1 = x1^2 + x2^2\nQ2 = x3^2" + term(b11, "x1^2") + term(b22, "x2^2") + term(Rational(2 * b12), "x1*x2");
  auto good = cm_check_3_2(parse_surface(fam).tuple);
  auto bad = cm_check_3_2(pair);
  bool ok = d31.value == 1 && d31.exact && good.satisfied == Tri::True && bad.satisfied == Tri::False;
  return {ok, "d_{3,1} = " + std::to_string(d31.value) + (d31.exact ? " (exact)" : " (bound)") + "; family b=(" + rat_str(b11) +
                  ", " + rat_str(b22) + ", " + rat_str(b12) + "): " + tri_str(good.satisfied) + "; pair: " + tri_str(bad.satisfied)};
}

bool has_constraint(const ExponentRange& r, const Rational& a, const Rational& b, const Rational& c) {
  for (const auto& k : r.constraints)
    if (k.a == a && k.b == b && k.c == c) return true;
  return false;
}

Outcome class_ranges() {
  struct Case {
    const char* text;
    Class2x2 cls;
    int qc, b;
  };
  const Case cases[] = {{"d=2 n=2\nQ1 = x1^2\nQ2 = x1*x2", Class2x2::XiSq_XiXj, 5, 4},
                        {"d=2 n=2\nQ1 = x1^2\nQ2 = x2^2", Class2x2::XiSq_XjSq, 4, 3},
                        {"d=2 n=2\nQ1 = x1*x2\nQ2 = x1^2 - x2^2", Class2x2::Hyperbolic_Pair, 4, 3}};
  // also a disguised copy of each, through integer changes of variables
  RatMatrix m1(2, 2), m2(2, 2);
  m1.a = {2, 1, 1, 1};
  m2.a = {1, 3, 0, 1};
  bool ok = true;
  std::ostringstream os;
  for (const auto& c : cases) {
    auto q = parse_surface(c.text).tuple;
    for (const auto& t : {q, change_of_variables(q, m1, m2)}) {
      auto k = classify_2x2(t);
      bool good = k.cls == c.cls;
      if (good) {
        auto r = class_range(k.cls);
        good = r.q_critical == c.qc && has_constraint(r, 1, c.b, 1);
      }
      ok &= good;
    }
    os << class_name(c.cls) << ": q > " << c.qc << ", 1/p + " << c.b << "/q < 1; ";
  }
  return {ok, os.str()};
}

Outcome sharpness_closed_form() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  int mismatches = 0;
  for (int it = 0; it < 1000; ++it) {
    int n = 1 + static_cast<int>(rng() % 8);
    std::vector<int> w(n);
    for (auto& v : w) v = static_cast<int>(rng() % 7);
    if (*std::max_element(w.begin(), w.end()) == 0) w[rng() % n] = 1 + static_cast<int>(rng() % 6);
    if (sharpness_optimizer(w).q_lower != Rational(*std::max_element(w.begin(), w.end()) + 3)) ++mismatches;
  }
  double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10, std::to_string(mismatches) + " mismatches in 1000, " + fmt(secs, 3) + " s"};
}

// independent: strip powers of two, then rho = 8a + 2^b with v2(d) = 4a + b
int rho_brute(int d) {
  int v = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++v;
  }
  for (int a = 0; a <= v / 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (4 * a + b == v) return 8 * a + (1 << b);
  return -1;
}

Outcome hurwitz_radon_values() {
  int bad = 0;
  for (int d = 1; d <= 64; ++d) {
    int r = hurwitz_radon(d);
    if ((d % 2 == 1 && r != 1) || r > d || r != rho_brute(d)) ++bad;
  }
  return {bad == 0, "d = 1..64, " + std::to_string(bad) + " disagreements; rho(16) = " + std::to_string(hurwitz_radon(16)) +
                        ", rho(64) = " + std::to_string(hurwitz_radon(64))};
}

Outcome oracle_equivalence() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> num(-2, 2);
  double worst = 0;
  std::ostringstream os;
  for (int it = 0; it < 10; ++it) {
    int d = 1 + it % 3, n = 1 + (it / 3) % 2;
    QuadTuple q(d, n);
    for (auto& f : q.forms)
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) f.set(a, b, rat(num(rng), 2));
    int N = static_cast<int>(std::floor(std::pow(262144.0, 1.0 / d) + 1e-9));
    auto f = GridFunction::random(d, std::vector<int>(d, N), rng());
    // largest |x| the band-limit rule allows at this resolution, shared over d+n coordinates
    double xmax = N / (8 * (1 + 2 * gradient_bound(q))) / std::sqrt(static_cast<double>(d + n));
    std::uniform_real_distribution<double> u(-xmax, xmax);
    TensorGrid g;
    for (int k = 0; k < d + n; ++k) g.axes.push_back({u(rng), u(rng), u(rng)});
    auto fast = extension_eval_fast(q, f, g);
    double err = fast_vs_oracle_check(q, f, g, fast, 8, rng(), 1e-8);
    worst = std::max(worst, err);
  }
  double secs = seconds_since(t0);
  os << "10 instances, worst relative error " << fmt(worst, 3) << ", " << fmt(secs, 3) << " s";
  return {worst <= 1e-8 && secs < 60, os.str()};
}

report::VerifyOutcome run_verify(const std::string& text, report::VerifyOptions o) {
  o.threads = default_threads();
  return report::verify(parse_surface(text), o);
}

Outcome dp_scaling() {
  auto t0 = Clock::now();
  const double p = 4.5;
  struct Series {
    std::vector<double> t;
    double bound;
    const char* name;
  };
  const Series series[] = {{{0.5, 0, 0}, 2 / p - 0.5 + 0.1, "(R^-1/2,1,1)"}, {{0, 0.5, 0}, 1 / p - 1.0 / 3 + 0.1, "(1,R^-1/2,1)"}};
  bool ok = true;
  std::ostringstream os;
  for (const auto& s : series) {
    report::VerifyOptions o;
    o.experiment = "dp-scaling";
    o.p = {p};
    o.t = s.t;
    o.slope_max = s.bound;
    auto res = run_verify(kPair, o);
    double slope = res.summary["results"][0]["slope"].get<double>();
    ok &= !res.failed && slope <= s.bound;
    os << s.name << " slope " << fmt(slope) << " <= " << fmt(s.bound) << "; ";
  }
  double secs = seconds_since(t0);
  os << fmt(secs, 3) << " s";
  return {ok && secs <= 900, os.str()};
}

Outcome bilinear_independence() {
  std::ostringstream os;
  report::VerifyOptions o;
  o.experiment = "bd-sweep";
  o.mu = {4, 8, 16, 32};
  o.p = {4};
  o.sep_constant = 3;
  o.sep_axes = {1, 2};
  o.expect = "bounded";
  auto both = run_verify(kPair, o);
  double spread = both.summary["results"][0]["max_over_min"].get<double>();
  o.sep_axes = {1};
  o.expect = "increasing";
  auto one = run_verify(kPair, o);
  std::string vals;
  for (const auto& r : one.rows) vals += (vals.empty() ? "" : ", ") + fmt(r.value);
  bool ok = !both.failed && !one.failed && spread <= 2;
  os << "axes 1,2: max/min " << fmt(spread) << " <= 2; axis 1 only: " << vals
     << (one.summary["results"][0]["strictly_increasing"].get<bool>() ? " (increasing)" : " (not increasing)");
  return {ok, os.str()};
}

Outcome tube_and_square_function() {
  auto q = parse_surface(kMixed).tuple;
  auto tc = tube_locally_constant_check(q, {1, 0}, 64, 100, 1);
  report::VerifyOptions o;
  o.experiment = "sharpness";
  o.t = {1, 0};
  auto res = run_verify(kMixed, o);
  const auto& qe = res.summary["q_estimate"];
  bool have = qe.contains("empirical_q_lower") && qe["empirical_q_lower"].is_number();
  double qstar = have ? qe["empirical_q_lower"].get<double>() : 0;
  bool ok = tc.min_ratio >= 0.25 && have && qstar >= 5 - 0.15;
  return {ok, "tube min ratio " + fmt(tc.min_ratio) + " >= 0.25 over 100 samples; empirical q lower bound " +
                  (have ? fmt(qstar) : std::string("n/a")) + " >= 4.85"};
}

Outcome determinism() {
  report::VerifyOptions o;
  o.experiment = "dp-scaling";
  o.t = {0.5, 0, 0};
  o.R = {16, 32, 64, 128};
  o.p = {4.5};
  o.seed = 42;
  auto spec = parse_surface(kPair);
  o.threads = 1;
  auto a = report::verify(spec, o);
  o.threads = 8;
  auto b = report::verify(spec, o);
  std::string ca = csv_write(a.rows, a.mu_columns), cb = csv_write(b.rows, b.mu_columns);
  return {ca == cb, ca == cb ? "CSV identical at 1 and 8 threads (" + std::to_string(ca.size()) + " bytes)" : "CSV differs"};
}

}  // namespace

int main() {
  const std::pair<int, std::function<Outcome()>> criteria[] = {
      {1, jacobian_values},     {2, degenerate_jacobian},   {3, invariant_values},       {4, class_ranges},
      {5, sharpness_closed_form}, {6, hurwitz_radon_values}, {7, oracle_equivalence},     {8, dp_scaling},
      {9, bilinear_independence}, {10, tube_and_square_function}, {11, determinism}};
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of 11 criteria passed\n", 11 - failed);
  return failed ? 1 : 0;
}
