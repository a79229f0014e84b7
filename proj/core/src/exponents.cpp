#include "qrestrict/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qr {

namespace {

void need(CaseParameters& p, bool ok, const std::string& clause) {
  if (!ok) {
    p.valid = false;
    p.violated.push_back(clause);
  }
}

bool no_mixed_terms(const SymMatrix& s) {
  for (int a = 0; a < s.dim; ++a)
    for (int b = 0; b < s.dim; ++b)
      if (a != b && s(a, b) != 0) return false;
  return true;
}

// P independent of the 0-based variables in [from, to) and of `extra` (-1 = none)
bool independent_of(const SymMatrix& s, int from, int to, int extra) {
  for (int a = 0; a < s.dim; ++a)
    for (int b = 0; b < s.dim; ++b) {
      if (s(a, b) == 0) continue;
      for (int v : {a, b})
        if ((v >= from && v < to) || v == extra) return false;
    }
  return true;
}

int max_over(const std::vector<int>& w, int lo, int hi) {  // 1-based inclusive, -inf if empty
  int m = -1000000;
  for (int j = lo; j <= hi; ++j) m = std::max(m, w[j - 1]);
  return m;
}

}  // namespace

CaseParameters case_parameters(const SurfaceSpec& spec) {
  if (!spec.meta) throw InputError("case_parameters needs structural metadata (a 'meta case=...' line)");
  const StructuralMeta& m = *spec.meta;
  const QuadTuple& q = spec.tuple;
  check_meta_consistency(q, m);
  CaseParameters p;
  p.case_tag = m.case_tag;
  p.d = q.d;
  p.n = q.n;
  p.k = q.d - q.n;
  p.lambda = m.lambda;
  p.w.assign(q.d, 0);
  const char c = m.case_tag[0];
  const int n = q.n, k = p.k;
  if (c == '1' || c == '3' || c == '4') {
    for (int l : m.lambda) p.w[l - 1] += 1;
    if (c == '1') {
      for (int j = 1; j <= n; ++j) need(p, m.lambda[j - 1] <= j, "lambda_j <= j for each j (fails at j=" + std::to_string(j) + ")");
    } else if (c == '3') {
      for (int j = 1 + k; j <= n + k; ++j)
        need(p, m.lambda[j - k - 1] <= j, "lambda_j <= j for k+1 <= j <= n+k (fails at j=" + std::to_string(j) + ")");
      for (int j = 1; j <= k; ++j) need(p, p.w[j - 1] >= 1, "w_j >= 1 for 1 <= j <= k (fails at j=" + std::to_string(j) + ")");
    } else {
      p.eta = *m.eta;
      const int eta = p.eta;
      for (int j = eta + 1 + k; j <= n + k; ++j)
        need(p, m.lambda[j - eta - k - 1] <= j, "lambda_j <= j for eta+k+1 <= j <= n+k (fails at j=" + std::to_string(j) + ")");
      for (int j = eta + 1; j <= eta + k; ++j)
        need(p, p.w[j - 1] >= 1, "w_j >= 1 for eta+1 <= j <= eta+k (fails at j=" + std::to_string(j) + ")");
    }
    return p;
  }
  // polynomial cases 2x / 5x
  PolyCaseShape shape = polynomial_case_shape(q, m);
  const int w1 = *m.w1, lam = m.lambda[0];
  const int w_lam = n - w1;
  p.w1 = w1;
  p.w_lambda = w_lam;
  p.theta = shape.theta;
  p.w[0] += w1;
  p.w[lam - 1] += w_lam;
  const int theta = shape.theta;
  const char sub = m.case_tag[1];
  const int top = (c == '2') ? n : n + k;  // P_j must avoid x_j..x_top
  const std::string top_name = (c == '2') ? "n" : "n+k";
  if (c == '5') need(p, w_lam > 0, "w_lambda = n - w1 > 0");
  if (sub == 'd') {
    need(p, 1 <= lam && lam <= w1 + 1, "1 <= lambda <= w1+1");
    need(p, w1 >= w_lam, "w1 >= w_lambda");
    for (size_t i = 0; i < shape.residual.size(); ++i)
      need(p, shape.residual[i].is_zero(), "P_j = 0 for w1+1 <= j <= n (fails at j=" + std::to_string(w1 + 1 + i) + ")");
    return p;
  }
  need(p, 2 <= lam && lam <= w1 + 1, "2 <= lambda <= w1+1");
  if (sub == 'c') {
    Rational rhs = Rational(w_lam) + Rational(theta, 2);
    need(p, Rational(w1) >= rhs, "w1 >= w_lambda + theta/2");
    int nonzero = 0;
    for (size_t i = 0; i < shape.residual.size(); ++i) {
      const SymMatrix& r = shape.residual[i];
      if (r.is_zero()) continue;
      ++nonzero;
      int j = w1 + 1 + static_cast<int>(i);
      need(p, no_mixed_terms(r), "P_j has no mixed terms (fails at j=" + std::to_string(j) + ")");
      need(p, independent_of(r, j - 1, top, -1), "P_j independent of x_j..x_" + top_name + " (fails at j=" + std::to_string(j) + ")");
    }
    need(p, nonzero <= 1, "P_j' = 0 for all but one j");
    return p;
  }
  need(p, w1 >= w_lam + theta, "w1 >= w_lambda + theta");
  for (size_t i = 0; i < shape.residual.size(); ++i) {
    const SymMatrix& r = shape.residual[i];
    int j = w1 + 1 + static_cast<int>(i);
    if (sub == 'a') {
      need(p, independent_of(r, j - 1, top, 0), "P_j independent of x1, x_j..x_" + top_name + " (fails at j=" + std::to_string(j) + ")");
    } else {
      need(p, no_mixed_terms(r), "P_j has no mixed terms (fails at j=" + std::to_string(j) + ")");
      need(p, independent_of(r, j - 1, top, -1), "P_j independent of x_j..x_" + top_name + " (fails at j=" + std::to_string(j) + ")");
    }
  }
  return p;
}

ExponentRange monomial_type_range(int max_w) {
  ExponentRange r;
  r.q_critical = max_w + 3;
  r.constraints.push_back({0, 1, Rational(1) / r.q_critical});
  r.constraints.push_back({1, max_w + 2, 1});
  return r;
}

ExponentRange predicted_range(const CaseParameters& p) {
  if (!p.valid) {
    std::string why;
    for (const auto& v : p.violated) why += (why.empty() ? "" : "; ") + v;
    throw InputError("hypotheses of case " + p.case_tag + " fail: " + why);
  }
  const char c = p.case_tag[0];
  if (c == '1') return monomial_type_range(*std::max_element(p.w.begin(), p.w.end()));
  if (c == '2' || c == '5') return monomial_type_range(*p.w1);
  int crit;
  if (c == '3') {
    crit = std::max(max_over(p.w, 1, p.k) + 2, max_over(p.w, p.k + 1, p.n + p.k) + 3);
  } else {
    crit = std::max({max_over(p.w, 1, p.eta) + 4, max_over(p.w, p.eta + 1, p.eta + p.k) + 2,
                     max_over(p.w, p.eta + p.k + 1, p.n + p.k) + 3});
  }
  ExponentRange r;
  r.q_critical = crit;
  r.constraints.push_back({0, 1, Rational(1, crit)});
  r.constraints.push_back({1, crit - 1, 1});
  return r;
}

ExponentRange class_range(Class2x2 c) {
  switch (c) {
    case Class2x2::XiSq_XiXj: return monomial_type_range(2);
    case Class2x2::XiSq_XjSq:
    case Class2x2::Hyperbolic_Pair: return monomial_type_range(1);
    default: break;
  }
  throw InputError("degenerate 2x2 tuple: no predicted range");
}

Rational necessary_q_box(const std::vector<int>& w, const std::vector<Rational>& t) {
  if (w.size() != t.size()) throw InputError("necessary_q_box: w and t differ in length");
  Rational num = 0, den = 0;
  for (size_t j = 0; j < w.size(); ++j) {
    num += w[j] * t[j];
    den += t[j];
  }
  if (den == 0) throw InputError("necessary_q_box: t must be nonzero");
  return num / den + 3;
}

SharpnessResult sharpness_optimizer(const std::vector<int>& w, int denominator) {
  const int n = static_cast<int>(w.size());
  if (n == 0) throw InputError("sharpness_optimizer: empty w");
  if (n > 16) throw BudgetError("sharpness_optimizer: n=" + std::to_string(n) + " exceeds the cap n <= 16");
  if (denominator < 1) throw InputError("sharpness_optimizer: grid denominator must be >= 1");
  if (std::any_of(w.begin(), w.end(), [](int v) { return v < 0; })) throw InputError("sharpness_optimizer: w must be nonnegative");
  if (std::all_of(w.begin(), w.end(), [](int v) { return v == 0; })) throw InputError("sharpness_optimizer: w must not be all zero");
  const int base = denominator + 1;
  double total_d = std::pow(static_cast<double>(base), n);
  if (total_d > static_cast<double>(1L << 26)) throw BudgetError("sharpness_optimizer: grid above 2^26 points");
  const long total = static_cast<long>(std::llround(total_d));
  // t = s / denominator; enumerate s in lexicographic order (first coordinate most significant)
  std::vector<int> s(n, 0), best_s;
  long best_num = -1, best_den = 1;
  for (long code = 1; code < total; ++code) {
    long c = code;
    for (int j = n - 1; j >= 0; --j) {
      s[j] = static_cast<int>(c % base);
      c /= base;
    }
    long num = 0, den = 0;
    for (int j = 0; j < n; ++j) {
      num += static_cast<long>(w[j]) * s[j];
      den += s[j];
    }
    bool better = best_num < 0 || num * best_den > best_num * den;
    if (!better && num * best_den == best_num * den) {
      // ties: sparser support wins, then the lexicographically larger t
      long nnz = std::count_if(s.begin(), s.end(), [](int v) { return v != 0; });
      long best_nnz = std::count_if(best_s.begin(), best_s.end(), [](int v) { return v != 0; });
      better = nnz < best_nnz || (nnz == best_nnz && s > best_s);
    }
    if (better) {
      best_num = num;
      best_den = den;
      best_s = s;
    }
  }
  SharpnessResult r;
  r.q_lower = Rational(best_num, best_den) + 3;
  r.q_lower.canonicalize();
  for (int v : best_s) {
    Rational t(v, denominator);
    t.canonicalize();
    r.argmax_t.push_back(t);
  }
  r.points = total - 1;
  return r;
}

std::vector<Vertex> admissible_region_vertices(const ExponentRange& range) {
  // closed half-planes a x + b y <= c, x = 1/p, y = 1/q, inside the unit square
  std::vector<LinearConstraint> hs = range.constraints;
  hs.push_back({-1, 0, 0});
  hs.push_back({0, -1, 0});
  hs.push_back({1, 0, 1});
  hs.push_back({0, 1, 1});
  auto inside = [&](const Rational& x, const Rational& y) {
    for (const auto& h : hs)
      if (h.a * x + h.b * y > h.c) return false;
    return true;
  };
  std::vector<Vertex> pts;
  for (size_t i = 0; i < hs.size(); ++i)
    for (size_t j = i + 1; j < hs.size(); ++j) {
      Rational det = hs[i].a * hs[j].b - hs[i].b * hs[j].a;
      if (det == 0) continue;
      Rational x = (hs[i].c * hs[j].b - hs[i].b * hs[j].c) / det;
      Rational y = (hs[i].a * hs[j].c - hs[i].c * hs[j].a) / det;
      if (!inside(x, y)) continue;
      Vertex v{x, y};
      if (std::find(pts.begin(), pts.end(), v) == pts.end()) pts.push_back(v);
    }
  if (pts.size() < 3) {
    // a segment or point has empty interior; the open region is empty
    return {};
  }
  double cx = 0, cy = 0;
  for (const auto& v : pts) {
    cx += v.inv_p.get_d();
    cy += v.inv_q.get_d();
  }
  cx /= pts.size();
  cy /= pts.size();
  std::sort(pts.begin(), pts.end(), [&](const Vertex& a, const Vertex& b) {
    return std::atan2(a.inv_q.get_d() - cy, a.inv_p.get_d() - cx) < std::atan2(b.inv_q.get_d() - cy, b.inv_p.get_d() - cx);
  });
  // drop collinear points
  std::vector<Vertex> out;
  const size_t m = pts.size();
  for (size_t i = 0; i < m; ++i) {
    const Vertex& a = pts[(i + m - 1) % m];
    const Vertex& b = pts[i];
    const Vertex& c = pts[(i + 1) % m];
    Rational cross = (b.inv_p - a.inv_p) * (c.inv_q - a.inv_q) - (b.inv_q - a.inv_q) * (c.inv_p - a.inv_p);
    if (cross != 0) out.push_back(b);
  }
  return out.size() >= 3 ? out : std::vector<Vertex>{};
}

std::optional<std::string> conjecture_flag(const QuadTuple& q) {
  const int n = q.n;
  if (q.d != n || n < 2) return std::nullopt;
  auto only = [&](const SymMatrix& s, std::vector<std::pair<int, int>> allowed) {
    for (int a = 0; a < s.dim; ++a)
      for (int b = a; b < s.dim; ++b) {
        if (s(a, b) == 0) continue;
        if (std::find(allowed.begin(), allowed.end(), std::make_pair(a, b)) == allowed.end()) return false;
      }
    for (auto [a, b] : allowed)
      if (s(a, b) == 0) return false;
    return true;
  };
  if (!only(q.forms[0], {{0, 0}})) return std::nullopt;
  for (int j = 2; j < n; ++j)
    if (!only(q.forms[j - 1], {{0, j - 1}})) return std::nullopt;
  const SymMatrix& last = q.forms[n - 1];
  if (n == 2) {
    // x1*x2 + x2^2
    if (!only(last, {{0, 1}, {1, 1}}) || Rational(2 * last(0, 1)) != last(1, 1)) return std::nullopt;
  } else {
    if (!only(last, {{0, n - 1}, {1, 1}}) || Rational(2 * last(0, n - 1)) != last(1, 1)) return std::nullopt;
  }
  return "conjecture only: the shape (x1^2, x1*x2, ..., x1*x" + std::to_string(n - 1) + ", x1*x" + std::to_string(n) +
         " + x2^2) is expected to satisfy the estimate for p > " + std::to_string(n + 2) +
         " when p = q; not proved, the bilinear route gives only p > " + std::to_string(n + 3);
}

}  // namespace qr
