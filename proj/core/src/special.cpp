#include "special.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace qr::special {

namespace {

constexpr double kPi = 3.14159265358979323846;
const cd kI(0.0, 1.0);
const cd kHalfOnePlusI(0.5, 0.5);

GaussRule compute_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
    }
    double w = 2 / ((1 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

// power series, fine for |x| <= 2
cd fresnel_series(double x) {
  const cd z = kI * (kPi / 2) * x * x;
  cd term = x;  // (i pi/2)^k x^(2k+1) / k!
  cd sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= z / static_cast<double>(k);
    cd add = term / static_cast<double>(2 * k + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// h(x) for x > 2 with (1+i)/2 - F(x) = exp(i pi x^2/2) h(x); continued fraction of erfc
cd fresnel_tail_envelope(double x) {
  if (x >= 8) {
    // h(x) = i/(pi x) sum_k (2k-1)!! / (i pi x^2)^k, terms shrink fast past x = 8
    const cd step = 1.0 / cd(0, kPi * x * x);
    cd term = 1, sum = 1;
    for (int k = 1; k < 40; ++k) {
      term *= step * static_cast<double>(2 * k - 1);
      sum += term;
      if (std::norm(term) < 1e-34) break;
    }
    return cd(0, 1 / (kPi * x)) * sum;
  }
  const cd z = std::sqrt(kPi) / 2 * cd(1, -1) * x;
  // modified Lentz for z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))
  // plain arithmetic: std::complex division and abs are slow here
  const double tiny = 1e-300;
  auto recip = [](cd v) {
    double n = v.real() * v.real() + v.imag() * v.imag();
    return cd(v.real() / n, -v.imag() / n);
  };
  cd f = z, c = z, d = 0;
  for (int m = 1; m < 2000; ++m) {
    double a = m / 2.0;
    d = z + a * d;
    if (std::norm(d) < tiny) d = tiny;
    d = recip(d);
    c = z + a * recip(c);
    if (std::norm(c) < tiny) c = tiny;
    cd delta = c * d;
    f *= delta;
    if (std::norm(delta - 1.0) < 1e-30) break;
  }
  return kHalfOnePlusI / (std::sqrt(kPi) * f);
}

constexpr double kSeriesLimit = 2.0;

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

cd fresnel(double x) {
  double ax = std::abs(x);
  cd v = ax <= kSeriesLimit ? fresnel_series(ax)
                            : kHalfOnePlusI - std::exp(kI * (kPi / 2) * ax * ax) * fresnel_tail_envelope(ax);
  return x < 0 ? -v : v;
}

namespace {

cd expi2pi(double phase) {
  // reduce first to keep the argument small
  double r = phase - std::round(phase);
  return std::exp(kI * (2 * kPi * r));
}

cd phase_at(double alpha, double beta, double t) {
  // alpha t^2 + beta t reduced mod 1 in two parts to limit rounding
  double p1 = alpha * t * t, p2 = beta * t;
  p1 -= std::round(p1);
  p2 -= std::round(p2);
  return expi2pi(p1 + p2);
}

cd small_phase_gl(double alpha, double beta, double a, double b) {
  const GaussRule& g = gauss_legendre(24);
  double mid = (a + b) / 2, half = (b - a) / 2;
  cd s = 0;
  for (size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * phase_at(alpha, beta, mid + half * g.nodes[i]);
  return s * half;
}

cd linear_phase(double beta, double a, double b) {
  double len = b - a;
  cd z = kI * (2 * kPi * beta * len);
  cd ratio = std::abs(z) < 1e-4 ? 1.0 + z / 2.0 + z * z / 6.0 : (std::exp(z) - 1.0) / z;
  return phase_at(0, beta, a) * len * ratio;
}

cd fresnel_positive(double alpha, double beta, double a, double b) {
  const double root = std::sqrt(alpha);
  const double c = beta / (2 * alpha);
  const double xa = 2 * root * (a + c), xb = 2 * root * (b + c);
  // F(x) = s*(1+i)/2 - s*E_t/pref * h(|x|) in the tail; E_t = exp(2 pi i (alpha t^2 + beta t))
  cd constant_part = 0, oscillating = 0;
  auto add = [&](double x, double t, double sign) {
    if (std::abs(x) <= kSeriesLimit) {
      constant_part += sign * fresnel(x);
    } else {
      double s = x < 0 ? -1 : 1;
      constant_part += sign * s * kHalfOnePlusI;
      oscillating += -sign * s * phase_at(alpha, beta, t) * fresnel_tail_envelope(std::abs(x));
    }
  };
  add(xb, b, 1);
  add(xa, a, -1);
  cd out = oscillating / (2 * root);
  if (constant_part != cd(0)) {
    // pref = exp(-2 pi i alpha c^2) / (2 sqrt(alpha))
    double ph = alpha * c * c;
    ph -= std::round(ph);
    out += expi2pi(-ph) / (2 * root) * constant_part;
  }
  return out;
}

}  // namespace

cd quad_phase_integral(double alpha, double beta, double a, double b) {
  if (b == a) return 0;
  double m = std::max(std::abs(a), std::abs(b));
  if (std::abs(alpha) * m * m + std::abs(beta) * m <= 0.5) return small_phase_gl(alpha, beta, a, b);
  if (alpha == 0) return linear_phase(beta, a, b);
  if (alpha > 0) return fresnel_positive(alpha, beta, a, b);
  return std::conj(fresnel_positive(-alpha, -beta, a, b));
}

}  // namespace qr::special
