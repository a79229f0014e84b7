#pragma once
#include <complex>
#include <vector>

namespace qr::special {

using cd = std::complex<double>;

struct GaussRule {
  std::vector<double> nodes, weights;  // on [-1, 1]
};
// cached, thread-safe after first use
const GaussRule& gauss_legendre(int n);

// F(x) = int_0^x exp(i pi u^2 / 2) du
cd fresnel(double x);

// int_a^b exp(2 pi i (alpha t^2 + beta t)) dt
cd quad_phase_integral(double alpha, double beta, double a, double b);

}  // namespace qr::special
