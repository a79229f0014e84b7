#pragma once
#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qrestrict/numerics.hpp"

namespace qr::detail {

using CMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// connected pieces of the coupling graph (off-diagonal support of all forms)
std::vector<std::vector<int>> coupling_components(const QuadTuple& q);

// E chi_box factorized over coupling components, for one fixed y
class BoxEngine {
 public:
  BoxEngine(const QuadTuple& q, const Box& box);

  void set_y(const std::vector<double>& y);
  // factor of component c on the tensor grid of its variables (x values per variable, in component order);
  // result is row-major over the component variables, first variable slowest
  std::vector<std::complex<double>> component_grid(int c, const std::vector<std::vector<double>>& xs) const;
  // the constant phase exp(2 pi i (a^T M a + x.a)) is not included in component_grid; modulus is unaffected
  std::complex<double> translation_phase(const std::vector<double>& x) const;

  const std::vector<std::vector<int>>& components() const { return comps_; }
  int d() const { return d_; }

 private:
  int d_, n_;
  std::vector<std::vector<double>> forms_;  // forms_[j][r*d+c]
  Box box_;
  std::vector<std::vector<int>> comps_;
  std::vector<std::vector<std::vector<int>>> covers_;  // candidate vertex covers per component (local indices)
  std::vector<double> m_;                              // current M(y), d x d
  std::vector<double> shift_;                          // 2 M a
  double const_quad_ = 0;                              // a^T M a
};

}  // namespace qr::detail
