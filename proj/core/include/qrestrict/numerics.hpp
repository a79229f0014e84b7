#pragma once
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrestrict/quadform.hpp"

namespace qr {

using cplx = std::complex<double>;

// axis-aligned box prod [corner_j, corner_j + side_j] inside [0,1]^d
struct Box {
  std::vector<double> corner, side;
  double volume() const;
};

struct GridFunction {
  int d = 0;
  std::vector<int> resolution;
  std::vector<cplx> samples;  // cell centers, row-major, last axis fastest
  std::optional<Box> box_meta;

  static GridFunction box(const Box& b, const std::vector<int>& resolution);
  static GridFunction random(int d, const std::vector<int>& resolution, std::uint64_t seed);
  static GridFunction zero(int d, const std::vector<int>& resolution);
  size_t size() const { return samples.size(); }
  double l1_norm() const;  // midpoint rule
};

// Lambda in the band-limit rule: max over forms of the max row sum of |2 A_j|
double gradient_bound(const QuadTuple& q);
// N >= 8 * max|x| * (1 + 2 Lambda)
int required_resolution(const QuadTuple& q, double max_abs_x);

// ground truth midpoint quadrature; refuses (InputError) when the resolution violates the band-limit rule
std::vector<cplx> extension_eval_oracle(const QuadTuple& q, const GridFunction& f, const std::vector<std::vector<double>>& xs);

// tensor grid of x points; axis k < d is x_k, axis d + j is the coefficient of Q_j
struct TensorGrid {
  std::vector<std::vector<double>> axes;
  size_t size() const;
  std::vector<double> point(size_t flat) const;  // last axis fastest
};

// separable evaluation, same values as the oracle on the grid points
std::vector<cplx> extension_eval_fast(const QuadTuple& q, const GridFunction& f, const TensorGrid& xs, int threads = 1);
// compares fast against oracle on `spot_checks` grid points; throws VerificationError above rel_tol
double fast_vs_oracle_check(const QuadTuple& q, const GridFunction& f, const TensorGrid& xs, const std::vector<cplx>& fast,
                            int spot_checks, std::uint64_t seed, double rel_tol = 1e-8);

// exact E chi_box(x) by closed-form integration in the uncoupled variables and Gauss-Legendre in a vertex cover
class BoxEvaluator {
 public:
  BoxEvaluator(const QuadTuple& q, const Box& box);
  cplx eval(const std::vector<double>& x) const;
  const QuadTuple& tuple() const { return q_; }
  const Box& box() const { return box_; }

 private:
  QuadTuple q_;
  Box box_;
  std::vector<std::vector<double>> a_;  // floating forms, a_[j][r*d+c]
};

struct BallSampling {
  double R = 0;
  std::vector<std::vector<double>> points;
  std::vector<double> weights;  // per-point cell volume
};

struct SamplingOptions {
  double fine_per_width = 4;  // fine spacing 1 / (fine_per_width * W)
  double core_widths = 1.5;   // uniform fine cells out to core_widths / W
  double growth = 1.3;        // geometric cell growth beyond the core
  std::uint64_t seed = 1;
  int threads = 1;
  bool refinement_check = false;  // second pass on a finer grid, sets quadrature_error_flag
};

struct NormEstimate {
  double value = 0;
  double q = 0;
  bool quadrature_error_flag = false;
  double refined_value = 0;  // when a refinement pass ran
  long points = 0;
};

// discrete weighted L^q norm; q = infinity returns the max
NormEstimate lq_norm_ball(const std::vector<cplx>& values, const BallSampling& s, double q);
NormEstimate lq_norm_ball(const std::vector<double>& abs_values, const std::vector<double>& weights, double q);

// one graded, jittered axis covering [-R, R]; nodes and cell widths
struct AxisNodes {
  std::vector<double> nodes, widths;
};
AxisNodes graded_axis(double R, double bandwidth, const SamplingOptions& opt, std::uint64_t axis_seed);
// spectral widths of E chi over the given boxes: side lengths for x axes, Q_j range for the others
std::vector<double> spectral_widths(const QuadTuple& q, const std::vector<Box>& boxes);
// explicit ball sampling (all points); used for small R and as an oracle for the factorized sums
BallSampling ball_sampling(const QuadTuple& q, const std::vector<Box>& boxes, double R, const SamplingOptions& opt);

// ||E chi_box||_{L^p(B_R)} / ||chi_box||_p, a lower-bound proxy for D_p
NormEstimate dp_ratio(const QuadTuple& q, const Box& box, double R, double p, const SamplingOptions& opt = {});
// || |E chi_1 E chi_2|^{1/2} ||_{L^p(B_R)} / (||chi_1||_p ||chi_2||_p)^{1/2}
NormEstimate bd_ratio(const QuadTuple& q, const Box& box1, const Box& box2, double R, double p, const SamplingOptions& opt = {});
// separation |a_j - b_j| >= c / mu_j for every j with mu_j > 1 (mu_j = 1 / side_j); bd_ratio itself does not check
void check_separation(const Box& box1, const Box& box2, double c = 10);

// same quantities by brute force over an explicit BallSampling (validation path)
double dp_integral_bruteforce(const QuadTuple& q, const Box& box, const BallSampling& s, double p);
double bd_integral_bruteforce(const QuadTuple& q, const Box& b1, const Box& b2, const BallSampling& s, double p);

struct ScalingFit {
  std::vector<std::pair<double, double>> series;
  double slope = 0, intercept = 0, stderr_ = 0;
  std::optional<double> predicted;
};
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& series);

// partition of [0,1]^d into boxes of sides R^{-t_j} (rounded to 1/m_j with m_j = round(R^{t_j}))
std::vector<Box> partition_boxes(const std::vector<double>& t, double R, long cap = 1L << 16);
// integral over B_R of (sum_tau |E chi_tau|^2)^{q/2}
NormEstimate square_function_sharpness(const QuadTuple& q, const std::vector<double>& t, double R, double qexp,
                                       const SamplingOptions& opt = {});
// same integral for several exponents at once, sharing the evaluations
std::vector<NormEstimate> square_function_integrals(const QuadTuple& q, const std::vector<Box>& boxes, double R,
                                                    const std::vector<double>& qexps, const SamplingOptions& opt = {});

struct TubeCheck {
  double min_ratio = 0, max_ratio = 0;
  int samples = 0;
  double ratio_at_zero = 0;
};
// every form must be a single monomial x_a x_b; tube |x_k| <= R^{t_k}/100, |y_j| <= R^{t_a + t_b}/100
TubeCheck tube_locally_constant_check(const QuadTuple& q, const std::vector<double>& t, double R, int samples = 100,
                                      std::uint64_t seed = 1);

// caps tau with |E f_tau(x)| >= |E f(x)| / (100 #caps); f_tau = f restricted to cells whose centers lie in tau
struct SignificantSet {
  std::vector<int> members;
  std::vector<double> cap_values;  // |E f_tau(x)|
  double total = 0;                // |E f(x)|
};
SignificantSet significant_set(const QuadTuple& q, const std::vector<Box>& caps, const GridFunction& f,
                               const std::vector<double>& x);

// CSV with columns R, p_or_q, mu..., value, slope_running, flag
struct CsvRow {
  double R = 0, p_or_q = 0;
  std::vector<double> mu;
  double value = 0;
  std::optional<double> slope_running;
  std::string flag;
};
std::string format_double(double v);  // 17 significant digits
std::string csv_write(const std::vector<CsvRow>& rows, int mu_columns);
std::vector<CsvRow> csv_read(const std::string& text);

// binary cache: "QRX1", u32 version, u64 surface hash, u32 ndims, u32 dims[ndims], complex64 samples (LE)
std::uint64_t surface_hash(const QuadTuple& q);
void cache_write(const std::string& path, std::uint64_t hash, const std::vector<std::uint32_t>& dims,
                 const std::vector<cplx>& samples);
struct CacheBlob {
  std::uint64_t hash = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::complex<float>> samples;
};
CacheBlob cache_read(const std::string& path);

// QRESTRICT_THREADS or 1
int default_threads();

}  // namespace qr
