#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrestrict/quadform.hpp"

namespace qr {

struct PencilRank {
  int rank = 0;
  std::vector<double> witness;  // direction y
  std::vector<Rational> witness_exact;  // filled when witness_rational
  bool witness_rational = true;
  bool exact = true;
};

PencilRank min_rank_pencil(const QuadTuple& q, std::uint64_t seed = 1);

struct SearchBudget {
  long max_candidates = 20000;  // structured-layer combinations
  int random_samples = 64;
  std::uint64_t seed = 1;
};

struct DInvariantResult {
  int value = 0;
  bool exact = false;
  RatMatrix m1, m2;             // certificate, M1 is d x d of rank d', M2 is n x n'
  bool certificate_attains = true;  // NV of the certificate equals value
  int lower_bound = 0;          // certified lower bound used for the exactness decision
  std::string search_log;
};

DInvariantResult d_invariant(const QuadTuple& q, int d_sub, int n_sub, const SearchBudget& budget = {});

struct GammaProbe {
  double gamma = 0;
  double estimate = 0;
  double estimate_fine = 0;
  bool divergent = false;
};

enum class Tri { False, True, Inconclusive };
std::string tri_str(Tri t);

struct CmVerdict {
  Tri satisfied = Tri::Inconclusive;
  std::string method;  // characterization_3_2 or integral_probe
  std::vector<GammaProbe> gamma_scan;
  std::string detail;
};

// heuristic: midpoint rule on the sphere at N and 4N, divergence when the value more than doubles
GammaProbe cm_integral_probe(const QuadTuple& q, double gamma, int sphere_nodes);
// d=3, n=2 only; throws InputError when the rank hypothesis fails
CmVerdict cm_check_3_2(const QuadTuple& q);
// probe-only verdict for other shapes
CmVerdict cm_probe_verdict(const QuadTuple& q, int sphere_nodes = 64);

enum class Class2x2 { XiSq_XiXj, XiSq_XjSq, Hyperbolic_Pair, Degenerate };
std::string class_name(Class2x2 c);

struct CanonicalClass2x2 {
  Class2x2 cls = Class2x2::Degenerate;
  std::vector<std::vector<double>> m1, m2;
  double residual = 0;
  int d21 = 0, d12 = 0, d22 = 0;
};

constexpr double kClassifyTolerance = 1e-9;
CanonicalClass2x2 classify_2x2(const QuadTuple& q);

int hurwitz_radon(int d);

}  // namespace qr
