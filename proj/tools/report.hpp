#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrestrict/exponents.hpp"
#include "qrestrict/invariants.hpp"
#include "qrestrict/numerics.hpp"
#include "qrestrict/surface.hpp"

namespace qr::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "qrestrict-report/1";
inline constexpr const char* kVersion = "0.1.0";

// floats with 17 significant digits, non-finite as null
std::string dump(const Json& j);

SurfaceSpec load_spec(const std::string& path);

struct AnalyzeOptions {
  std::uint64_t seed = 1;
  SearchBudget budget;
  int sphere_nodes = 64;
};
Json analyze(const SurfaceSpec& spec, const AnalyzeOptions& opt = {});
Json classify(const SurfaceSpec& spec);

// critical q from declared case metadata or the 2x2 class, when either applies
std::optional<Rational> predicted_q_critical(const SurfaceSpec& spec);

struct VerifyOptions {
  std::string experiment;  // dp-scaling, bd-sweep, sharpness, tube
  std::vector<double> R, p, q, t, mu;
  std::vector<int> sep_axes{1, 2};  // 1-based
  double sep_constant = 10;
  std::optional<double> slope_max;
  std::string expect = "none";  // bd-sweep: bounded, increasing, none
  double sharp_tolerance = 0.15;
  bool full_scale = false;  // sharpness boxes R^-t instead of R^-t/2
  int samples = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  bool refine = false;
};

struct VerifyOutcome {
  std::vector<CsvRow> rows;
  int mu_columns = 0;
  Json summary;
  bool failed = false;
};
VerifyOutcome verify(const SurfaceSpec& spec, const VerifyOptions& opt);

std::string scaling_svg(const std::vector<CsvRow>& rows, std::optional<double> predicted_slope);
std::string region_svg(const std::vector<Vertex>& vertices);
std::vector<Vertex> region_from_report(const Json& report);

}  // namespace qr::report
