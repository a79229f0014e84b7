#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "report.hpp"

using namespace qr;
using report::Json;

namespace {

constexpr int kOk = 0, kInput = 2, kBudget = 3, kVerify = 4;

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int error_exit(const std::string& kind, const std::string& msg, int code) {
  Json e = {{"schema", report::kSchema}, {"error", {{"kind", kind}, {"message", msg}}}};
  std::cout << report::dump(e);
  return code;
}

// "0.5", "1/2"
std::vector<double> numbers(const std::vector<std::string>& raw, const std::string& flag) {
  std::vector<double> out;
  for (const auto& s : raw) {
    try {
      if (s.find('/') != std::string::npos) {
        out.push_back(parse_rat(s).get_d());
      } else {
        size_t used = 0;
        out.push_back(std::stod(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
      }
    } catch (const InputError&) {
      throw InputError(flag + ": cannot read '" + s + "' as a number");
    } catch (const std::logic_error&) {
      throw InputError(flag + ": cannot read '" + s + "' as a number");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qrestrict: invariants, Jacobian analysis, exponent predictions and numerical witnesses for quadratic surfaces"};
  app.require_subcommand(1);

  std::string spec_path, out_path, json_path, kind = "scaling";
  std::vector<std::string> R_raw, p_raw, q_raw, t_raw, mu_raw;
  std::vector<int> sep_axes;
  std::uint64_t seed = 1;
  int threads = 0;
  bool no_fail_exit = false;
  report::VerifyOptions vo;
  std::optional<double> predicted_slope;
  double slope_max = 0, predicted = 0;

  auto common = [&](CLI::App* c) {
    c->add_option("--out", out_path, "output file (stdout when absent)");
    c->add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
    c->add_option("--threads", threads, "worker threads (overrides QRESTRICT_THREADS)")->check(CLI::Range(1, 1024));
    c->add_flag("--no-fail-exit", no_fail_exit, "exit 0 even when a verification row fails");
  };

  auto* analyze = app.add_subcommand("analyze", "symbolic analysis report (no numerics)");
  analyze->add_option("spec", spec_path, "surface spec file")->required();
  common(analyze);

  auto* verify = app.add_subcommand("verify", "numerical witness experiment; CSV plus JSON summary");
  verify->add_option("spec", spec_path, "surface spec file")->required();
  verify->add_option("-e,--experiment", vo.experiment, "dp-scaling, bd-sweep, sharpness or tube")
      ->required()
      ->check(CLI::IsMember({"dp-scaling", "bd-sweep", "sharpness", "tube"}));
  verify->add_option("--R", R_raw, "radii, comma separated")->delimiter(',');
  verify->add_option("--p", p_raw, "exponents p")->delimiter(',');
  verify->add_option("--q", q_raw, "exponents q (sharpness scan)")->delimiter(',');
  verify->add_option("--t", t_raw, "box exponents, one per coordinate")->delimiter(',');
  verify->add_option("--mu", mu_raw, "bd-sweep scales")->delimiter(',');
  verify->add_option("--sep-axes", sep_axes, "bd-sweep separated coordinates (1-based)")->delimiter(',');
  verify->add_option("--sep-constant", vo.sep_constant, "bd-sweep separation |a-b| >= c/mu")->check(CLI::PositiveNumber);
  auto* smax = verify->add_option("--slope-max", slope_max, "dp-scaling: pass when the fitted slope is at most this");
  verify->add_option("--expect", vo.expect, "bd-sweep: bounded, increasing or none")
      ->check(CLI::IsMember({"bounded", "increasing", "none"}));
  verify->add_option("--q-tolerance", vo.sharp_tolerance, "sharpness: allowed shortfall below the critical q");
  verify->add_option("--samples", vo.samples, "tube samples")->check(CLI::Range(1, 1000000));
  verify->add_flag("--full-scale", vo.full_scale, "sharpness: boxes R^-t instead of R^-t/2");
  verify->add_flag("--refine", vo.refine, "second pass on a finer grid; flags moves above 1%");
  verify->add_option("--json", json_path, "write the JSON summary here instead of stdout");
  common(verify);

  auto* classify = app.add_subcommand("classify", "canonical class of a d=n=2 tuple");
  classify->add_option("spec", spec_path, "surface spec file")->required();
  common(classify);

  auto* plot = app.add_subcommand("plot", "SVG from a verify CSV (scaling) or from a spec/analysis report (region)");
  plot->add_option("input", spec_path, "CSV file, spec file or analysis JSON")->required();
  plot->add_option("--kind", kind, "scaling or region")->check(CLI::IsMember({"scaling", "region"}));
  auto* pred = plot->add_option("--predicted-slope", predicted, "reference slope drawn dashed");
  common(plot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return error_exit("input", e.what(), kInput);
  }

  try {
    if (threads == 0) threads = default_threads();
    if (*analyze) {
      report::AnalyzeOptions ao;
      ao.seed = seed;
      emit(report::dump(report::analyze(report::load_spec(spec_path), ao)), out_path);
      return kOk;
    }
    if (*classify) {
      emit(report::dump(report::classify(report::load_spec(spec_path))), out_path);
      return kOk;
    }
    if (*plot) {
      if (pred->count()) predicted_slope = predicted;
      std::string text = read_file(spec_path);
      std::string svg;
      if (kind == "scaling") {
        svg = report::scaling_svg(csv_read(text), predicted_slope);
      } else {
        Json j = Json::parse(text, nullptr, false);
        if (!j.is_discarded() && j.is_object()) {
          svg = report::region_svg(report::region_from_report(j));
        } else {
          svg = report::region_svg(report::region_from_report(report::analyze(parse_surface(text))));
        }
      }
      emit(svg, out_path);
      return kOk;
    }
    // verify
    vo.R = numbers(R_raw, "--R");
    vo.p = numbers(p_raw, "--p");
    vo.q = numbers(q_raw, "--q");
    vo.t = numbers(t_raw, "--t");
    vo.mu = numbers(mu_raw, "--mu");
    if (!sep_axes.empty()) vo.sep_axes = sep_axes;
    if (smax->count()) vo.slope_max = slope_max;
    vo.seed = seed;
    vo.threads = threads;
    auto res = report::verify(report::load_spec(spec_path), vo);
    std::string csv = csv_write(res.rows, res.mu_columns);
    if (!out_path.empty()) {
      emit(csv, out_path);
      res.summary["csv_file"] = out_path;
    } else {
      res.summary["csv"] = csv;
    }
    emit(report::dump(res.summary), json_path);
    return res.failed && !no_fail_exit ? kVerify : kOk;
  } catch (const InputError& e) {
    return error_exit("input", e.what(), kInput);
  } catch (const BudgetError& e) {
    return error_exit("budget", e.what(), kBudget);
  } catch (const VerificationError& e) {
    error_exit("verification", e.what(), kVerify);
    return no_fail_exit ? kOk : kVerify;
  } catch (const nlohmann::json::exception& e) {
    return error_exit("input", e.what(), kInput);
  } catch (const std::exception& e) {
    return error_exit("internal", e.what(), 1);
  }
}
