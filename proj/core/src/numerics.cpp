#include "qrestrict/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "box_engine.hpp"
#include "special.hpp"

namespace qr {

namespace {

constexpr double kTwoPi = 6.283185307179586;

cplx expi2pi(double phase) {
  phase -= std::round(phase);
  return std::polar(1.0, kTwoPi * phase);
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double unit_from(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix(splitmix(splitmix(a) ^ b) ^ c);
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

// runs body(i) for i in [0, count) on `threads` workers; each index is processed exactly once
template <class Body>
void parallel_for(long count, int threads, Body body) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<long>(1, count))));
  if (threads == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      try {
        for (long i = next++; i < count; i = next++) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        next = count;
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::vector<std::vector<double>> float_forms(const QuadTuple& q) {
  std::vector<std::vector<double>> out;
  for (const auto& f : q.forms) {
    std::vector<double> a(q.d * q.d);
    for (int t = 0; t < q.d * q.d; ++t) a[t] = f.e[t].get_d();
    out.push_back(a);
  }
  return out;
}

double form_value(const std::vector<double>& a, const std::vector<double>& xi) {
  const int d = static_cast<int>(xi.size());
  double v = 0;
  for (int r = 0; r < d; ++r) {
    double s = 0;
    for (int c = 0; c < d; ++c) s += a[r * d + c] * xi[c];
    v += xi[r] * s;
  }
  return v;
}

long product(const std::vector<int>& v) {
  long p = 1;
  for (int x : v) p *= x;
  return p;
}

}  // namespace

// ---------------------------------------------------------------- grid functions

GridFunction GridFunction::zero(int d, const std::vector<int>& resolution) {
  if (d < 1 || static_cast<int>(resolution.size()) != d) throw InputError("grid function: resolution must have d entries");
  for (int r : resolution)
    if (r < 1) throw InputError("grid function: resolution entries must be positive");
  GridFunction g;
  g.d = d;
  g.resolution = resolution;
  g.samples.assign(product(resolution), cplx(0));
  return g;
}

GridFunction GridFunction::box(const Box& b, const std::vector<int>& resolution) {
  const int d = static_cast<int>(b.corner.size());
  GridFunction g = zero(d, resolution);
  g.box_meta = b;
  std::vector<int> idx(d, 0);
  for (size_t flat = 0; flat < g.samples.size(); ++flat) {
    size_t rem = flat;
    bool inside = true;
    for (int k = d - 1; k >= 0; --k) {
      int i = static_cast<int>(rem % resolution[k]);
      rem /= resolution[k];
      double c = (i + 0.5) / resolution[k];
      if (c < b.corner[k] || c > b.corner[k] + b.side[k]) inside = false;
    }
    g.samples[flat] = inside ? 1.0 : 0.0;
  }
  return g;
}

GridFunction GridFunction::random(int d, const std::vector<int>& resolution, std::uint64_t seed) {
  GridFunction g = zero(d, resolution);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& s : g.samples) s = cplx(u(rng), u(rng));
  return g;
}

double GridFunction::l1_norm() const {
  double vol = 1;
  for (int r : resolution) vol /= r;
  double s = 0;
  for (const auto& v : samples) s += std::abs(v);
  return s * vol;
}

double gradient_bound(const QuadTuple& q) {
  double lam = 0;
  for (const auto& f : q.forms)
    for (int r = 0; r < q.d; ++r) {
      double s = 0;
      for (int c = 0; c < q.d; ++c) s += std::abs(2 * f(r, c).get_d());
      lam = std::max(lam, s);
    }
  return lam;
}

int required_resolution(const QuadTuple& q, double max_abs_x) {
  return static_cast<int>(std::ceil(8 * max_abs_x * (1 + 2 * gradient_bound(q)) - 1e-9));
}

namespace {

void check_band_limit(const QuadTuple& q, const GridFunction& f, double max_abs_x) {
  int need = required_resolution(q, max_abs_x);
  for (int k = 0; k < f.d; ++k)
    if (f.resolution[k] < need)
      throw InputError("resolution " + std::to_string(f.resolution[k]) + " on axis " + std::to_string(k + 1) +
                       " is too coarse for |x| up to " + format_double(max_abs_x) + "; need at least " + std::to_string(need));
}

struct CellTable {
  std::vector<std::vector<double>> centers;  // per axis
  std::vector<std::vector<double>> qvals;    // qvals[j][flat]
  double cell_volume = 1;
};

CellTable cell_table(const QuadTuple& q, const GridFunction& f) {
  CellTable t;
  t.centers.resize(f.d);
  for (int k = 0; k < f.d; ++k) {
    for (int i = 0; i < f.resolution[k]; ++i) t.centers[k].push_back((i + 0.5) / f.resolution[k]);
    t.cell_volume /= f.resolution[k];
  }
  auto forms = float_forms(q);
  t.qvals.assign(q.n, std::vector<double>(f.size()));
  std::vector<double> xi(f.d);
  for (size_t flat = 0; flat < f.size(); ++flat) {
    size_t rem = flat;
    for (int k = f.d - 1; k >= 0; --k) {
      xi[k] = t.centers[k][rem % f.resolution[k]];
      rem /= f.resolution[k];
    }
    for (int j = 0; j < q.n; ++j) t.qvals[j][flat] = form_value(forms[j], xi);
  }
  return t;
}

}  // namespace

std::vector<cplx> extension_eval_oracle(const QuadTuple& q, const GridFunction& f, const std::vector<std::vector<double>>& xs) {
  if (f.d != q.d) throw InputError("grid function dimension differs from d");
  double max_abs = 0;
  for (const auto& x : xs) {
    if (static_cast<int>(x.size()) != q.d + q.n) throw InputError("points must have d+n coordinates");
    double s = 0;
    for (double v : x) s += v * v;
    max_abs = std::max(max_abs, std::sqrt(s));
  }
  check_band_limit(q, f, max_abs);
  CellTable t = cell_table(q, f);
  std::vector<cplx> out;
  out.reserve(xs.size());
  std::vector<double> xi(f.d);
  for (const auto& x : xs) {
    cplx s = 0;
    for (size_t flat = 0; flat < f.size(); ++flat) {
      if (f.samples[flat] == cplx(0)) continue;
      size_t rem = flat;
      double ph = 0;
      for (int k = f.d - 1; k >= 0; --k) {
        ph += x[k] * t.centers[k][rem % f.resolution[k]];
        rem /= f.resolution[k];
      }
      for (int j = 0; j < q.n; ++j) ph += x[q.d + j] * t.qvals[j][flat];
      s += f.samples[flat] * expi2pi(ph);
    }
    out.push_back(s * t.cell_volume);
  }
  return out;
}

size_t TensorGrid::size() const {
  size_t s = 1;
  for (const auto& a : axes) s *= a.size();
  return s;
}

std::vector<double> TensorGrid::point(size_t flat) const {
  std::vector<double> p(axes.size());
  for (int k = static_cast<int>(axes.size()) - 1; k >= 0; --k) {
    p[k] = axes[k][flat % axes[k].size()];
    flat /= axes[k].size();
  }
  return p;
}

std::vector<cplx> extension_eval_fast(const QuadTuple& q, const GridFunction& f, const TensorGrid& xs, int threads) {
  const int d = q.d, n = q.n;
  if (f.d != d) throw InputError("grid function dimension differs from d");
  if (static_cast<int>(xs.axes.size()) != d + n) throw InputError("tensor grid must have d+n axes");
  double max_abs = 0;
  for (const auto& a : xs.axes) {
    if (a.empty()) throw InputError("tensor grid axis is empty");
    double m = 0;
    for (double v : a) m = std::max(m, std::abs(v));
    max_abs += m * m;
  }
  check_band_limit(q, f, std::sqrt(max_abs));
  CellTable t = cell_table(q, f);
  // per-axis phase matrices E_k[x][xi]
  std::vector<detail::CMat> phase(d);
  for (int k = 0; k < d; ++k) {
    phase[k].resize(static_cast<long>(xs.axes[k].size()), f.resolution[k]);
    for (size_t a = 0; a < xs.axes[k].size(); ++a)
      for (int i = 0; i < f.resolution[k]; ++i) phase[k](static_cast<long>(a), i) = expi2pi(xs.axes[k][a] * t.centers[k][i]);
  }
  long ny = 1;
  for (int j = 0; j < n; ++j) ny *= static_cast<long>(xs.axes[d + j].size());
  long nx = 1;
  for (int k = 0; k < d; ++k) nx *= static_cast<long>(xs.axes[k].size());
  std::vector<cplx> out(static_cast<size_t>(nx * ny));
  parallel_for(ny, threads, [&](long yflat) {
    std::vector<double> y(n);
    long rem = yflat;
    for (int j = n - 1; j >= 0; --j) {
      y[j] = xs.axes[d + j][rem % static_cast<long>(xs.axes[d + j].size())];
      rem /= static_cast<long>(xs.axes[d + j].size());
    }
    // g = f * exp(2 pi i y.Q) * cell volume, then contract axes from the last to the first
    std::vector<cplx> cur(f.size());
    for (size_t c = 0; c < f.size(); ++c) {
      if (f.samples[c] == cplx(0)) { cur[c] = 0; continue; }
      double ph = 0;
      for (int j = 0; j < n; ++j) ph += y[j] * t.qvals[j][c];
      cur[c] = f.samples[c] * expi2pi(ph) * t.cell_volume;
    }
    // shape bookkeeping: dims[k] is N_k for axes not yet contracted, X_k otherwise
    std::vector<long> dims(d);
    for (int k = 0; k < d; ++k) dims[k] = f.resolution[k];
    for (int k = d - 1; k >= 0; --k) {
      long lead = 1, trail = 1;
      for (int a = 0; a < k; ++a) lead *= dims[a];
      for (int a = k + 1; a < d; ++a) trail *= dims[a];
      const long nin = dims[k], nout = static_cast<long>(xs.axes[k].size());
      std::vector<cplx> next(static_cast<size_t>(lead * nout * trail));
      for (long l = 0; l < lead; ++l) {
        Eigen::Map<const detail::CMat> src(cur.data() + l * nin * trail, nin, trail);
        Eigen::Map<detail::CMat> dst(next.data() + l * nout * trail, nout, trail);
        dst.noalias() = phase[k] * src;
      }
      cur.swap(next);
      dims[k] = nout;
    }
    for (long xflat = 0; xflat < nx; ++xflat) out[static_cast<size_t>(xflat * ny + yflat)] = cur[static_cast<size_t>(xflat)];
  });
  return out;
}

double fast_vs_oracle_check(const QuadTuple& q, const GridFunction& f, const TensorGrid& xs, const std::vector<cplx>& fast,
                            int spot_checks, std::uint64_t seed, double rel_tol) {
  std::mt19937_64 rng(seed);
  std::vector<size_t> picks;
  for (int i = 0; i < spot_checks; ++i) picks.push_back(static_cast<size_t>(rng() % xs.size()));
  std::vector<std::vector<double>> pts;
  for (size_t p : picks) pts.push_back(xs.point(p));
  auto truth = extension_eval_oracle(q, f, pts);
  const double floor = 1e-12 * std::max(f.l1_norm(), 1e-300);
  double worst = 0;
  for (size_t i = 0; i < picks.size(); ++i) {
    double dev = std::abs(fast[picks[i]] - truth[i]) / std::max(std::abs(truth[i]), floor);
    worst = std::max(worst, dev);
  }
  if (worst > rel_tol)
    throw VerificationError("fast evaluator deviates from the oracle by " + format_double(worst) + " (relative), above " +
                            format_double(rel_tol));
  return worst;
}

// ---------------------------------------------------------------- norms and sampling

NormEstimate lq_norm_ball(const std::vector<double>& abs_values, const std::vector<double>& weights, double q) {
  if (abs_values.empty()) throw InputError("lq_norm_ball: empty sampling");
  if (!(q >= 1)) throw InputError("lq_norm_ball: q must be >= 1");
  NormEstimate e;
  e.q = q;
  e.points = static_cast<long>(abs_values.size());
  if (std::isinf(q)) {
    e.value = *std::max_element(abs_values.begin(), abs_values.end());
    return e;
  }
  double s = 0;
  for (size_t i = 0; i < abs_values.size(); ++i) s += weights[i] * std::pow(abs_values[i], q);
  e.value = std::pow(s, 1.0 / q);
  return e;
}

NormEstimate lq_norm_ball(const std::vector<cplx>& values, const BallSampling& s, double q) {
  if (values.size() != s.points.size()) throw InputError("lq_norm_ball: values and sampling differ in size");
  std::vector<double> a(values.size());
  for (size_t i = 0; i < values.size(); ++i) a[i] = std::abs(values[i]);
  return lq_norm_ball(a, s.weights, q);
}

AxisNodes graded_axis(double R, double bandwidth, const SamplingOptions& opt, std::uint64_t axis_seed) {
  if (!(R > 0)) throw InputError("ball radius must be positive");
  double w = std::max(bandwidth, 1.0 / R);
  double h0 = 1.0 / (opt.fine_per_width * w);
  double core = opt.core_widths / w;
  std::vector<double> edges{0.0};
  double pos = 0, h = h0;
  while (pos < R - 1e-12) {
    double step = (pos < core) ? h0 : (h *= opt.growth);
    if (pos + step > R || R - (pos + step) < 0.25 * step) step = R - pos;
    pos += step;
    edges.push_back(pos);
  }
  AxisNodes ax;
  const int cells = static_cast<int>(edges.size()) - 1;
  for (int side = -1; side <= 1; side += 2)
    for (int c = 0; c < cells; ++c) {
      double lo = edges[c], width = edges[c + 1] - edges[c];
      double u = unit_from(opt.seed, axis_seed, static_cast<std::uint64_t>(2 * c + (side > 0)));
      ax.nodes.push_back(side * (lo + u * width));
      ax.widths.push_back(width);
    }
  // ascending order
  std::vector<size_t> order(ax.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return ax.nodes[a] < ax.nodes[b]; });
  AxisNodes sorted;
  for (size_t i : order) {
    sorted.nodes.push_back(ax.nodes[i]);
    sorted.widths.push_back(ax.widths[i]);
  }
  return sorted;
}

std::vector<double> spectral_widths(const QuadTuple& q, const std::vector<Box>& boxes) {
  const int d = q.d;
  std::vector<double> w(d + q.n, 0.0);
  auto forms = float_forms(q);
  const int per = d <= 3 ? 9 : (d <= 5 ? 5 : 3);
  for (const auto& b : boxes) {
    for (int k = 0; k < d; ++k) w[k] = std::max(w[k], b.side[k]);
    long total = 1;
    for (int k = 0; k < d; ++k) total *= per;
    for (int j = 0; j < q.n; ++j) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      std::vector<double> xi(d);
      for (long c = 0; c < total; ++c) {
        long rem = c;
        for (int k = d - 1; k >= 0; --k) {
          xi[k] = b.corner[k] + b.side[k] * static_cast<double>(rem % per) / (per - 1);
          rem /= per;
        }
        double v = form_value(forms[j], xi);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      w[d + j] = std::max(w[d + j], hi - lo);
    }
  }
  return w;
}

namespace {

std::vector<AxisNodes> make_axes(const QuadTuple& q, const std::vector<Box>& boxes, double R, const SamplingOptions& opt) {
  auto w = spectral_widths(q, boxes);
  std::vector<AxisNodes> axes;
  for (size_t k = 0; k < w.size(); ++k) axes.push_back(graded_axis(R, w[k], opt, 1000 + k));
  return axes;
}

}  // namespace

BallSampling ball_sampling(const QuadTuple& q, const std::vector<Box>& boxes, double R, const SamplingOptions& opt) {
  auto axes = make_axes(q, boxes, R, opt);
  BallSampling s;
  s.R = R;
  const int dim = static_cast<int>(axes.size());
  long total = 1;
  for (const auto& a : axes) total *= static_cast<long>(a.nodes.size());
  if (total > (1L << 26)) throw BudgetError("explicit ball sampling above 2^26 grid points; use the factorized estimators");
  std::vector<double> p(dim);
  for (long c = 0; c < total; ++c) {
    long rem = c;
    double r2 = 0, w = 1;
    for (int k = dim - 1; k >= 0; --k) {
      size_t i = static_cast<size_t>(rem % static_cast<long>(axes[k].nodes.size()));
      rem /= static_cast<long>(axes[k].nodes.size());
      p[k] = axes[k].nodes[i];
      w *= axes[k].widths[i];
      r2 += p[k] * p[k];
    }
    if (r2 > R * R) continue;
    s.points.push_back(p);
    s.weights.push_back(w);
  }
  return s;
}

// ---------------------------------------------------------------- factorized ball integrals

namespace {

enum class Mode { Single, Bilinear, SquareSum };

struct BallResult {
  std::vector<double> integrals;
  long points = 0;
};

// integrand: Single |E_0|^e, Bilinear |E_0 E_1|^{e/2}, SquareSum (sum_b |E_b|^2)^{e/2}
BallResult ball_integrals(const QuadTuple& q, Mode mode, const std::vector<Box>& boxes, double R, const std::vector<double>& exps,
                          const SamplingOptions& opt) {
  const int d = q.d, n = q.n;
  if (d + n > 6) throw BudgetError("full-ball norms are capped at d+n <= 6");
  for (const auto& b : boxes) BoxEvaluator check(q, b);
  auto axes = make_axes(q, boxes, R, opt);
  auto comps = detail::coupling_components(q);
  // radial axis: one uncoupled variable, summed by prefix sums (not for square sums)
  int radial_comp = -1;
  if (mode != Mode::SquareSum)
    for (size_t c = 0; c < comps.size(); ++c)
      if (comps[c].size() == 1 && (radial_comp < 0 || axes[comps[c][0]].nodes.size() > axes[comps[radial_comp][0]].nodes.size()))
        radial_comp = static_cast<int>(c);
  const int radial_var = radial_comp >= 0 ? comps[radial_comp][0] : -1;
  const size_t ne = exps.size();

  long ny = 1;
  for (int j = 0; j < n; ++j) ny *= static_cast<long>(axes[d + j].nodes.size());
  std::vector<std::vector<double>> partial(ny, std::vector<double>(ne, 0.0));
  std::vector<long> counts(ny, 0);

  parallel_for(ny, opt.threads, [&](long yflat) {
    std::vector<double> y(n);
    double wy = 1, ry2 = 0;
    long rem = yflat;
    for (int j = n - 1; j >= 0; --j) {
      const auto& ax = axes[d + j];
      size_t i = static_cast<size_t>(rem % static_cast<long>(ax.nodes.size()));
      rem /= static_cast<long>(ax.nodes.size());
      y[j] = ax.nodes[i];
      wy *= ax.widths[i];
      ry2 += y[j] * y[j];
    }
    if (ry2 > R * R) return;
    const double rest2 = R * R - ry2;
    const double rest = std::sqrt(rest2);
    // node sub-lists inside the slice
    std::vector<std::vector<double>> xn(d), xw(d);
    for (int k = 0; k < d; ++k)
      for (size_t i = 0; i < axes[k].nodes.size(); ++i)
        if (std::abs(axes[k].nodes[i]) <= rest) {
          xn[k].push_back(axes[k].nodes[i]);
          xw[k].push_back(axes[k].widths[i]);
        }
    for (int k = 0; k < d; ++k)
      if (xn[k].empty()) return;
    // component grids per box: |G| values
    std::vector<std::vector<std::vector<double>>> g(boxes.size(), std::vector<std::vector<double>>(comps.size()));
    for (size_t b = 0; b < boxes.size(); ++b) {
      detail::BoxEngine eng(q, boxes[b]);
      eng.set_y(y);
      for (size_t c = 0; c < comps.size(); ++c) {
        std::vector<std::vector<double>> cx;
        for (int v : comps[c]) cx.push_back(xn[v]);
        auto vals = eng.component_grid(static_cast<int>(c), cx);
        g[b][c].resize(vals.size());
        for (size_t i = 0; i < vals.size(); ++i) g[b][c][i] = std::abs(vals[i]);
      }
    }
    // radial prefix sums over the uncoupled variable
    std::vector<double> rad_abs;
    std::vector<std::vector<double>> rad_prefix;  // [e][i], cumulative over ascending |x|
    if (radial_comp >= 0) {
      const auto& nodes = xn[radial_var];
      std::vector<size_t> order(nodes.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return std::abs(nodes[a]) < std::abs(nodes[b]) || (std::abs(nodes[a]) == std::abs(nodes[b]) && a < b);
      });
      rad_prefix.assign(ne, std::vector<double>(order.size() + 1, 0.0));
      for (size_t r = 0; r < order.size(); ++r) {
        size_t i = order[r];
        rad_abs.push_back(std::abs(nodes[i]));
        double base = (mode == Mode::Single) ? g[0][radial_comp][i] : std::sqrt(g[0][radial_comp][i] * g[1][radial_comp][i]);
        for (size_t e = 0; e < ne; ++e) rad_prefix[e][r + 1] = rad_prefix[e][r] + xw[radial_var][i] * std::pow(base, exps[e]);
      }
    }
    // iterate the remaining x variables
    std::vector<int> others;
    for (int k = 0; k < d; ++k)
      if (k != radial_var) others.push_back(k);
    long total = 1;
    for (int k : others) total *= static_cast<long>(xn[k].size());
    // strides inside each component grid
    std::vector<std::vector<long>> cstride(comps.size());
    for (size_t c = 0; c < comps.size(); ++c) {
      const auto& comp = comps[c];
      cstride[c].assign(comp.size(), 1);
      for (int i = static_cast<int>(comp.size()) - 2; i >= 0; --i)
        cstride[c][i] = cstride[c][i + 1] * static_cast<long>(xn[comp[i + 1]].size());
    }
    std::vector<size_t> idx(d, 0);
    std::vector<double> acc(ne, 0.0);
    long cnt = 0;
    for (long t = 0; t < total; ++t) {
      long r = t;
      double r2 = ry2, w = wy;
      for (int a = static_cast<int>(others.size()) - 1; a >= 0; --a) {
        int k = others[a];
        idx[k] = static_cast<size_t>(r % static_cast<long>(xn[k].size()));
        r /= static_cast<long>(xn[k].size());
        double x = xn[k][idx[k]];
        r2 += x * x;
        w *= xw[k][idx[k]];
      }
      if (r2 > R * R) continue;
      auto comp_val = [&](size_t b, size_t c) {
        long off = 0;
        for (size_t i = 0; i < comps[c].size(); ++i) off += static_cast<long>(idx[comps[c][i]]) * cstride[c][i];
        return g[b][c][off];
      };
      if (mode == Mode::SquareSum) {
        double s = 0;
        for (size_t b = 0; b < boxes.size(); ++b) {
          double prod = 1;
          for (size_t c = 0; c < comps.size(); ++c) prod *= comp_val(b, c);
          s += prod * prod;
        }
        for (size_t e = 0; e < ne; ++e) acc[e] += w * std::pow(s, exps[e] / 2);
        ++cnt;
        continue;
      }
      double base = 1;
      for (size_t c = 0; c < comps.size(); ++c) {
        if (static_cast<int>(c) == radial_comp) continue;
        base *= (mode == Mode::Single) ? comp_val(0, c) : std::sqrt(comp_val(0, c) * comp_val(1, c));
      }
      if (radial_comp >= 0) {
        double lim = std::sqrt(std::max(0.0, R * R - r2));
        size_t m = static_cast<size_t>(std::upper_bound(rad_abs.begin(), rad_abs.end(), lim) - rad_abs.begin());
        if (m == 0) continue;
        for (size_t e = 0; e < ne; ++e) acc[e] += w * std::pow(base, exps[e]) * rad_prefix[e][m];
        cnt += static_cast<long>(m);
      } else {
        for (size_t e = 0; e < ne; ++e) acc[e] += w * std::pow(base, exps[e]);
        ++cnt;
      }
    }
    partial[yflat] = acc;
    counts[yflat] = cnt;
  });
  BallResult res;
  res.integrals.assign(ne, 0.0);
  for (long i = 0; i < ny; ++i) {
    for (size_t e = 0; e < ne; ++e) res.integrals[e] += partial[i][e];
    res.points += counts[i];
  }
  return res;
}

SamplingOptions refined(const SamplingOptions& o) {
  SamplingOptions r = o;
  r.fine_per_width *= 1.5;
  r.growth = 1 + (o.growth - 1) * 0.6;
  r.seed = splitmix(o.seed ^ 0xA5A5A5A5ULL);
  r.refinement_check = false;
  return r;
}

NormEstimate finish(double integral, double refined_integral, bool ran_refine, double q, double norm_scale, long points) {
  NormEstimate e;
  e.q = q;
  e.points = points;
  e.value = std::pow(integral, 1.0 / q) / norm_scale;
  if (ran_refine) {
    e.refined_value = std::pow(refined_integral, 1.0 / q) / norm_scale;
    e.quadrature_error_flag = std::abs(e.refined_value - e.value) > 0.01 * std::abs(e.value);
  }
  return e;
}

}  // namespace

NormEstimate dp_ratio(const QuadTuple& q, const Box& box, double R, double p, const SamplingOptions& opt) {
  if (!(p >= 1) || std::isinf(p)) throw InputError("dp_ratio: p must be finite and >= 1");
  auto r = ball_integrals(q, Mode::Single, {box}, R, {p}, opt);
  double refined_integral = 0;
  if (opt.refinement_check) refined_integral = ball_integrals(q, Mode::Single, {box}, R, {p}, refined(opt)).integrals[0];
  return finish(r.integrals[0], refined_integral, opt.refinement_check, p, std::pow(box.volume(), 1.0 / p), r.points);
}

void check_separation(const Box& b1, const Box& b2, double sep) {
  if (b1.corner.size() != b2.corner.size()) throw InputError("boxes differ in dimension");
  bool any = false;
  for (size_t j = 0; j < b1.corner.size(); ++j) {
    double mu = 1 / b1.side[j];
    if (std::abs(b1.side[j] - b2.side[j]) > 1e-12) throw InputError("bilinear boxes must share the side lengths mu^-1");
    if (mu > 1 + 1e-12) {
      if (std::abs(b1.corner[j] - b2.corner[j]) < sep / mu - 1e-12)
        throw InputError("separation violated on axis " + std::to_string(j + 1) + ": |a-b| = " +
                         format_double(std::abs(b1.corner[j] - b2.corner[j])) + " < c/mu = " + format_double(sep / mu));
      any = true;
    }
  }
  if (!any && b1.corner == b2.corner) throw InputError("identical boxes: zero separation");
}

NormEstimate bd_ratio(const QuadTuple& q, const Box& b1, const Box& b2, double R, double p, const SamplingOptions& opt) {
  if (!(p >= 1) || std::isinf(p)) throw InputError("bd_ratio: p must be finite and >= 1");
  if (b1.corner == b2.corner && b1.side == b2.side) throw InputError("identical boxes: zero separation");
  auto r = ball_integrals(q, Mode::Bilinear, {b1, b2}, R, {p}, opt);
  double refined_integral = 0;
  if (opt.refinement_check) refined_integral = ball_integrals(q, Mode::Bilinear, {b1, b2}, R, {p}, refined(opt)).integrals[0];
  double scale = std::sqrt(std::pow(b1.volume(), 1.0 / p) * std::pow(b2.volume(), 1.0 / p));
  return finish(r.integrals[0], refined_integral, opt.refinement_check, p, scale, r.points);
}

double dp_integral_bruteforce(const QuadTuple& q, const Box& box, const BallSampling& s, double p) {
  BoxEvaluator ev(q, box);
  double acc = 0;
  for (size_t i = 0; i < s.points.size(); ++i) acc += s.weights[i] * std::pow(std::abs(ev.eval(s.points[i])), p);
  return acc;
}

double bd_integral_bruteforce(const QuadTuple& q, const Box& b1, const Box& b2, const BallSampling& s, double p) {
  BoxEvaluator e1(q, b1), e2(q, b2);
  double acc = 0;
  for (size_t i = 0; i < s.points.size(); ++i)
    acc += s.weights[i] * std::pow(std::abs(e1.eval(s.points[i]) * e2.eval(s.points[i])), p / 2);
  return acc;
}

// ---------------------------------------------------------------- fits

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& series) {
  auto s = series;
  std::sort(s.begin(), s.end());
  for (size_t i = 1; i < s.size(); ++i)
    if (s[i].first == s[i - 1].first) throw InputError("scaling_fit: repeated R value");
  if (s.size() < 4) throw InputError("scaling_fit: need at least 4 distinct R values");
  for (const auto& [r, v] : s) {
    if (!(r > 0)) throw InputError("scaling_fit: R must be positive");
    if (!(v > 0)) throw InputError("scaling_fit: nonpositive value " + format_double(v) + " at R=" + format_double(r));
  }
  double ratio = s[1].first / s[0].first;
  for (size_t i = 2; i < s.size(); ++i)
    if (std::abs(s[i].first / s[i - 1].first - ratio) > 1e-9 * ratio) throw InputError("scaling_fit: R values must be geometric");
  const double m = static_cast<double>(s.size());
  double sx = 0, sy = 0;
  for (const auto& [r, v] : s) {
    sx += std::log(r);
    sy += std::log(v);
  }
  double mx = sx / m, my = sy / m, sxx = 0, sxy = 0;
  for (const auto& [r, v] : s) {
    sxx += (std::log(r) - mx) * (std::log(r) - mx);
    sxy += (std::log(r) - mx) * (std::log(v) - my);
  }
  ScalingFit f;
  f.series = s;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (const auto& [r, v] : s) {
    double e = std::log(v) - (f.intercept + f.slope * std::log(r));
    sse += e * e;
  }
  f.stderr_ = std::sqrt(sse / (m - 2) / sxx);
  return f;
}

// ---------------------------------------------------------------- square function

std::vector<Box> partition_boxes(const std::vector<double>& t, double R, long cap) {
  const int d = static_cast<int>(t.size());
  std::vector<long> m(d);
  long total = 1;
  for (int k = 0; k < d; ++k) {
    if (t[k] < 0 || t[k] > 1) throw InputError("t entries must lie in [0,1]");
    m[k] = std::max(1L, std::lround(std::pow(R, t[k])));
    total *= m[k];
    if (total > cap) throw BudgetError("partition has more than " + std::to_string(cap) + " boxes");
  }
  std::vector<Box> out;
  for (long c = 0; c < total; ++c) {
    Box b;
    b.corner.resize(d);
    b.side.resize(d);
    long rem = c;
    for (int k = d - 1; k >= 0; --k) {
      long i = rem % m[k];
      rem /= m[k];
      b.side[k] = 1.0 / static_cast<double>(m[k]);
      b.corner[k] = static_cast<double>(i) / static_cast<double>(m[k]);
    }
    out.push_back(b);
  }
  return out;
}

std::vector<NormEstimate> square_function_integrals(const QuadTuple& q, const std::vector<Box>& boxes, double R,
                                                    const std::vector<double>& qexps, const SamplingOptions& opt) {
  for (double e : qexps)
    if (!(e >= 1)) throw InputError("square function exponent must be >= 1");
  auto r = ball_integrals(q, Mode::SquareSum, boxes, R, qexps, opt);
  std::vector<double> ref;
  if (opt.refinement_check) ref = ball_integrals(q, Mode::SquareSum, boxes, R, qexps, refined(opt)).integrals;
  std::vector<NormEstimate> out;
  for (size_t e = 0; e < qexps.size(); ++e) {
    NormEstimate n;
    n.q = qexps[e];
    n.value = r.integrals[e];
    n.points = r.points;
    if (opt.refinement_check) {
      n.refined_value = ref[e];
      n.quadrature_error_flag = std::abs(ref[e] - n.value) > 0.01 * std::abs(n.value);
    }
    out.push_back(n);
  }
  return out;
}

NormEstimate square_function_sharpness(const QuadTuple& q, const std::vector<double>& t, double R, double qexp,
                                       const SamplingOptions& opt) {
  if (static_cast<int>(t.size()) != q.d) throw InputError("t must have d entries");
  if (R < 4) throw InputError("square_function_sharpness needs R >= 4");
  return square_function_integrals(q, partition_boxes(t, R), R, {qexp}, opt)[0];
}

// ---------------------------------------------------------------- tube check

TubeCheck tube_locally_constant_check(const QuadTuple& q, const std::vector<double>& t, double R, int samples,
                                      std::uint64_t seed) {
  const int d = q.d;
  if (static_cast<int>(t.size()) != d) throw InputError("t must have d entries");
  // each form a single monomial x_a x_b
  std::vector<std::pair<int, int>> mono;
  for (int j = 0; j < q.n; ++j) {
    std::vector<std::pair<int, int>> terms;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b)
        if (q.forms[j](a, b) != 0) terms.push_back({a, b});
    if (terms.size() != 1) throw InputError("tube check needs monomial forms; Q" + std::to_string(j + 1) + " is not a single monomial");
    mono.push_back(terms[0]);
  }
  Box box;
  double scale = 1;
  for (int k = 0; k < d; ++k) {
    box.corner.push_back(0);
    box.side.push_back(std::pow(R, -t[k]));
    scale *= box.side.back();
  }
  std::vector<double> half(d + q.n);
  for (int k = 0; k < d; ++k) half[k] = std::pow(R, t[k]) / 100;
  for (int j = 0; j < q.n; ++j) {
    double c = q.forms[j](mono[j].first, mono[j].second).get_d() * (mono[j].first == mono[j].second ? 1 : 2);
    half[d + j] = std::pow(R, t[mono[j].first] + t[mono[j].second]) / 100 / std::max(1.0, std::abs(c));
  }
  BoxEvaluator ev(q, box);
  TubeCheck out;
  out.ratio_at_zero = std::abs(ev.eval(std::vector<double>(d + q.n, 0.0))) / scale;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = 0;
  for (int s = 0; s < samples; ++s) {
    std::vector<double> x(d + q.n);
    for (size_t k = 0; k < x.size(); ++k) x[k] = half[k] * u(rng);
    double r = std::abs(ev.eval(x)) / scale;
    out.min_ratio = std::min(out.min_ratio, r);
    out.max_ratio = std::max(out.max_ratio, r);
  }
  out.samples = samples;
  return out;
}

// ---------------------------------------------------------------- significant set

SignificantSet significant_set(const QuadTuple& q, const std::vector<Box>& caps, const GridFunction& f, const std::vector<double>& x) {
  if (caps.empty()) throw InputError("significant_set: no caps");
  SignificantSet out;
  out.total = std::abs(extension_eval_oracle(q, f, {x})[0]);
  std::vector<bool> covered(f.size(), false);
  for (const auto& cap : caps) {
    GridFunction part = f;
    part.box_meta.reset();
    for (size_t flat = 0; flat < f.size(); ++flat) {
      size_t rem = flat;
      bool inside = true;
      for (int k = f.d - 1; k >= 0; --k) {
        int i = static_cast<int>(rem % f.resolution[k]);
        rem /= f.resolution[k];
        double c = (i + 0.5) / f.resolution[k];
        if (c < cap.corner[k] || c >= cap.corner[k] + cap.side[k]) inside = false;
      }
      if (!inside || covered[flat]) part.samples[flat] = 0;
      else covered[flat] = true;
    }
    out.cap_values.push_back(std::abs(extension_eval_oracle(q, part, {x})[0]));
  }
  const double thresh = out.total / (100.0 * static_cast<double>(caps.size()));
  for (size_t i = 0; i < caps.size(); ++i)
    if (out.cap_values[i] >= thresh && out.cap_values[i] > 0) out.members.push_back(static_cast<int>(i));
  return out;
}

// ---------------------------------------------------------------- CSV and cache

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_write(const std::vector<CsvRow>& rows, int mu_columns) {
  std::ostringstream os;
  os << "R,p_or_q";
  for (int i = 0; i < mu_columns; ++i) os << ",mu" << (i + 1);
  os << ",value,slope_running,flag\n";
  for (const auto& r : rows) {
    if (static_cast<int>(r.mu.size()) != mu_columns) throw InputError("csv row has the wrong number of mu columns");
    os << format_double(r.R) << "," << format_double(r.p_or_q);
    for (double m : r.mu) os << "," << format_double(m);
    os << "," << format_double(r.value) << "," << (r.slope_running ? format_double(*r.slope_running) : "") << "," << r.flag << "\n";
  }
  return os.str();
}

std::vector<CsvRow> csv_read(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') { out.push_back(cur); cur.clear(); }
      else if (c != '\r') cur += c;
    }
    out.push_back(cur);
    return out;
  };
  auto head = split(line);
  if (head.size() < 5 || head[0] != "R" || head[1] != "p_or_q" || head[head.size() - 3] != "value" ||
      head[head.size() - 2] != "slope_running" || head.back() != "flag")
    throw InputError("CSV header must be R,p_or_q,mu...,value,slope_running,flag");
  const size_t mu = head.size() - 5;
  std::vector<CsvRow> rows;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != head.size()) throw InputError("CSV line " + std::to_string(ln) + " has " + std::to_string(f.size()) + " fields");
    try {
      CsvRow r;
      r.R = std::stod(f[0]);
      r.p_or_q = std::stod(f[1]);
      for (size_t i = 0; i < mu; ++i) r.mu.push_back(std::stod(f[2 + i]));
      r.value = std::stod(f[2 + mu]);
      if (!f[3 + mu].empty()) r.slope_running = std::stod(f[3 + mu]);
      r.flag = f[4 + mu];
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw InputError("CSV line " + std::to_string(ln) + " has a malformed number");
    }
  }
  if (rows.empty()) throw InputError("CSV has no data rows");
  return rows;
}

std::uint64_t surface_hash(const QuadTuple& q) {
  std::string s = std::to_string(q.d) + "," + std::to_string(q.n);
  for (const auto& f : q.forms)
    for (const auto& e : f.e) s += "," + e.get_str();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {
void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b += static_cast<char>((v >> (8 * i)) & 0xFF);
}
void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b += static_cast<char>((v >> (8 * i)) & 0xFF);
}
void put_f32(std::string& b, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(b, v);
}
std::uint64_t get_le(const std::string& b, size_t& pos, int bytes) {
  if (pos + bytes > b.size()) throw InputError("cache file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[pos + i])) << (8 * i);
  pos += bytes;
  return v;
}
}  // namespace

void cache_write(const std::string& path, std::uint64_t hash, const std::vector<std::uint32_t>& dims, const std::vector<cplx>& samples) {
  size_t total = 1;
  for (auto v : dims) total *= v;
  if (total != samples.size()) throw InputError("cache: dims do not match the sample count");
  std::string b = "QRX1";
  put_u32(b, 1);
  put_u64(b, hash);
  put_u32(b, static_cast<std::uint32_t>(dims.size()));
  for (auto v : dims) put_u32(b, v);
  for (const auto& s : samples) {
    put_f32(b, static_cast<float>(s.real()));
    put_f32(b, static_cast<float>(s.imag()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

CacheBlob cache_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::string b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (b.size() < 4 || b.compare(0, 4, "QRX1") != 0) throw InputError("not a QRX1 cache file");
  size_t pos = 4;
  if (get_le(b, pos, 4) != 1) throw InputError("unsupported cache version");
  CacheBlob blob;
  blob.hash = get_le(b, pos, 8);
  auto nd = get_le(b, pos, 4);
  size_t total = 1;
  for (std::uint64_t i = 0; i < nd; ++i) {
    blob.dims.push_back(static_cast<std::uint32_t>(get_le(b, pos, 4)));
    total *= blob.dims.back();
  }
  for (size_t i = 0; i < total; ++i) {
    std::uint32_t re = static_cast<std::uint32_t>(get_le(b, pos, 4)), im = static_cast<std::uint32_t>(get_le(b, pos, 4));
    float fr, fi;
    std::memcpy(&fr, &re, 4);
    std::memcpy(&fi, &im, 4);
    blob.samples.emplace_back(fr, fi);
  }
  if (pos != b.size()) throw InputError("cache file has trailing bytes");
  return blob;
}

int default_threads() {
  const char* env = std::getenv("QRESTRICT_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) throw InputError("QRESTRICT_THREADS must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace qr
