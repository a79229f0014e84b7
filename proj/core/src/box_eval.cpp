#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "box_engine.hpp"
#include "special.hpp"

namespace qr {

namespace detail {

namespace {
constexpr double kTwoPi = 6.283185307179586;
constexpr int kPanelNodes = 16;

std::complex<double> expi2pi(double phase) {
  phase -= std::round(phase);
  return std::polar(1.0, kTwoPi * phase);
}
}  // namespace

std::vector<std::vector<int>> coupling_components(const QuadTuple& q) {
  const int d = q.d;
  std::vector<int> parent(d);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  for (const auto& f : q.forms)
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b)
        if (f(a, b) != 0) parent[find(a)] = find(b);
  std::vector<std::vector<int>> out;
  std::vector<int> slot(d, -1);
  for (int v = 0; v < d; ++v) {
    int r = find(v);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[slot[r]].push_back(v);
  }
  return out;
}

BoxEngine::BoxEngine(const QuadTuple& q, const Box& box) : d_(q.d), n_(q.n), box_(box) {
  for (const auto& f : q.forms) {
    std::vector<double> a(d_ * d_);
    for (int r = 0; r < d_; ++r)
      for (int c = 0; c < d_; ++c) a[r * d_ + c] = f(r, c).get_d();
    forms_.push_back(a);
  }
  comps_ = coupling_components(q);
  // all minimal vertex covers (by inclusion) of each component, local indices
  for (const auto& comp : comps_) {
    const int m = static_cast<int>(comp.size());
    if (m > 16) throw BudgetError("box evaluator: coupled block of " + std::to_string(m) + " variables exceeds 16");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        for (const auto& f : q.forms)
          if (f(comp[i], comp[j]) != 0) {
            edges.push_back({i, j});
            break;
          }
    std::vector<std::vector<int>> covers;
    int best = m + 1;
    for (int mask = 0; mask < (1 << m); ++mask) {
      bool ok = true;
      for (auto [i, j] : edges)
        if (!((mask >> i) & 1) && !((mask >> j) & 1)) { ok = false; break; }
      if (!ok) continue;
      int sz = __builtin_popcount(mask);
      if (sz > best + 1) continue;  // keep near-minimum covers only
      best = std::min(best, sz);
      std::vector<int> s;
      for (int i = 0; i < m; ++i)
        if ((mask >> i) & 1) s.push_back(i);
      covers.push_back(s);
    }
    covers.erase(std::remove_if(covers.begin(), covers.end(), [&](const auto& s) { return static_cast<int>(s.size()) > best + 1; }),
                 covers.end());
    covers_.push_back(covers);
  }
  m_.assign(d_ * d_, 0.0);
  shift_.assign(d_, 0.0);
}

void BoxEngine::set_y(const std::vector<double>& y) {
  std::fill(m_.begin(), m_.end(), 0.0);
  for (int j = 0; j < n_; ++j)
    for (int t = 0; t < d_ * d_; ++t) m_[t] += y[j] * forms_[j][t];
  const_quad_ = 0;
  for (int r = 0; r < d_; ++r) {
    double s = 0;
    for (int c = 0; c < d_; ++c) s += m_[r * d_ + c] * box_.corner[c];
    shift_[r] = 2 * s;
    const_quad_ += box_.corner[r] * s;
  }
}

std::complex<double> BoxEngine::translation_phase(const std::vector<double>& x) const {
  double ph = const_quad_;
  for (int k = 0; k < d_; ++k) ph += x[k] * box_.corner[k];
  return expi2pi(ph);
}

std::vector<std::complex<double>> BoxEngine::component_grid(int c, const std::vector<std::vector<double>>& xs) const {
  const auto& comp = comps_[c];
  const int m = static_cast<int>(comp.size());
  auto M = [&](int i, int j) { return m_[comp[i] * d_ + comp[j]]; };
  auto side = [&](int i) { return box_.side[comp[i]]; };
  // effective linear coefficients after moving the corner to 0
  std::vector<double> xmax(m, 0.0);
  for (int i = 0; i < m; ++i)
    for (double x : xs[i]) xmax[i] = std::max(xmax[i], std::abs(x + shift_[comp[i]]));

  auto nodes_for = [&](int i) {
    double rate = xmax[i];
    for (int j = 0; j < m; ++j) rate += 2 * std::abs(M(i, j)) * side(j);
    double cycles = side(i) * rate;
    return std::max(1, static_cast<int>(std::ceil(cycles / 2))) * kPanelNodes;
  };
  // cheapest cover under the current y
  const std::vector<int>* cover = nullptr;
  double best_cost = 0;
  for (const auto& s : covers_[c]) {
    double cost = 1;
    for (int i : s) cost *= nodes_for(i);
    std::vector<bool> in(m, false);
    for (int i : s) in[i] = true;
    double free_cols = 1, phi_evals = 0;
    for (int i = 0; i < m; ++i)
      if (!in[i]) {
        free_cols *= static_cast<double>(xs[i].size());
        phi_evals += static_cast<double>(xs[i].size());
      }
    double rows = 1;
    for (int i : s) rows *= static_cast<double>(xs[i].size());
    double total = cost * (rows + 8 * phi_evals + rows * free_cols);
    if (!cover || total < best_cost) {
      cover = &s;
      best_cost = total;
    }
  }
  std::vector<int> S = *cover, F;
  {
    std::vector<bool> in(m, false);
    for (int i : S) in[i] = true;
    for (int i = 0; i < m; ++i)
      if (!in[i]) F.push_back(i);
  }
  // tensor Gauss-Legendre nodes over the S variables
  const auto& gl = special::gauss_legendre(kPanelNodes);
  std::vector<std::vector<double>> s_nodes(S.size()), s_w(S.size());
  for (size_t a = 0; a < S.size(); ++a) {
    int i = S[a];
    int panels = nodes_for(i) / kPanelNodes;
    double h = side(i) / panels;
    for (int p = 0; p < panels; ++p)
      for (int g = 0; g < kPanelNodes; ++g) {
        s_nodes[a].push_back(h * (p + 0.5 + 0.5 * gl.nodes[g]));
        s_w[a].push_back(h * 0.5 * gl.weights[g]);
      }
  }
  long q_count = 1;
  for (const auto& v : s_nodes) q_count *= static_cast<long>(v.size());
  if (q_count > (1L << 24)) throw BudgetError("box evaluator: quadrature grid above 2^24 nodes");

  long rows = 1, cols = 1;
  for (int i : S) rows *= static_cast<long>(xs[i].size());
  for (int i : F) cols *= static_cast<long>(xs[i].size());

  CMat es(rows, q_count), v(q_count, cols);
  std::vector<double> u(S.size());
  std::vector<int> qi(S.size(), 0);
  for (long k = 0; k < q_count; ++k) {
    long rem = k;
    for (int a = static_cast<int>(S.size()) - 1; a >= 0; --a) {
      qi[a] = static_cast<int>(rem % static_cast<long>(s_nodes[a].size()));
      rem /= static_cast<long>(s_nodes[a].size());
    }
    double w = 1, quad = 0;
    for (size_t a = 0; a < S.size(); ++a) {
      u[a] = s_nodes[a][qi[a]];
      w *= s_w[a][qi[a]];
    }
    for (size_t a = 0; a < S.size(); ++a)
      for (size_t b = 0; b < S.size(); ++b) quad += M(S[a], S[b]) * u[a] * u[b];
    // rows: S-x multi-index
    std::vector<int> xi(S.size(), 0);
    for (long r = 0; r < rows; ++r) {
      long rr = r;
      for (int a = static_cast<int>(S.size()) - 1; a >= 0; --a) {
        xi[a] = static_cast<int>(rr % static_cast<long>(xs[S[a]].size()));
        rr /= static_cast<long>(xs[S[a]].size());
      }
      double ph = quad;
      for (size_t a = 0; a < S.size(); ++a) ph += (xs[S[a]][xi[a]] + shift_[comp[S[a]]]) * u[a];
      es(r, k) = w * expi2pi(ph);
    }
    // cols: free multi-index; each free variable integrated in closed form
    std::vector<std::vector<std::complex<double>>> phi(F.size());
    for (size_t b = 0; b < F.size(); ++b) {
      int f = F[b];
      double beta0 = 0;
      for (size_t a = 0; a < S.size(); ++a) beta0 += 2 * M(f, S[a]) * u[a];
      for (double x : xs[f])
        phi[b].push_back(special::quad_phase_integral(M(f, f), x + shift_[comp[f]] + beta0, 0.0, side(f)));
    }
    std::vector<int> fi(F.size(), 0);
    for (long col = 0; col < cols; ++col) {
      long rr = col;
      for (int b = static_cast<int>(F.size()) - 1; b >= 0; --b) {
        fi[b] = static_cast<int>(rr % static_cast<long>(xs[F[b]].size()));
        rr /= static_cast<long>(xs[F[b]].size());
      }
      std::complex<double> prod = 1;
      for (size_t b = 0; b < F.size(); ++b) prod *= phi[b][fi[b]];
      v(k, col) = prod;
    }
  }
  CMat g = es * v;  // rows x cols
  // reorder to component variable order
  std::vector<long> stride(m, 1);
  for (int i = m - 2; i >= 0; --i) stride[i] = stride[i + 1] * static_cast<long>(xs[i + 1].size());
  long total = stride[0] * static_cast<long>(xs[0].size());
  std::vector<std::complex<double>> out(total);
  std::vector<int> si(S.size()), fi(F.size());
  for (long r = 0; r < rows; ++r) {
    long rr = r, base = 0;
    for (int a = static_cast<int>(S.size()) - 1; a >= 0; --a) {
      int idx = static_cast<int>(rr % static_cast<long>(xs[S[a]].size()));
      rr /= static_cast<long>(xs[S[a]].size());
      base += idx * stride[S[a]];
    }
    for (long col = 0; col < cols; ++col) {
      long cc = col, off = base;
      for (int b = static_cast<int>(F.size()) - 1; b >= 0; --b) {
        int idx = static_cast<int>(cc % static_cast<long>(xs[F[b]].size()));
        cc /= static_cast<long>(xs[F[b]].size());
        off += idx * stride[F[b]];
      }
      out[off] = g(r, col);
    }
  }
  return out;
}

}  // namespace detail

double Box::volume() const {
  double v = 1;
  for (double s : side) v *= s;
  return v;
}

BoxEvaluator::BoxEvaluator(const QuadTuple& q, const Box& box) : q_(q), box_(box) {
  if (static_cast<int>(box.corner.size()) != q.d || static_cast<int>(box.side.size()) != q.d)
    throw InputError("box dimension does not match d");
  for (int k = 0; k < q.d; ++k)
    if (box.side[k] <= 0 || box.corner[k] < -1e-12 || box.corner[k] + box.side[k] > 1 + 1e-12)
      throw InputError("box must lie inside [0,1]^d with positive sides");
}

cplx BoxEvaluator::eval(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != q_.d + q_.n) throw InputError("point must have d+n coordinates");
  detail::BoxEngine eng(q_, box_);
  std::vector<double> y(x.begin() + q_.d, x.end());
  eng.set_y(y);
  cplx val = eng.translation_phase(x);
  for (size_t c = 0; c < eng.components().size(); ++c) {
    const auto& comp = eng.components()[c];
    std::vector<std::vector<double>> xs;
    for (int v : comp) xs.push_back({x[v]});
    val *= eng.component_grid(static_cast<int>(c), xs)[0];
  }
  return val;
}

}  // namespace qr
