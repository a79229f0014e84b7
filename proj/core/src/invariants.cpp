#include "qrestrict/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "qrestrict/multipoly.hpp"
#include "ratla.hpp"
#include "upoly.hpp"

namespace qr {

using upoly::UPoly;

namespace {

constexpr int kExactPencilMaxDim = 8;

RatMatrix combo(const QuadTuple& q, const std::vector<Rational>& y) {
  RatMatrix m(q.d, q.d);
  for (int j = 0; j < q.n; ++j) {
    if (y[j] == 0) continue;
    for (size_t t = 0; t < m.a.size(); ++t) m.a[t] += y[j] * q.forms[j].e[t];
  }
  return m;
}

// n x d^2 matrix of vectorized forms
int forms_rank(const QuadTuple& q) {
  RatMatrix v(q.n, q.d * q.d);
  for (int j = 0; j < q.n; ++j)
    for (int t = 0; t < q.d * q.d; ++t) v(j, t) = q.forms[j].e[t];
  return v.rank();
}

std::vector<Rational> dependency(const QuadTuple& q) {
  RatMatrix v(q.d * q.d, q.n);
  for (int j = 0; j < q.n; ++j)
    for (int t = 0; t < q.d * q.d; ++t) v(t, j) = q.forms[j].e[t];
  RatMatrix ns = ratla::nullspace(v);
  std::vector<Rational> y(q.n);
  for (int j = 0; j < q.n; ++j) y[j] = ns(j, 0);
  return y;
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(k);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) { out.push_back(c); return; }
    for (int i = start; i <= n - (k - depth); ++i) {
      c[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  if (k >= 0 && k <= n) rec(0, 0);
  return out;
}

// gcd of all k x k minors of s*A + B, zero poly when all vanish identically
struct PencilMinors {
  const RatMatrix& a;
  const RatMatrix& b;
  int d;
  std::vector<std::optional<UPoly>> cache;
  std::vector<bool> vanish;

  PencilMinors(const RatMatrix& a_, const RatMatrix& b_) : a(a_), b(b_), d(a_.rows), cache(a_.rows + 1), vanish(a_.rows + 1, false) {}

  const UPoly& g(int k) {
    if (cache[k]) return *cache[k];
    UPoly acc;
    bool any = false;
    if (k == 0) {
      acc = {Rational(1)};
      any = true;
    } else {
      auto sets = combinations(d, k);
      for (const auto& rows : sets) {
        for (const auto& cols : sets) {
          std::vector<std::vector<MultiPoly>> sub(k, std::vector<MultiPoly>(k, MultiPoly(1)));
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
              MultiPoly e(1);
              e.add_term({1}, a(rows[i], cols[j]));
              e.add_term({0}, b(rows[i], cols[j]));
              sub[i][j] = e;
            }
          UPoly m = upoly::from_multipoly(poly_determinant(sub));
          if (m.empty()) continue;
          acc = any ? upoly::gcd(acc, m) : upoly::monic(m);
          any = true;
          if (upoly::deg(acc) == 0) break;
        }
        if (any && upoly::deg(acc) == 0) break;
      }
    }
    vanish[k] = !any;
    cache[k] = acc;
    return *cache[k];
  }
  bool identically_zero(int k) {
    g(k);
    return vanish[k];
  }
};

struct AffineMin {
  int rank = 0;
  bool found_root = false;
  upoly::RootBox box;
  UPoly f;  // square-free poly whose isolated root is the witness
};

// min over real s of rank(s*A + B)
AffineMin affine_pencil_min(const RatMatrix& a, const RatMatrix& b) {
  PencilMinors pm(a, b);
  const int d = a.rows;
  for (int k = 1; k <= d; ++k) {
    if (pm.identically_zero(k)) {
      AffineMin r;
      r.rank = k - 1;
      r.found_root = false;  // any s works; s = 0 is a witness
      return r;
    }
    const UPoly& gk = pm.g(k);
    if (upoly::deg(gk) <= 0) continue;
    UPoly sqf = upoly::squarefree(gk);
    // narrow boxes: the floating witness feeds the 2x2 canonical transforms
    auto roots = upoly::isolate(sqf, Rational(mpz_class(1), mpz_class(1) << 70));
    if (!roots.empty()) {
      AffineMin r;
      r.rank = k - 1;
      r.found_root = true;
      // prefer an exact rational root when one exists
      r.box = roots.front();
      for (const auto& rb : roots)
        if (rb.exact) { r.box = rb; break; }
      r.f = sqf;
      return r;
    }
  }
  AffineMin r;
  r.rank = d;
  return r;
}

Rational box_mid(const upoly::RootBox& b) { return b.exact ? b.hi : Rational((b.lo + b.hi) / 2); }

std::vector<double> to_dvec(const std::vector<Rational>& v) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x.get_d());
  return out;
}

PencilRank pencil_two(const RatMatrix& a1, const RatMatrix& a2) {
  PencilRank out;
  int r_inf = a1.rank();
  AffineMin am = affine_pencil_min(a1, a2);
  if (r_inf <= am.rank) {
    out.rank = r_inf;
    out.witness = {1.0, 0.0};
    out.witness_exact = {Rational(1), Rational(0)};
    return out;
  }
  out.rank = am.rank;
  if (!am.found_root) {
    out.witness = {0.0, 1.0};
    out.witness_exact = {Rational(0), Rational(1)};
  } else {
    Rational s0 = box_mid(am.box);
    out.witness = {s0.get_d(), 1.0};
    out.witness_rational = am.box.exact;
    if (am.box.exact) out.witness_exact = {s0, Rational(1)};
  }
  return out;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rational small_int(std::mt19937_64& rng, int range = 9) {
  return Rational(static_cast<long>(rng() % (2 * range + 1)) - range);
}

}  // namespace

PencilRank min_rank_pencil(const QuadTuple& q, std::uint64_t seed) {
  PencilRank out;
  if (forms_rank(q) < q.n) {
    auto y = dependency(q);
    out.rank = 0;
    out.witness = to_dvec(y);
    out.witness_exact = y;
    return out;
  }
  if (q.n == 1) {
    out.rank = q.forms[0].as_matrix().rank();
    out.witness = {1.0};
    out.witness_exact = {Rational(1)};
    return out;
  }
  if (q.n == 2 && q.d <= kExactPencilMaxDim) return pencil_two(q.forms[0].as_matrix(), q.forms[1].as_matrix());

  // structured search; exact only when the bound 1 (independent forms) is met
  int best = q.d + 1;
  std::vector<Rational> best_y;
  auto consider = [&](const std::vector<Rational>& y) {
    int r = combo(q, y).rank();
    if (r < best) { best = r; best_y = y; out.witness_rational = true; }
  };
  for (int j = 0; j < q.n; ++j) {
    std::vector<Rational> y(q.n, 0);
    y[j] = 1;
    consider(y);
  }
  bool all_pairs_exact = q.d <= kExactPencilMaxDim;
  if (q.d <= kExactPencilMaxDim) {
    for (int i = 0; i < q.n; ++i)
      for (int j = i + 1; j < q.n; ++j) {
        PencilRank pr = pencil_two(q.forms[i].as_matrix(), q.forms[j].as_matrix());
        if (pr.rank < best && pr.witness_rational) {
          std::vector<Rational> y(q.n, 0);
          y[i] = pr.witness_exact[0];
          y[j] = pr.witness_exact[1];
          consider(y);
        }
        if (pr.rank < best && !pr.witness_rational) {
          best = pr.rank;
          best_y.assign(q.n, 0);
          best_y[i] = Rational(pr.witness[0]);
          best_y[j] = Rational(pr.witness[1]);
          out.witness_rational = false;
        }
      }
  }
  std::mt19937_64 rng(mix(seed, 0));
  for (int s = 0; s < 64; ++s) {
    std::vector<Rational> y(q.n);
    for (auto& v : y) v = small_int(rng);
    if (std::all_of(y.begin(), y.end(), [](const Rational& v) { return v == 0; })) continue;
    consider(y);
  }
  (void)all_pairs_exact;
  out.rank = best;
  out.witness = to_dvec(best_y);
  if (out.witness_rational) out.witness_exact = best_y;
  out.exact = best <= 1;
  return out;
}

namespace {

struct EssResult {
  int ess = 0;
  RatMatrix m1;  // d x d certificate
};

// essential variable count of Q restricted to col-span(U), combined by M2 (n x n'), with certificate
EssResult essential(const QuadTuple& q, const RatMatrix& u, const RatMatrix& m2) {
  const int dp = u.cols, np = m2.cols;
  RatMatrix concat(dp, dp * np);
  RatMatrix ut = u.transpose();
  for (int c = 0; c < np; ++c) {
    std::vector<Rational> y(q.n);
    for (int j = 0; j < q.n; ++j) y[j] = m2(j, c);
    RatMatrix b = ut * combo(q, y) * u;
    for (int i = 0; i < dp; ++i)
      for (int j = 0; j < dp; ++j) concat(i, c * dp + j) = b(i, j);
  }
  EssResult r;
  RatMatrix range = ratla::colspace(concat);               // joint row space (symmetric blocks)
  RatMatrix kernel = ratla::nullspace(concat.transpose());  // common radical
  r.ess = range.cols;
  RatMatrix t = ratla::hcat(range, kernel);                 // dp x dp invertible
  r.m1 = ratla::pad_cols(u * t, q.d);
  return r;
}

RatMatrix select_cols(int rows, const std::vector<int>& idx) {
  RatMatrix m(rows, static_cast<int>(idx.size()));
  for (size_t c = 0; c < idx.size(); ++c) m(idx[c], static_cast<int>(c)) = 1;
  return m;
}

RatMatrix column(const std::vector<Rational>& v) {
  RatMatrix m(static_cast<int>(v.size()), 1);
  for (size_t i = 0; i < v.size(); ++i) m(static_cast<int>(i), 0) = v[i];
  return m;
}

// nonzero real v with Q1(v)=Q2(v)=0 and A1 v, A2 v dependent (n=2); decides d_{d-1,2} <= d-2
Tri hyperplane_radical(const QuadTuple& q) {
  const RatMatrix a1 = q.forms[0].as_matrix(), a2 = q.forms[1].as_matrix();
  auto kernel_has_isotropic = [&](const RatMatrix& p, const RatMatrix& other) {
    RatMatrix k = ratla::nullspace(p);
    if (k.cols == 0) return false;
    RatMatrix r = k.transpose() * other * k;
    return ratla::has_isotropic_vector(r);
  };
  // point at infinity: kernel of A1, need Q2 = 0 there
  if (kernel_has_isotropic(a1, a2)) return Tri::True;
  if (q.d > kExactPencilMaxDim) return Tri::Inconclusive;
  PencilMinors pm(a1, a2);
  const int d = q.d;
  if (pm.identically_zero(d)) return Tri::Inconclusive;
  UPoly f = upoly::squarefree(pm.g(d));
  for (const auto& box : upoly::isolate(f)) {
    if (box.exact) {
      RatMatrix p(d, d);
      for (size_t t = 0; t < p.a.size(); ++t) p.a[t] = box.hi * a1.a[t] + a2.a[t];
      if (kernel_has_isotropic(p, a1)) return Tri::True;
      continue;
    }
    // irrational root: only the simple-kernel case is handled exactly
    if (upoly::root_kills(f, box, pm.g(d - 1))) return Tri::Inconclusive;
    // adjugate column with an entry alive at the root gives the kernel vector
    bool decided = false;
    for (int col = 0; col < d && !decided; ++col) {
      std::vector<MultiPoly> v(d, MultiPoly(1));
      bool alive = false;
      for (int row = 0; row < d; ++row) {
        std::vector<std::vector<MultiPoly>> sub;
        for (int i = 0; i < d; ++i) {
          if (i == col) continue;
          std::vector<MultiPoly> r;
          for (int j = 0; j < d; ++j) {
            if (j == row) continue;
            MultiPoly e(1);
            e.add_term({1}, a1(i, j));
            e.add_term({0}, a2(i, j));
            r.push_back(e);
          }
          sub.push_back(r);
        }
        MultiPoly cof = poly_determinant(sub);
        if ((row + col) % 2) cof = -cof;
        v[row] = cof;
        if (!upoly::root_kills(f, box, upoly::from_multipoly(cof))) alive = true;
      }
      if (!alive) continue;
      MultiPoly h(1);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          if (a1(i, j) != 0) h = h + v[i] * v[j] * a1(i, j);
      if (upoly::root_kills(f, box, upoly::from_multipoly(h))) return Tri::True;
      decided = true;
    }
    if (!decided) return Tri::Inconclusive;
  }
  return Tri::False;
}

}  // namespace

namespace {
bool common_zero_2(const SymMatrix& a, const SymMatrix& b);
}

DInvariantResult d_invariant(const QuadTuple& q, int d_sub, int n_sub, const SearchBudget& budget) {
  if (d_sub < 0 || d_sub > q.d || n_sub < 0 || n_sub > q.n) throw InputError("d_invariant: need 0<=d'<=d and 0<=n'<=n");
  DInvariantResult res;
  std::ostringstream log;
  if (d_sub == 0 || n_sub == 0) {
    res.value = 0;
    res.exact = true;
    res.m1 = RatMatrix(q.d, q.d);
    res.m2 = (n_sub == 0) ? RatMatrix(q.n, 0) : select_cols(q.n, {0});
    if (n_sub > 0) res.m2 = select_cols(q.n, [&] { std::vector<int> v; for (int i = 0; i < n_sub; ++i) v.push_back(i); return v; }());
    res.search_log = "empty composition";
    return res;
  }
  const RatMatrix identity = RatMatrix::identity(q.d);

  if (d_sub == q.d && n_sub == 1) {
    PencilRank pr = min_rank_pencil(q, budget.seed);
    std::vector<Rational> y = pr.witness_exact;
    if (y.empty())
      for (double v : pr.witness) y.push_back(Rational(v));
    EssResult e = essential(q, identity, column(y));
    res.value = pr.rank;
    res.exact = pr.exact;
    res.m1 = e.m1;
    res.m2 = column(y);
    res.certificate_attains = (e.ess == pr.rank);
    res.lower_bound = pr.exact ? pr.rank : 0;
    log << "pencil minimal rank" << (pr.exact ? " (exact)" : " (search)")
        << (pr.witness_rational ? "" : "; witness irrational, certificate rounded");
    res.search_log = log.str();
    return res;
  }
  if (d_sub == q.d && n_sub == q.n) {
    std::vector<int> all;
    for (int j = 0; j < q.n; ++j) all.push_back(j);
    EssResult e = essential(q, identity, select_cols(q.n, all));
    res.value = e.ess;
    res.exact = true;
    res.m1 = e.m1;
    res.m2 = select_cols(q.n, all);
    res.lower_bound = e.ess;
    res.search_log = "joint row space of all forms";
    return res;
  }

  if (d_sub == 1) {
    // NV on a line is 0 or 1; it is 0 iff the n' combinations vanish at one vector
    bool zero_possible = n_sub < q.n;
    Tri common = Tri::Inconclusive;
    if (!zero_possible) {
      if (q.n == 1) common = ratla::has_isotropic_vector(q.forms[0].as_matrix()) ? Tri::True : Tri::False;
      else if (q.d == 2 && q.n == 2) common = common_zero_2(q.forms[0], q.forms[1]) ? Tri::True : Tri::False;
      else if (q.d == 1) common = std::all_of(q.forms.begin(), q.forms.end(), [](const SymMatrix& f) { return f.is_zero(); }) ? Tri::True : Tri::False;
    }
    if (zero_possible || common == Tri::False) {
      res.lower_bound = zero_possible ? 0 : 1;
      log << (zero_possible ? "n' < n, some combination vanishes on a line; " : "no common real zero; ");
    } else {
      log << "line case, common zero " << tri_str(common) << "; ";
    }
  }

  // certified lower bound
  int lb = res.lower_bound;
  PencilRank pr = min_rank_pencil(q, budget.seed);
  if (pr.exact) lb = std::max(lb, pr.rank - 2 * (q.d - d_sub));
  if (lb == 0 && n_sub == q.n) {
    // value 0 needs a d'-dim subspace isotropic for every form; inertia caps that dimension
    for (const auto& f : q.forms) {
      ratla::Inertia in = ratla::inertia(f.as_matrix());
      if (in.zero + std::min(in.pos, in.neg) < d_sub) {
        lb = 1;
        log << "a form has no isotropic subspace of dimension " << d_sub << "; ";
        break;
      }
    }
  }
  Tri radical = Tri::Inconclusive;
  if (q.n == 2 && n_sub == 2 && d_sub == q.d - 1) {
    radical = hyperplane_radical(q);
    if (radical == Tri::False) lb = std::max(lb, q.d - 1);
    log << "hyperplane radical test: " << tri_str(radical) << "; ";
  }

  int best = q.d + 1;
  long tried = 0;
  bool exhausted = false;
  auto try_pair = [&](const RatMatrix& u, const RatMatrix& m2) {
    if (u.rank() != d_sub || m2.rank() != n_sub) return;
    ++tried;
    EssResult e = essential(q, u, m2);
    if (e.ess < best) {
      best = e.ess;
      res.m1 = e.m1;
      res.m2 = m2;
    }
  };

  // W candidates: coordinate projections, sign patterns for n'=1, the pencil witness
  std::vector<RatMatrix> ws;
  for (const auto& c : combinations(q.n, n_sub)) ws.push_back(select_cols(q.n, c));
  if (n_sub == 1) {
    long total = 1;
    for (int j = 0; j < q.n; ++j) total *= 3;
    for (long code = 1; code < total && static_cast<long>(ws.size()) < 4096; ++code) {
      std::vector<Rational> y(q.n);
      long c = code;
      int first_nonzero = 0;
      for (int j = 0; j < q.n; ++j) {
        y[j] = static_cast<long>(c % 3) - 1;
        c /= 3;
        if (first_nonzero == 0 && y[j] != 0) first_nonzero = (y[j] > 0) ? 1 : -1;
      }
      if (first_nonzero <= 0) continue;
      int nz = 0;
      for (auto& v : y) nz += (v != 0);
      if (nz >= 2) ws.push_back(column(y));
    }
    if (pr.witness_rational) ws.push_back(column(pr.witness_exact));
  }

  // V candidates: coordinate subspaces first, then spans of e_i +- e_j
  std::vector<std::vector<Rational>> pool;
  for (int i = 0; i < q.d; ++i) {
    std::vector<Rational> v(q.d, 0);
    v[i] = 1;
    pool.push_back(v);
  }
  for (int i = 0; i < q.d; ++i)
    for (int j = i + 1; j < q.d; ++j)
      for (int s : {1, -1}) {
        std::vector<Rational> v(q.d, 0);
        v[i] = 1;
        v[j] = s;
        pool.push_back(v);
      }
  auto make_u = [&](const std::vector<int>& idx) {
    RatMatrix u(q.d, d_sub);
    for (int c = 0; c < d_sub; ++c)
      for (int i = 0; i < q.d; ++i) u(i, c) = pool[idx[c]][i];
    return u;
  };
  for (const auto& idx : combinations(q.d, d_sub)) {
    for (const auto& w : ws) try_pair(make_u(idx), w);
  }
  // wider pool, enumerated lazily under the budget
  {
    std::vector<int> c(d_sub);
    std::function<bool(int, int)> rec = [&](int start, int depth) -> bool {
      if (tried >= budget.max_candidates) { exhausted = true; return false; }
      if (depth == d_sub) {
        bool coord = true;
        for (int v : c) coord &= v < q.d;
        if (coord) return true;
        for (const auto& w : ws) {
          try_pair(make_u(c), w);
          if (tried >= budget.max_candidates) { exhausted = true; return false; }
        }
        return true;
      }
      for (int i = start; i < static_cast<int>(pool.size()); ++i) {
        c[depth] = i;
        if (!rec(i + 1, depth + 1)) return false;
        if (best <= lb) return false;
      }
      return true;
    };
    if (best > lb) rec(0, 0);
  }
  int structured = best;
  std::mt19937_64 rng(mix(budget.seed, 17));
  for (int s = 0; s < budget.random_samples; ++s) {
    RatMatrix u(q.d, d_sub), m2(q.n, n_sub);
    for (auto& v : u.a) v = small_int(rng);
    for (auto& v : m2.a) v = small_int(rng);
    try_pair(u, m2);
  }
  res.value = best;
  res.lower_bound = lb;
  res.exact = (best == lb);
  res.certificate_attains = nv(change_of_variables(q, res.m1, res.m2)) == best;
  log << "structured layer " << tried << " candidates" << (exhausted ? " (budget exhausted)" : "")
      << ", structured min " << structured << ", after " << budget.random_samples << " random samples " << best
      << ", certified lower bound " << lb;
  res.search_log = log.str();
  return res;
}

std::string tri_str(Tri t) {
  switch (t) {
    case Tri::True: return "true";
    case Tri::False: return "false";
    default: return "inconclusive";
  }
}

namespace {

double det_d(std::vector<std::vector<double>> m) {
  const int n = static_cast<int>(m.size());
  double det = 1;
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int i = c + 1; i < n; ++i)
      if (std::abs(m[i][c]) > std::abs(m[p][c])) p = i;
    if (m[p][c] == 0) return 0;
    if (p != c) { std::swap(m[p], m[c]); det = -det; }
    det *= m[c][c];
    for (int i = c + 1; i < n; ++i) {
      double f = m[i][c] / m[c][c];
      for (int j = c; j < n; ++j) m[i][j] -= f * m[c][j];
    }
  }
  return det;
}

double sphere_integral(const QuadTuple& q, double gamma, int nodes) {
  const int n = q.n, d = q.d;
  std::vector<std::vector<std::vector<double>>> forms;
  for (const auto& f : q.forms) forms.push_back(to_double(f));
  auto integrand = [&](const std::vector<double>& y) {
    std::vector<std::vector<double>> m(d, std::vector<double>(d, 0.0));
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) m[a][b] += y[j] * forms[j][a][b];
    double det = std::abs(det_d(m));
    if (det == 0) return std::numeric_limits<double>::infinity();
    return std::pow(det, -gamma);
  };
  if (n == 1) return integrand({1.0}) + integrand({-1.0});
  // hyperspherical midpoint grid: n-2 polar angles on [0,pi], one azimuth on [0,2pi)
  const int polar = n - 2;
  const double pi = std::acos(-1.0);
  std::vector<int> counts(polar, nodes);
  counts.push_back(2 * nodes);
  long total = 1;
  for (int c : counts) total *= c;
  double sum = 0;
  std::vector<double> y(n);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    double weight = 1, sin_prod = 1;
    for (int a = 0; a <= polar; ++a) {
      int k = static_cast<int>(rem % counts[a]);
      rem /= counts[a];
      double h = (a < polar ? pi : 2 * pi) / counts[a];
      double ang = (k + 0.5) * h;
      weight *= h;
      if (a < polar) {
        y[a] = sin_prod * std::cos(ang);
        weight *= std::pow(std::sin(ang), n - 2 - a);
        sin_prod *= std::sin(ang);
      } else {
        y[a] = sin_prod * std::cos(ang);
        y[a + 1] = sin_prod * std::sin(ang);
      }
    }
    sum += weight * integrand(y);
  }
  return sum;
}

}  // namespace

GammaProbe cm_integral_probe(const QuadTuple& q, double gamma, int sphere_nodes) {
  double hi = static_cast<double>(q.n) / q.d;
  if (!(gamma > 0 && gamma < hi)) throw InputError("cm_integral_probe: gamma must lie in (0, n/d)");
  if (sphere_nodes < 16) throw InputError("cm_integral_probe: sphere_nodes must be >= 16");
  long fine_total = 1;
  for (int a = 0; a < q.n - 1; ++a) fine_total *= 4L * sphere_nodes * (a == q.n - 2 ? 2 : 1);
  if (fine_total > (1L << 24)) throw BudgetError("cm_integral_probe: sphere grid above 2^24 nodes");
  GammaProbe g;
  g.gamma = gamma;
  g.estimate = sphere_integral(q, gamma, sphere_nodes);
  g.estimate_fine = sphere_integral(q, gamma, 4 * sphere_nodes);
  g.divergent = !std::isfinite(g.estimate) || !std::isfinite(g.estimate_fine) || g.estimate_fine > 2 * g.estimate;
  return g;
}

namespace {
std::vector<GammaProbe> gamma_scan(const QuadTuple& q, int nodes) {
  std::vector<GammaProbe> out;
  double hi = static_cast<double>(q.n) / q.d;
  for (double frac : {0.25, 0.5, 0.75, 0.95}) out.push_back(cm_integral_probe(q, frac * hi, nodes));
  return out;
}
}  // namespace

CmVerdict cm_check_3_2(const QuadTuple& q) {
  if (q.d != 3 || q.n != 2) throw InputError("cm_check_3_2 requires d=3, n=2");
  DInvariantResult d32 = d_invariant(q, 3, 2);
  if (d32.value != 3)
    throw InputError("cm_check_3_2 precondition failed: d_{3,2}(Q) = " + std::to_string(d32.value) + ", need 3");
  CmVerdict v;
  v.method = "characterization_3_2";
  DInvariantResult d31 = d_invariant(q, 3, 1);
  std::ostringstream det;
  det << "d_{3,1}=" << d31.value << (d31.exact ? "" : "?");
  if (d31.exact && d31.value != 2) {
    v.satisfied = Tri::False;
  } else {
    DInvariantResult d22 = d_invariant(q, 2, 2);
    det << ", d_{2,2}=" << d22.value << (d22.exact ? "" : "?");
    if (d22.value < 2 && d22.certificate_attains) v.satisfied = Tri::False;
    else if (d31.exact && d22.exact) v.satisfied = (d31.value == 2 && d22.value == 2) ? Tri::True : Tri::False;
    else v.satisfied = Tri::Inconclusive;
  }
  v.detail = det.str();
  v.gamma_scan = gamma_scan(q, 64);
  return v;
}

CmVerdict cm_probe_verdict(const QuadTuple& q, int sphere_nodes) {
  CmVerdict v;
  v.method = "integral_probe";
  v.gamma_scan = gamma_scan(q, sphere_nodes);
  bool div = std::any_of(v.gamma_scan.begin(), v.gamma_scan.end(), [](const GammaProbe& g) { return g.divergent; });
  v.satisfied = div ? Tri::False : Tri::True;
  v.detail = "heuristic probe only";
  return v;
}

std::string class_name(Class2x2 c) {
  switch (c) {
    case Class2x2::XiSq_XiXj: return "XiSq_XiXj";
    case Class2x2::XiSq_XjSq: return "XiSq_XjSq";
    case Class2x2::Hyperbolic_Pair: return "Hyperbolic_Pair";
    default: return "Degenerate";
  }
}

namespace {

using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 mat2(const SymMatrix& s) { return {{{s(0, 0).get_d(), s(0, 1).get_d()}, {s(1, 0).get_d(), s(1, 1).get_d()}}}; }
Mat2 lin(double a, const Mat2& x, double b, const Mat2& y) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a * x[i][j] + b * y[i][j];
  return r;
}
double qf(const Mat2& m, const std::array<double, 2>& u, const std::array<double, 2>& v) {
  double s = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s += u[i] * m[i][j] * v[j];
  return s;
}

// common real zero of two binary forms (exact)
bool common_zero_2(const SymMatrix& a, const SymMatrix& b) {
  // v = (t, 1) chart plus v = (1, 0)
  if (a(0, 0) == 0 && b(0, 0) == 0) return true;
  UPoly pa{a(1, 1), 2 * a(0, 1), a(0, 0)}, pb{b(1, 1), 2 * b(0, 1), b(0, 0)};
  upoly::trim(pa);
  upoly::trim(pb);
  if (pa.empty() && pb.empty()) return true;
  if (pa.empty()) return upoly::count_all_roots(pb) > 0;
  if (pb.empty()) return upoly::count_all_roots(pa) > 0;
  UPoly g = upoly::gcd(pa, pb);
  return upoly::count_all_roots(g) > 0;
}

}  // namespace

CanonicalClass2x2 classify_2x2(const QuadTuple& q) {
  if (q.d != 2 || q.n != 2) throw InputError("classify_2x2 requires d=2, n=2");
  CanonicalClass2x2 out;
  out.d22 = d_invariant(q, 2, 2).value;
  if (out.d22 < 2) {
    out.cls = Class2x2::Degenerate;
    return out;
  }
  PencilRank pr = min_rank_pencil(q);
  if (!pr.exact) throw InputError("classify_2x2: pencil rank not exact");
  out.d21 = pr.rank;
  out.d12 = common_zero_2(q.forms[0], q.forms[1]) ? 0 : 1;
  Mat2 a1 = mat2(q.forms[0]), a2 = mat2(q.forms[1]);
  Mat2 m1{}, m2{};
  Mat2 c1{}, c2{};  // canonical targets
  if (out.d21 == 2) {
    out.cls = Class2x2::Hyperbolic_Pair;
    c1 = {{{0, 0.5}, {0.5, 0}}};
    c2 = {{{1, 0}, {0, -1}}};
    // isotropic vectors of A1 (indefinite since no real singular member)
    auto iso = [&](const Mat2& m) {
      std::vector<std::array<double, 2>> v;
      double a = m[0][0], b = m[0][1], c = m[1][1];
      if (std::abs(a) < 1e-300) {
        v.push_back({1, 0});
        v.push_back({-c, 2 * b});
      } else {
        double disc = std::sqrt(b * b - a * c);
        v.push_back({(-b + disc) / a, 1});
        v.push_back({(-b - disc) / a, 1});
        if (std::abs(v[0][0]) > 1e12 || std::abs(v[1][0]) > 1e12) {}
      }
      return v;
    };
    // eigenvalues of A1^{-1} A2 are alpha +- i beta
    double det1 = a1[0][0] * a1[1][1] - a1[0][1] * a1[1][0];
    Mat2 inv{{{a1[1][1] / det1, -a1[0][1] / det1}, {-a1[1][0] / det1, a1[0][0] / det1}}};
    Mat2 mm{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) mm[i][j] = inv[i][0] * a2[0][j] + inv[i][1] * a2[1][j];
    double tr = mm[0][0] + mm[1][1], dt = mm[0][0] * mm[1][1] - mm[0][1] * mm[1][0];
    double alpha = tr / 2, beta = std::sqrt(std::max(0.0, dt - alpha * alpha));
    // P2 = 2 (A2 - alpha A1) / beta
    double k2 = 2 / beta;
    Mat2 p2 = lin(k2, a2, -alpha * k2, a1);
    auto v = iso(a1);
    std::array<double, 2> u = v[0], w = v[1];
    double b = qf(a1, u, w);
    for (auto& x : w) x /= 2 * b;
    double qq = qf(p2, u, w);
    // subtract kappa A1 with kappa = 2 qq
    double kappa = 2 * qq;
    Mat2 p3 = lin(1, p2, -kappa, a1);
    double pp = qf(p3, u, u), rr = qf(p3, w, w);
    double c = std::pow(-rr / pp, 0.25);
    for (auto& x : u) x *= c;
    for (auto& x : w) x /= c;
    double scale = qf(p3, u, u);  // = c^2 p
    m1 = {{{u[0], w[0]}, {u[1], w[1]}}};
    // Q1' = A1, Q2' = (P3)/scale = (k2 A2 - (alpha k2 + kappa) A1)/scale
    m2 = {{{1, -(alpha * k2 + kappa) / scale}, {0, k2 / scale}}};
  } else if (out.d21 == 1) {
    // rank-one member P = sigma l l^T at the witness y
    double y1 = pr.witness[0], y2 = pr.witness[1];
    Mat2 p = lin(y1, a1, y2, a2);
    // other basis member: the coordinate direction not parallel to y
    double o1 = (std::abs(y1) >= std::abs(y2)) ? 0 : 1, o2 = 1 - o1;
    Mat2 pp = lin(o1, a1, o2, a2);
    double sigma = (p[0][0] + p[1][1] >= 0) ? 1 : -1;
    std::array<double, 2> l;
    if (std::abs(p[0][0]) >= std::abs(p[1][1])) l = {std::sqrt(std::abs(p[0][0])), sigma * p[0][1] / std::sqrt(std::abs(p[0][0]))};
    else l = {sigma * p[0][1] / std::sqrt(std::abs(p[1][1])), std::sqrt(std::abs(p[1][1]))};
    double ll = l[0] * l[0] + l[1] * l[1];
    std::array<double, 2> v{-l[1], l[0]};  // kernel of P
    std::array<double, 2> u{l[0] / ll, l[1] / ll};
    if (out.d12 == 0) {
      out.cls = Class2x2::XiSq_XiXj;
      c1 = {{{1, 0}, {0, 0}}};
      c2 = {{{0, 0.5}, {0.5, 0}}};
      double a = qf(pp, u, u), b = qf(pp, u, v);
      m1 = {{{u[0], v[0]}, {u[1], v[1]}}};
      // first = sigma P, second = (PP - a sigma P)/(2b)
      m2 = {{{sigma * y1, (o1 - a * sigma * sigma * y1) / (2 * b)}, {sigma * y2, (o2 - a * sigma * sigma * y2) / (2 * b)}}};
    } else {
      out.cls = Class2x2::XiSq_XjSq;
      c1 = {{{1, 0}, {0, 0}}};
      c2 = {{{0, 0}, {0, 1}}};
      double pv = qf(pp, v, v);
      double shift = qf(pp, u, v) / pv;
      u = {u[0] - shift * v[0], u[1] - shift * v[1]};
      double a = qf(pp, u, u);
      double cc = pv;
      // rescale v so the second coefficient is 1 after dividing by |cc|
      m1 = {{{u[0], v[0]}, {u[1], v[1]}}};
      m2 = {{{sigma * y1, (o1 - a * sigma * y1) / cc}, {sigma * y2, (o2 - a * sigma * y2) / cc}}};
    }
  } else {
    out.cls = Class2x2::Degenerate;
    return out;
  }
  // residual of Q(M1 xi) M2 against the canonical pair
  auto pulled = [&](const Mat2& a) {
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) r[i][j] += m1[k][i] * a[k][l] * m1[l][j];
    return r;
  };
  Mat2 b1 = pulled(a1), b2 = pulled(a2);
  Mat2 r1 = lin(m2[0][0], b1, m2[1][0], b2), r2 = lin(m2[0][1], b1, m2[1][1], b2);
  double res = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) res = std::max({res, std::abs(r1[i][j] - c1[i][j]), std::abs(r2[i][j] - c2[i][j])});
  out.residual = res;
  out.m1 = {{m1[0][0], m1[0][1]}, {m1[1][0], m1[1][1]}};
  out.m2 = {{m2[0][0], m2[0][1]}, {m2[1][0], m2[1][1]}};
  return out;
}

int hurwitz_radon(int d) {
  if (d < 1) throw InputError("hurwitz_radon: d must be positive");
  int e = 0;
  while (d % 2 == 0) { d /= 2; ++e; }
  int a = e / 4, b = e % 4;
  return 8 * a + (1 << b);
}

}  // namespace qr
