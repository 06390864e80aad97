#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "anomaly/fiber.hpp"
#include "anomaly/fock.hpp"
#include "anomaly/multivector.hpp"

namespace anomaly {

// Multi-index over the N = n(n-1)/2 rotation variables A_{ij}, i < j.
using MultiIndex = std::vector<int>;

template <class C>
using Poly = std::map<MultiIndex, C>;

struct DivergentLimit : std::runtime_error {
  DivergentLimit() : std::runtime_error("small-t limit diverges: nonzero low-order even coefficient") {}
};

inline int mi_total(const MultiIndex& a) {
  int s = 0;
  for (int v : a) s += v;
  return s;
}

inline bool mi_even(const MultiIndex& a) {
  for (int v : a)
    if (v % 2 != 0) return false;
  return true;
}

inline MultiIndex mi_add(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

// alpha! / (alpha/2)! for even alpha.
template <class S>
S even_moment_ratio(const MultiIndex& a) {
  S r = ring<S>::one();
  for (int v : a) {
    long long f = 1;
    for (int k = v / 2 + 1; k <= v; ++k) f *= k;
    r = r * ring<S>::from_int(f);
  }
  return r;
}

// Normalized Gaussian moment (4 pi t)^{-N/2} int e^{-|x|^2/4t} x^alpha dx:
// t^{|alpha|/2} * alpha!/(alpha/2)! for even alpha, zero for odd alpha.
inline std::pair<int, Scalar> gaussian_moment(const MultiIndex& a) {
  if (!mi_even(a)) return {0, Scalar(0)};
  return {mi_total(a) / 2, even_moment_ratio<Scalar>(a)};
}

// t^0 coefficient of t^{-k/2} * sum_alpha phi_alpha t^{|alpha|/2} ratio(alpha):
// the sum over even alpha with |alpha| = k; any nonzero even coefficient
// below k makes the limit diverge.
template <class S>
S gaussian_limit_degree(const Poly<S>& taylor, int k) {
  S acc = ring<S>::zero();
  for (const auto& [a, c] : taylor) {
    if (!mi_even(a) || ring<S>::is_zero(c)) continue;
    const int deg = mi_total(a);
    if (deg < k) throw DivergentLimit{};
    if (deg == k) acc += c * even_moment_ratio<S>(a);
  }
  return acc;
}

template <class S>
S gaussian_limit(const Poly<S>& taylor, int i) {
  return gaussian_limit_degree(taylor, 2 * i);
}

// Truncated product of multivariate series with algebra coefficients.
template <class C>
Poly<C> poly_mul(const Poly<C>& a, const Poly<C>& b, int d) {
  Poly<C> r;
  for (const auto& [ma, ca] : a) {
    if (mi_total(ma) > d) continue;
    for (const auto& [mb, cb] : b) {
      if (mi_total(ma) + mi_total(mb) > d) continue;
      C prod = ca * cb;
      if (prod.is_zero()) continue;
      auto key = mi_add(ma, mb);
      auto it = r.find(key);
      if (it == r.end())
        r.emplace(std::move(key), std::move(prod));
      else {
        it->second += prod;
        if (it->second.is_zero()) r.erase(it);
      }
    }
  }
  return r;
}

template <class S>
struct SeriesQP {
  int n = 0;
  int d = 0;
  Poly<Clifford<S>> Q; // exp(-lambda_A)
  Poly<Exterior<S>> P; // exp(sigma_2(-lambda_A))
};

namespace detail {

inline int pair_slot(int i, int j, int n) {
  // index of (i,j), i<j, in lexicographic order
  int s = 0;
  for (int a = 0; a < i; ++a) s += n - a - 1;
  return s + (j - i - 1);
}

template <class C, class S>
Poly<C> poly_exp(const Poly<C>& L, int n, int d, const C& one) {
  Poly<C> result{{MultiIndex(L.empty() ? 0 : L.begin()->first.size(), 0), one}};
  if (L.empty()) return result;
  const MultiIndex zero(L.begin()->first.size(), 0);
  Poly<C> power{{zero, one}};
  for (int k = 1; k <= d; ++k) {
    power = poly_mul(power, L, d);
    if (power.empty()) break;
    Poly<C> scaled;
    for (const auto& [m, c] : power) scaled.emplace(m, c * ring<S>::from_fraction(1, k));
    power = std::move(scaled);
    for (const auto& [m, c] : power) {
      auto it = result.find(m);
      if (it == result.end())
        result.emplace(m, c);
      else {
        it->second += c;
        if (it->second.is_zero()) result.erase(it);
      }
    }
  }
  return result;
}

} // namespace detail

// Series of Q(A) = exp(-lambda_A) and P(A) = exp(sigma_2(-lambda_A)) through
// total degree d in the A_{ij}.
template <class S>
SeriesQP<S> qp_series(int n, int d) {
  if (d > 2 * n) d = 2 * n;
  const int N = n * (n - 1) / 2;
  Poly<Clifford<S>> LQ;
  Poly<Exterior<S>> LP;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      MultiIndex unit(N, 0);
      unit[detail::pair_slot(i, j, n)] = 1;
      Clifford<S> q(n);
      const S half = ring<S>::from_fraction(1, 2);
      q.add(Mono{(1u << i) | (1u << j), 0}, half);
      q.add(Mono{0, (1u << i) | (1u << j)}, -half);
      LQ.emplace(unit, q);
      Exterior<S> p(n);
      p.add(Mono{(1u << i) | (1u << j), 0}, half);
      p.add(Mono{0, (1u << i) | (1u << j)}, -half);
      LP.emplace(unit, p);
    }
  SeriesQP<S> s;
  s.n = n;
  s.d = d;
  s.Q = detail::poly_exp<Clifford<S>, S>(LQ, n, d, Clifford<S>(n, ring<S>::one()));
  s.P = detail::poly_exp<Exterior<S>, S>(LP, n, d, Exterior<S>(n, ring<S>::one()));
  return s;
}

// sum_{alpha even} P_alpha alpha!/(alpha/2)! A^alpha
//   = exp(-1/2 sum_{i<j} A_{ij}^2 e_i e_j ehat_i ehat_j),
// compared coefficient by coefficient through total degree d.
template <class S>
bool moment_identity_check(int n, int d) {
  const auto s = qp_series<S>(n, d);
  const int N = n * (n - 1) / 2;
  Poly<Exterior<S>> lhs;
  for (const auto& [a, c] : s.P) {
    if (!mi_even(a)) continue;
    auto v = c * even_moment_ratio<S>(a);
    if (!v.is_zero()) lhs.emplace(a, std::move(v));
  }
  Poly<Exterior<S>> arg;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      MultiIndex sq(N, 0);
      sq[detail::pair_slot(i, j, n)] = 2;
      Exterior<S> f(n);
      f.add(Mono{(1u << i) | (1u << j), (1u << i) | (1u << j)}, -ring<S>::from_fraction(1, 2));
      arg.emplace(sq, f);
    }
  auto rhs = detail::poly_exp<Exterior<S>, S>(arg, n, std::min(d, 2 * n), Exterior<S>(n, ring<S>::one()));
  if (n < 2) rhs = Poly<Exterior<S>>{{MultiIndex(0, 0), Exterior<S>(n, ring<S>::one())}};
  // compare through degree d
  for (const auto& [a, c] : lhs)
    if (mi_total(a) <= d) {
      auto it = rhs.find(a);
      if (it == rhs.end() || !(it->second == c)) return false;
    }
  for (const auto& [a, c] : rhs)
    if (mi_total(a) <= d && lhs.find(a) == lhs.end()) return false;
  return true;
}

// phi(A) with values in C(V,-V) (x) End F: finite Taylor data at A = 0.
template <class S>
using CliffordPolyMap = Poly<FiberMat<Clifford<S>>>;

template <class S>
void require_filtration_bound(const CliffordPolyMap<S>& phi, int bound) {
  for (const auto& [a, mat] : phi)
    for (int i = 0; i < mat.rank(); ++i)
      for (int j = 0; j < mat.rank(); ++j)
        if (mat.at(i, j).filtration_degree() > bound)
          throw std::invalid_argument("filtration bound violated");
}

// Supertrace extended by the ordinary fiber trace.
template <class S>
S str_fiber(const FiberMat<Clifford<S>>& m) {
  S acc = ring<S>::zero();
  for (int i = 0; i < m.rank(); ++i) acc += supertrace(m.at(i, i));
  return acc;
}

// T(exp(-1/2 sum_{i<j} e_i^e_j^ehat_i^ehat_j) (sigma_{4i} phi)(0)), the trace
// extended over End F.
template <class S>
S asymp4_rhs(const CliffordPolyMap<S>& phi, int i, int n) {
  require_filtration_bound(phi, 4 * i);
  Exterior<S> arg(n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      arg.add(Mono{(1u << a) | (1u << b), (1u << a) | (1u << b)}, -ring<S>::from_fraction(1, 2));
  const auto E = exterior_exp(arg);
  const MultiIndex zero = phi.empty() ? MultiIndex{} : MultiIndex(phi.begin()->first.size(), 0);
  auto it = phi.find(zero);
  if (it == phi.end()) return ring<S>::zero();
  S acc = ring<S>::zero();
  for (int r = 0; r < it->second.rank(); ++r)
    acc += berezin_trace(E * symbol_k(it->second.at(r, r), 4 * i));
  return acc;
}

// Brute-force left-hand side: exact Taylor series of A -> Str[phi(A) Q(A)]
// fed into the Gaussian limit, with the normalization split
// (4 pi t)^{-dim Q/2} t^i = (4 pi)^{-n/2} (4 pi t)^{-N/2} t^{i - n/2}.
template <class S>
S asymp4_lhs_oracle(const CliffordPolyMap<S>& phi, int i, int n) {
  require_filtration_bound(phi, 4 * i);
  const int k = n - 2 * i; // target |alpha|
  const auto qp = qp_series<S>(n, std::max(k, 0));
  Poly<S> taylor;
  for (const auto& [a, mat] : phi) {
    if (mi_total(a) > std::max(k, 0)) continue;
    for (const auto& [b, q] : qp.Q) {
      if (mi_total(a) + mi_total(b) > std::max(k, 0)) continue;
      S val = ring<S>::zero();
      for (int r = 0; r < mat.rank(); ++r) val += supertrace(mat.at(r, r) * q);
      if (ring<S>::is_zero(val)) continue;
      const auto key = mi_add(a, b);
      auto it = taylor.find(key);
      if (it == taylor.end())
        taylor.emplace(key, val);
      else {
        it->second += val;
        if (ring<S>::is_zero(it->second)) taylor.erase(it);
      }
    }
  }
  const S norm = ring<S>::pi_half_pow(-n) * ring<S>::from_fraction(1, 1ll << n);
  if (k < 0) {
    // positive powers of t only; the limit is 0 unless a lower-order term survives
    for (const auto& [a, c] : taylor)
      if (mi_even(a) && !ring<S>::is_zero(c)) throw DivergentLimit{};
    return ring<S>::zero();
  }
  return norm * gaussian_limit_degree(taylor, k);
}

// Termwise limit of a formal power series Phi(t,A) = sum_l t^l Phi_l(A) with
// filtration bounds 4l.
template <class S>
S power_series_limit(const std::vector<CliffordPolyMap<S>>& Phi, int n) {
  S acc = ring<S>::zero();
  for (std::size_t l = 0; l < Phi.size(); ++l) acc += asymp4_rhs(Phi[l], int(l), n);
  return acc;
}

template <class S>
S power_series_limit_oracle(const std::vector<CliffordPolyMap<S>>& Phi, int n) {
  S acc = ring<S>::zero();
  for (std::size_t l = 0; l < Phi.size(); ++l) acc += asymp4_lhs_oracle(Phi[l], int(l), n);
  return acc;
}

// Restrict an exterior element supported on indices < n0 to the algebra over
// the first n0 generators.
template <class S>
Exterior<S> compress_head(const Exterior<S>& x, int n0) {
  const std::uint32_t keep = (n0 == 32) ? ~0u : ((1u << n0) - 1);
  Exterior<S> r(n0);
  for (const auto& [m, c] : x.terms()) {
    if ((m.e & ~keep) || (m.h & ~keep))
      throw std::invalid_argument("element not supported on the head indices");
    r.add(m, c);
  }
  return r;
}

// Split limit: Str_1(a_1) * T_0(exp{-1/4 sum_{i,j<=n0} e^e^ehat^ehat}
//                               * sum_l (sigma0_{4l} Phi_l)(0)),
// with a_1 supported on the normal indices > n0.
template <class S>
S split_limit(const Clifford<S>& a1, const std::vector<CliffordPolyMap<S>>& Phi, int n0) {
  const int n = a1.dim();
  const auto a1c = compress_tail(a1, n0);
  const S pref = supertrace(a1c);
  if (ring<S>::is_zero(pref)) return ring<S>::zero();

  Exterior<S> arg(n0);
  // -1/4 sum over all (i,j) equals -1/2 sum over i<j (diagonal terms vanish)
  for (int a = 0; a < n0; ++a)
    for (int b = a + 1; b < n0; ++b)
      arg.add(Mono{(1u << a) | (1u << b), (1u << a) | (1u << b)}, -ring<S>::from_fraction(1, 2));
  const auto E0 = exterior_exp(arg);

  S acc = ring<S>::zero();
  for (std::size_t l = 0; l < Phi.size(); ++l) {
    require_filtration_bound(Phi[l], 4 * int(l));
    if (Phi[l].empty()) continue;
    const MultiIndex zero(Phi[l].begin()->first.size(), 0);
    auto it = Phi[l].find(zero);
    if (it == Phi[l].end()) continue;
    for (int r = 0; r < it->second.rank(); ++r) {
      const auto s0 = compress_head(sigma0_projection(it->second.at(r, r), 4 * int(l), n0), n0);
      acc += berezin_trace(E0 * s0);
    }
  }
  return pref * acc;
}

} // namespace anomaly
