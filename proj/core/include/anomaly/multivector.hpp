#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "anomaly/scalar.hpp"

namespace anomaly {

// Monomial index: subset of {e_1..e_n} and subset of {ehat_1..ehat_n},
// written with indices strictly increasing in the order
// e_1 < ... < e_n < ehat_1 < ... < ehat_n.
struct Mono {
  std::uint32_t e = 0;
  std::uint32_t h = 0;
  auto operator<=>(const Mono&) const = default;
  int degree() const { return std::popcount(e) + std::popcount(h); }
};

namespace detail {

// Parity of the number of pairs (i in a, j in b) with i > j, i.e. the
// transpositions needed to merge two increasing generator words.
inline int merge_sign(std::uint64_t a, std::uint64_t b) {
  int swaps = 0;
  for (std::uint64_t t = a >> 1; t != 0; t >>= 1)
    swaps += std::popcount(t & b);
  return (swaps & 1) ? -1 : 1;
}

inline std::uint64_t pack(const Mono& m, int n) {
  return std::uint64_t(m.e) | (std::uint64_t(m.h) << n);
}

inline Mono unpack(std::uint64_t w, int n) {
  const std::uint64_t lo = (n == 64) ? ~0ull : ((1ull << n) - 1);
  return Mono{std::uint32_t(w & lo), std::uint32_t(w >> n)};
}

} // namespace detail

inline std::string mono_str(const Mono& m) {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < 32; ++i)
    if (m.e & (1u << i)) {
      if (!first) os << " ";
      first = false;
      os << "e" << (i + 1);
    }
  for (int i = 0; i < 32; ++i)
    if (m.h & (1u << i)) {
      if (!first) os << " ";
      first = false;
      os << "^e" << (i + 1);
    }
  if (first) os << "1";
  return os.str();
}

template <class S>
class Clifford;

// Element of the exterior algebra Lambda(V + V), sparse over monomials.
template <class S>
class Exterior {
public:
  Exterior() = default;
  explicit Exterior(int n) : n_(n) { check_dim(n); }
  Exterior(int n, const S& scalar) : n_(n) {
    check_dim(n);
    add(Mono{}, scalar);
  }

  static Exterior unit(int n, const Mono& m, const S& c) {
    Exterior r(n);
    r.add(m, c);
    return r;
  }
  static Exterior e(int n, int i) { return unit(n, Mono{1u << i, 0}, ring<S>::one()); }
  static Exterior ehat(int n, int i) { return unit(n, Mono{0, 1u << i}, ring<S>::one()); }

  int dim() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Mono, S>& terms() const { return terms_; }

  S coeff(const Mono& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? ring<S>::zero() : it->second;
  }
  S scalar_part() const { return coeff(Mono{}); }

  int top_degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  void add(const Mono& m, const S& c) {
    if (ring<S>::is_zero(c)) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_[m] = c;
    } else {
      it->second += c;
      if (ring<S>::is_zero(it->second)) terms_.erase(it);
    }
  }

  Exterior& operator+=(const Exterior& o) {
    adopt_dim(o);
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }
  Exterior& operator-=(const Exterior& o) {
    adopt_dim(o);
    for (const auto& [m, c] : o.terms_) add(m, -c);
    return *this;
  }
  friend Exterior operator+(Exterior a, const Exterior& b) { return a += b; }
  friend Exterior operator-(Exterior a, const Exterior& b) { return a -= b; }
  Exterior operator-() const {
    Exterior r(n_);
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
  }
  friend Exterior operator*(const Exterior& a, const S& s) {
    Exterior r(a.n_);
    for (const auto& [m, c] : a.terms_) r.add(m, c * s);
    return r;
  }
  friend Exterior operator*(const S& s, const Exterior& a) { return a * s; }

  // Wedge product.
  friend Exterior operator*(const Exterior& a, const Exterior& b) {
    const int n = a.match_dim(b);
    Exterior r(n);
    for (const auto& [ma, ca] : a.terms_) {
      const std::uint64_t wa = detail::pack(ma, n);
      for (const auto& [mb, cb] : b.terms_) {
        const std::uint64_t wb = detail::pack(mb, n);
        if (wa & wb) continue;
        const int sg = detail::merge_sign(wa, wb);
        S c = ca * cb;
        if (sg < 0) c = -c;
        r.add(detail::unpack(wa | wb, n), c);
      }
    }
    return r;
  }

  bool operator==(const Exterior& o) const {
    if (is_zero() && o.is_zero()) return true;
    return n_ == o.n_ && terms_ == o.terms_;
  }

  // Keep only monomials of total degree exactly k.
  Exterior degree_part(int k) const {
    Exterior r(n_);
    for (const auto& [m, c] : terms_)
      if (m.degree() == k) r.terms_[m] = c;
    return r;
  }

  Exterior even_part() const {
    Exterior r(n_);
    for (const auto& [m, c] : terms_)
      if (m.degree() % 2 == 0) r.terms_[m] = c;
    return r;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << "  +  ";
      first = false;
      if constexpr (std::is_same_v<S, Scalar>)
        os << "(" << c.str() << ") " << mono_str(m);
      else
        os << "(" << c << ") " << mono_str(m);
    }
    return os.str();
  }

private:
  friend class Clifford<S>;

  static void check_dim(int n) {
    if (n < 0 || n > 16) throw std::invalid_argument("dimension out of range");
  }
  void adopt_dim(const Exterior& o) {
    if (terms_.empty() && n_ == 0) n_ = o.n_;
    else if (!o.terms_.empty() || o.n_ != 0) {
      if (o.n_ != n_ && !(o.terms_.empty() && o.n_ == 0))
        throw std::invalid_argument("dimension mismatch");
    }
  }
  int match_dim(const Exterior& o) const {
    if (terms_.empty() && n_ == 0) return o.n_;
    if (o.terms_.empty() && o.n_ == 0) return n_;
    if (n_ != o.n_) throw std::invalid_argument("dimension mismatch");
    return n_;
  }

  int n_ = 0;
  std::map<Mono, S> terms_;
};

// Element of the Clifford algebra C(V,-V): relations v.w + w.v = -2q(v,w)
// with q = <,> on the e-copy and -<,> on the ehat-copy, so
// e_i^2 = -1, ehat_i^2 = +1, and distinct generators anticommute.
template <class S>
class Clifford {
public:
  Clifford() = default;
  explicit Clifford(int n) : n_(n) { Exterior<S>::check_dim(n); }
  Clifford(int n, const S& scalar) : n_(n) {
    Exterior<S>::check_dim(n);
    add(Mono{}, scalar);
  }

  static Clifford unit(int n, const Mono& m, const S& c) {
    Clifford r(n);
    r.add(m, c);
    return r;
  }
  static Clifford e(int n, int i) { return unit(n, Mono{1u << i, 0}, ring<S>::one()); }
  static Clifford ehat(int n, int i) { return unit(n, Mono{0, 1u << i}, ring<S>::one()); }

  // Volume element omega = pi^{n/2} (-1)^{n(n+1)/2} e_1...e_n ehat_1...ehat_n.
  static Clifford volume(int n) {
    const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);
    S c = ring<S>::pi_half_pow(n);
    if ((n * (n + 1) / 2) % 2 != 0) c = -c;
    return unit(n, Mono{full, full}, c);
  }

  int dim() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Mono, S>& terms() const { return terms_; }

  S coeff(const Mono& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? ring<S>::zero() : it->second;
  }
  S scalar_part() const { return coeff(Mono{}); }

  int filtration_degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  void add(const Mono& m, const S& c) {
    if (ring<S>::is_zero(c)) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_[m] = c;
    } else {
      it->second += c;
      if (ring<S>::is_zero(it->second)) terms_.erase(it);
    }
  }

  Clifford& operator+=(const Clifford& o) {
    adopt_dim(o);
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }
  Clifford& operator-=(const Clifford& o) {
    adopt_dim(o);
    for (const auto& [m, c] : o.terms_) add(m, -c);
    return *this;
  }
  friend Clifford operator+(Clifford a, const Clifford& b) { return a += b; }
  friend Clifford operator-(Clifford a, const Clifford& b) { return a -= b; }
  Clifford operator-() const {
    Clifford r(n_);
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
  }
  friend Clifford operator*(const Clifford& a, const S& s) {
    Clifford r(a.n_);
    for (const auto& [m, c] : a.terms_) r.add(m, c * s);
    return r;
  }
  friend Clifford operator*(const S& s, const Clifford& a) { return a * s; }

  friend Clifford operator*(const Clifford& a, const Clifford& b) {
    const int n = a.match_dim(b);
    Clifford r(n);
    for (const auto& [ma, ca] : a.terms_) {
      const std::uint64_t wa = detail::pack(ma, n);
      for (const auto& [mb, cb] : b.terms_) {
        const std::uint64_t wb = detail::pack(mb, n);
        int sg = detail::merge_sign(wa, wb);
        // Repeated generators square via the metric: e_i^2 = -1, ehat_i^2 = +1.
        if (std::popcount(ma.e & mb.e) & 1) sg = -sg;
        S c = ca * cb;
        if (sg < 0) c = -c;
        r.add(detail::unpack(wa ^ wb, n), c);
      }
    }
    return r;
  }

  bool operator==(const Clifford& o) const {
    if (is_zero() && o.is_zero()) return true;
    return n_ == o.n_ && terms_ == o.terms_;
  }

  Clifford even_part() const {
    Clifford r(n_);
    for (const auto& [m, c] : terms_)
      if (m.degree() % 2 == 0) r.terms_[m] = c;
    return r;
  }
  Clifford odd_part() const {
    Clifford r(n_);
    for (const auto& [m, c] : terms_)
      if (m.degree() % 2 != 0) r.terms_[m] = c;
    return r;
  }

  std::string str() const {
    Exterior<S> x(n_);
    for (const auto& [m, c] : terms_) x.add(m, c);
    return x.str();
  }

private:
  void adopt_dim(const Clifford& o) {
    if (terms_.empty() && n_ == 0) n_ = o.n_;
    else if (!(o.terms_.empty() && o.n_ == 0) && o.n_ != n_)
      throw std::invalid_argument("dimension mismatch");
  }
  int match_dim(const Clifford& o) const {
    if (terms_.empty() && n_ == 0) return o.n_;
    if (o.terms_.empty() && o.n_ == 0) return n_;
    if (n_ != o.n_) throw std::invalid_argument("dimension mismatch");
    return n_;
  }

  int n_ = 0;
  std::map<Mono, S> terms_;
};

// Symbol map: basis-wise identification of the canonical Clifford monomials
// with the same-index wedge monomials.
template <class S>
Exterior<S> symbol(const Clifford<S>& a) {
  Exterior<S> r(a.dim());
  for (const auto& [m, c] : a.terms()) r.add(m, c);
  return r;
}

template <class S>
Exterior<S> symbol_k(const Clifford<S>& a, int k) {
  if (k < 0 || k > 2 * a.dim()) throw std::invalid_argument("symbol degree out of range");
  Exterior<S> r(a.dim());
  for (const auto& [m, c] : a.terms())
    if (m.degree() == k) r.add(m, c);
  return r;
}

template <class S>
Clifford<S> quantize(const Exterior<S>& x) {
  Clifford<S> r(x.dim());
  for (const auto& [m, c] : x.terms()) r.add(m, c);
  return r;
}

// sigma_k followed by the projection onto Lambda(V_0 + V_0): drop every
// monomial containing an index > n0.
template <class S>
Exterior<S> sigma0_projection(const Clifford<S>& a, int k, int n0) {
  if (n0 < 0 || n0 > a.dim()) throw std::invalid_argument("invalid n0");
  const std::uint32_t keep = (n0 == 32) ? ~0u : ((1u << n0) - 1);
  Exterior<S> r(a.dim());
  for (const auto& [m, c] : a.terms()) {
    if (m.degree() != k) continue;
    if ((m.e & ~keep) || (m.h & ~keep)) continue;
    r.add(m, c);
  }
  return r;
}

// Restrict an element supported on indices >= n0 to the algebra over the
// trailing n1 = n - n0 generators (re-indexed from 0).
template <class S, template <class> class Alg>
Alg<S> compress_tail(const Alg<S>& a, int n0) {
  const int n1 = a.dim() - n0;
  Alg<S> r(n1);
  for (const auto& [m, c] : a.terms()) {
    const std::uint32_t keep = (n0 == 32) ? ~0u : ((1u << n0) - 1);
    if ((m.e & keep) || (m.h & keep))
      throw std::invalid_argument("element not supported on the tail indices");
    r.add(Mono{m.e >> n0, m.h >> n0}, c);
  }
  return r;
}

// Berezin trace: the coefficient of omega in x.
// omega = pi^{n/2} (-1)^{n(n+1)/2} e_1...e_n ehat_1...ehat_n, so the full
// monomial e_1...e_n ehat_1...ehat_n has T = pi^{-n/2} (-1)^{n(n+1)/2}.
template <class S>
S berezin_trace(const Exterior<S>& x) {
  const int n = x.dim();
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);
  S c = x.coeff(Mono{full, full});
  if (n == 0) return x.scalar_part();
  c = c * ring<S>::pi_half_pow(-n);
  if ((n * (n + 1) / 2) % 2 != 0) c = -c;
  return c;
}

// exp of an even-graded exterior element; finite by nilpotency. The scalar
// part must be handled by the ring (exact mode rejects nonzero values).
template <class S>
Exterior<S> exterior_exp(const Exterior<S>& x) {
  const int n = x.dim();
  for (const auto& [m, c] : x.terms())
    if (m.degree() % 2 != 0)
      throw std::invalid_argument("exterior_exp needs an even-graded argument");

  const S s0 = x.scalar_part();
  S pref = ring<S>::one();
  if (!ring<S>::is_zero(s0)) {
    if constexpr (std::is_same_v<S, Scalar>)
      throw std::domain_error("exact exterior_exp needs zero scalar part");
    else
      pref = std::exp(s0);
  }
  Exterior<S> nil = x;
  nil.add(Mono{}, -s0);

  Exterior<S> result(n, pref);
  Exterior<S> power(n, pref);
  for (int k = 1; k <= n; ++k) {
    power = power * nil;
    if (power.is_zero()) break;
    Exterior<S> term(n);
    for (const auto& [m, c] : power.terms()) term.add(m, c * ring<S>::from_fraction(1, k));
    power = term;
    result += power;
  }
  return result;
}

} // namespace anomaly
