#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "anomaly/multivector.hpp"

namespace anomaly {

// Dense operator on Lambda V in the monomial basis (subsets of {0..n-1},
// ordered by their bitmask value), graded by form degree = popcount.
template <class S>
class FockOperator {
public:
  FockOperator() = default;
  explicit FockOperator(int n) : n_(n), dim_(1u << n), m_(std::size_t(dim_) * dim_, ring<S>::zero()) {}

  static FockOperator identity(int n) {
    FockOperator f(n);
    for (std::uint32_t x = 0; x < f.dim_; ++x) f.at(x, x) = ring<S>::one();
    return f;
  }

  int n() const { return n_; }
  std::uint32_t dim() const { return dim_; }

  S& at(std::uint32_t row, std::uint32_t col) { return m_[std::size_t(row) * dim_ + col]; }
  const S& at(std::uint32_t row, std::uint32_t col) const { return m_[std::size_t(row) * dim_ + col]; }

  FockOperator& operator+=(const FockOperator& o) {
    check(o);
    for (std::size_t i = 0; i < m_.size(); ++i) m_[i] += o.m_[i];
    return *this;
  }
  FockOperator& operator-=(const FockOperator& o) {
    check(o);
    for (std::size_t i = 0; i < m_.size(); ++i) m_[i] -= o.m_[i];
    return *this;
  }
  friend FockOperator operator+(FockOperator a, const FockOperator& b) { return a += b; }
  friend FockOperator operator-(FockOperator a, const FockOperator& b) { return a -= b; }
  friend FockOperator operator*(const FockOperator& a, const S& s) {
    FockOperator r = a;
    for (auto& v : r.m_) v = v * s;
    return r;
  }
  friend FockOperator operator*(const FockOperator& a, const FockOperator& b) {
    a.check(b);
    FockOperator r(a.n_);
    for (std::uint32_t i = 0; i < a.dim_; ++i)
      for (std::uint32_t k = 0; k < a.dim_; ++k) {
        const S& aik = a.at(i, k);
        if (ring<S>::is_zero(aik)) continue;
        for (std::uint32_t j = 0; j < a.dim_; ++j) {
          const S& bkj = b.at(k, j);
          if (ring<S>::is_zero(bkj)) continue;
          r.at(i, j) += aik * bkj;
        }
      }
    return r;
  }

  bool operator==(const FockOperator& o) const { return n_ == o.n_ && m_ == o.m_; }

  // Trace weighted by (-1)^{form degree}.
  S supertrace() const {
    S t = ring<S>::zero();
    for (std::uint32_t x = 0; x < dim_; ++x) {
      if (std::popcount(x) & 1)
        t -= at(x, x);
      else
        t += at(x, x);
    }
    return t;
  }

  Eigen::MatrixXd to_eigen() const {
    Eigen::MatrixXd r(dim_, dim_);
    for (std::uint32_t i = 0; i < dim_; ++i)
      for (std::uint32_t j = 0; j < dim_; ++j) r(i, j) = ring<S>::to_double(at(i, j));
    return r;
  }

private:
  void check(const FockOperator& o) const {
    if (n_ != o.n_) throw std::invalid_argument("dimension mismatch");
  }

  int n_ = 0;
  std::uint32_t dim_ = 1;
  std::vector<S> m_;
};

namespace detail {

// Sign of moving e_i past the generators of X with smaller index.
inline int pos_sign(std::uint32_t x, int i) {
  return (std::popcount(x & ((1u << i) - 1)) & 1) ? -1 : 1;
}

// c(e_i) = eps(e_i) - iota(e_i): basis element X -> +/- (X xor {i}).
inline std::pair<std::uint32_t, int> apply_c(std::uint32_t x, int i) {
  const int s = pos_sign(x, i);
  if (x & (1u << i)) return {x ^ (1u << i), -s};
  return {x ^ (1u << i), s};
}

// chat(e_i) = eps(e_i) + iota(e_i).
inline std::pair<std::uint32_t, int> apply_chat(std::uint32_t x, int i) {
  const int s = pos_sign(x, i);
  return {x ^ (1u << i), s};
}

} // namespace detail

template <class S>
FockOperator<S> fock_rep(const Clifford<S>& a) {
  const int n = a.dim();
  FockOperator<S> f(n);
  for (const auto& [m, c] : a.terms()) {
    for (std::uint32_t x = 0; x < f.dim(); ++x) {
      std::uint32_t y = x;
      int sign = 1;
      // Apply the word e_{i1}..e_{ik} ehat_{j1}..ehat_{jl} right to left.
      for (int j = n - 1; j >= 0; --j)
        if (m.h & (1u << j)) {
          auto [ny, s] = detail::apply_chat(y, j);
          y = ny;
          sign *= s;
        }
      for (int i = n - 1; i >= 0; --i)
        if (m.e & (1u << i)) {
          auto [ny, s] = detail::apply_c(y, i);
          y = ny;
          sign *= s;
        }
      S v = c;
      if (sign < 0) v = -v;
      f.at(y, x) += v;
    }
  }
  return f;
}

// Supertrace via the Fock representation (algorithm A).
template <class S>
S supertrace_fock(const Clifford<S>& a) {
  return fock_rep(a).supertrace();
}

// Supertrace via (4 pi)^{n/2} * Berezin trace of the symbol (algorithm B).
template <class S>
S supertrace_berezin(const Clifford<S>& a) {
  const int n = a.dim();
  S norm = ring<S>::from_int(1ll << n) * ring<S>::pi_half_pow(n);
  return norm * berezin_trace(symbol(a));
}

template <class S>
S supertrace(const Clifford<S>& a) {
  return supertrace_berezin(a);
}

// Derivation action of A in so(n) on Lambda V (the representation lambda).
template <class S, class Mat>
FockOperator<S> so_derivation(const Mat& A, int n) {
  FockOperator<S> L(n);
  for (std::uint32_t x = 0; x < L.dim(); ++x) {
    for (int i = 0; i < n; ++i) {
      if (!(x & (1u << i))) continue;
      const std::uint32_t rest = x & ~(1u << i);
      const int p = std::popcount(rest & ((1u << i) - 1));
      for (int j = 0; j < n; ++j) {
        if (rest & (1u << j)) continue;
        const S aji = [&] {
          if constexpr (std::is_same_v<S, Scalar>)
            return A[j][i];
          else
            return S(A(j, i));
        }();
        if (ring<S>::is_zero(aji)) continue;
        const int q = std::popcount(rest & ((1u << j) - 1));
        S v = aji;
        if ((p + q) & 1) v = -v;
        L.at(rest | (1u << j), x) += v;
      }
    }
  }
  return L;
}

// The Clifford element -lambda_A = 1/2 sum_{i<j} A_{ij} (c_i c_j - chat_i chat_j).
template <class S, class Mat>
Clifford<S> minus_lambda_element(const Mat& A, int n) {
  Clifford<S> r(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const S aij = [&] {
        if constexpr (std::is_same_v<S, Scalar>)
          return A[i][j];
        else
          return S(A(i, j));
      }();
      if (ring<S>::is_zero(aij)) continue;
      const S half = aij * ring<S>::from_fraction(1, 2);
      r.add(Mono{(1u << i) | (1u << j), 0}, half);
      r.add(Mono{0, (1u << i) | (1u << j)}, -half);
    }
  return r;
}

// Exterior power of a linear map: (Lambda Q)[Y,X] = det Q[Y,X] over equal-size
// index subsets. Used for Lambda(gamma tilde) and rotation oracles.
inline Eigen::MatrixXd exterior_power_matrix(const Eigen::MatrixXd& Q) {
  const int n = int(Q.rows());
  const std::uint32_t dim = 1u << n;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(dim, dim);
  for (std::uint32_t x = 0; x < dim; ++x) {
    for (std::uint32_t y = 0; y < dim; ++y) {
      if (std::popcount(x) != std::popcount(y)) continue;
      const int k = std::popcount(x);
      if (k == 0) {
        L(y, x) = 1.0;
        continue;
      }
      Eigen::MatrixXd minor(k, k);
      int col = 0;
      for (int j = 0; j < n; ++j) {
        if (!(x & (1u << j))) continue;
        int row = 0;
        for (int i = 0; i < n; ++i) {
          if (!(y & (1u << i))) continue;
          minor(row, col) = Q(i, j);
          ++row;
        }
        ++col;
      }
      L(y, x) = minor.determinant();
    }
  }
  return L;
}

// Reconstruct the Clifford element whose Fock representation is M. The 4^n
// monomial representation matrices form a basis of End(Lambda V); solve the
// resulting linear system.
inline Clifford<double> clifford_from_fock(const Eigen::MatrixXd& M, int n) {
  const std::uint32_t d = 1u << n;
  if (M.rows() != d || M.cols() != d) throw std::invalid_argument("size mismatch");
  const std::uint32_t nmono = 1u << (2 * n);
  Eigen::MatrixXd B(d * d, nmono);
  for (std::uint32_t idx = 0; idx < nmono; ++idx) {
    const Mono m{idx & (d - 1), idx >> n};
    const auto F = fock_rep(Clifford<double>::unit(n, m, 1.0)).to_eigen();
    B.col(idx) = Eigen::Map<const Eigen::VectorXd>(F.data(), d * d);
  }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(M.data(), d * d);
  const Eigen::VectorXd x = B.fullPivLu().solve(rhs);
  Clifford<double> r(n);
  for (std::uint32_t idx = 0; idx < nmono; ++idx) {
    const double c = x(idx);
    if (std::abs(c) > 1e-12) r.add(Mono{idx & (d - 1), idx >> n}, c);
  }
  return r;
}

inline void require_antisymmetric(const Eigen::MatrixXd& A, double tol = 1e-12) {
  if ((A + A.transpose()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("matrix is not antisymmetric");
}

// exp(-lambda_A) as a Clifford element, float mode: exponentiate the Fock
// image of -lambda_A and pull the result back along the monomial basis.
inline Clifford<double> lambda_exp(const Eigen::MatrixXd& A) {
  require_antisymmetric(A);
  const int n = int(A.rows());
  const auto gen = fock_rep(minus_lambda_element<double>(A, n)).to_eigen();
  return clifford_from_fock(gen.exp(), n);
}

// Exact mode: truncated series in the algebra; stops when a term vanishes or
// after 4n terms, then verifies group-likeness exactly.
inline Clifford<Scalar> lambda_exp_exact(const std::vector<std::vector<Scalar>>& A, int n) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(A[i][j] + A[j][i]).is_zero())
        throw std::invalid_argument("matrix is not antisymmetric");
  const Clifford<Scalar> g = minus_lambda_element<Scalar>(A, n);
  Clifford<Scalar> result(n, Scalar(1));
  Clifford<Scalar> term(n, Scalar(1));
  for (int k = 1; k <= 4 * n; ++k) {
    term = term * g;
    if (term.is_zero()) break;
    Clifford<Scalar> scaled(n);
    for (const auto& [m, c] : term.terms()) scaled.add(m, c * Scalar(Rational(1, k)));
    term = scaled;
    result += term;
  }
  std::vector<std::vector<Scalar>> negA(n, std::vector<Scalar>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) negA[i][j] = -A[i][j];
  Clifford<Scalar> inv(n, Scalar(1));
  Clifford<Scalar> t2(n, Scalar(1));
  const Clifford<Scalar> g2 = minus_lambda_element<Scalar>(negA, n);
  for (int k = 1; k <= 4 * n; ++k) {
    t2 = t2 * g2;
    if (t2.is_zero()) break;
    Clifford<Scalar> scaled(n);
    for (const auto& [m, c] : t2.terms()) scaled.add(m, c * Scalar(Rational(1, k)));
    t2 = scaled;
    inv += t2;
  }
  if (!(result * inv == Clifford<Scalar>(n, Scalar(1))))
    throw std::domain_error("truncated exact series is not group-like");
  return result;
}

} // namespace anomaly
