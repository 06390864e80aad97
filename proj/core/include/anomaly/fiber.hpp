#pragma once

#include <stdexcept>
#include <vector>

#include "anomaly/multivector.hpp"

namespace anomaly {

// Square matrix over an algebra A (Clifford or Exterior): the concrete form
// of C(V,-V) (x) End F and Lambda(V+V) (x) End F. Entry products use A's own
// multiplication (Clifford product or wedge).
template <class A>
class FiberMat {
public:
  FiberMat() = default;
  FiberMat(int rank, int n) : rank_(rank), n_(n), m_(std::size_t(rank) * rank, A(n)) {}

  static FiberMat identity(int rank, int n, const A& one) {
    FiberMat f(rank, n);
    for (int i = 0; i < rank; ++i) f.at(i, i) = one;
    return f;
  }

  int rank() const { return rank_; }
  int dim() const { return n_; }

  A& at(int i, int j) { return m_[std::size_t(i) * rank_ + j]; }
  const A& at(int i, int j) const { return m_[std::size_t(i) * rank_ + j]; }

  bool is_zero() const {
    for (const auto& v : m_)
      if (!v.is_zero()) return false;
    return true;
  }

  FiberMat& operator+=(const FiberMat& o) {
    check(o);
    for (std::size_t i = 0; i < m_.size(); ++i) m_[i] += o.m_[i];
    return *this;
  }
  FiberMat& operator-=(const FiberMat& o) {
    check(o);
    for (std::size_t i = 0; i < m_.size(); ++i) m_[i] -= o.m_[i];
    return *this;
  }
  friend FiberMat operator+(FiberMat a, const FiberMat& b) { return a += b; }
  friend FiberMat operator-(FiberMat a, const FiberMat& b) { return a -= b; }
  FiberMat operator-() const {
    FiberMat r(rank_, n_);
    for (std::size_t i = 0; i < m_.size(); ++i) r.m_[i] = -m_[i];
    return r;
  }

  friend FiberMat operator*(const FiberMat& a, const FiberMat& b) {
    a.check(b);
    FiberMat r(a.rank_, a.n_);
    for (int i = 0; i < a.rank_; ++i)
      for (int k = 0; k < a.rank_; ++k) {
        if (a.at(i, k).is_zero()) continue;
        for (int j = 0; j < a.rank_; ++j) {
          if (b.at(k, j).is_zero()) continue;
          r.at(i, j) += a.at(i, k) * b.at(k, j);
        }
      }
    return r;
  }

  // Scale every entry by an algebra element (central usage only).
  friend FiberMat operator*(const A& s, const FiberMat& a) {
    FiberMat r(a.rank_, a.n_);
    for (std::size_t i = 0; i < a.m_.size(); ++i) r.m_[i] = s * a.m_[i];
    return r;
  }

  template <class S>
  FiberMat scaled(const S& s) const {
    FiberMat r(rank_, n_);
    for (std::size_t i = 0; i < m_.size(); ++i) r.m_[i] = m_[i] * s;
    return r;
  }

  A trace() const {
    A t(n_);
    for (int i = 0; i < rank_; ++i) t += at(i, i);
    return t;
  }

  bool operator==(const FiberMat& o) const {
    return rank_ == o.rank_ && n_ == o.n_ && m_ == o.m_;
  }

private:
  void check(const FiberMat& o) const {
    if (rank_ != o.rank_ || n_ != o.n_) throw std::invalid_argument("shape mismatch");
  }

  int rank_ = 0;
  int n_ = 0;
  std::vector<A> m_;
};

} // namespace anomaly
