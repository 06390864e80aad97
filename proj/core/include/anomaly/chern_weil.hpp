#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "anomaly/multivector.hpp"

namespace anomaly {

// Differential forms over a tangent model R^{n0} are exterior elements using
// only the e-copy generators; the ehat copy stays empty.
template <class S>
using Form = Exterior<S>;

// Matrix of forms, used as the argument of Pfaffians.
template <class S>
using FormMatrix = std::vector<std::vector<Form<S>>>;

// Even form plus a first-order dual parameter b (b^2 = 0). The b-part carries
// exactly one odd form factor, so the ring stays commutative.
template <class S>
struct DualForm {
  Form<S> val;
  Form<S> dval;

  DualForm() = default;
  DualForm(Form<S> v, Form<S> d) : val(std::move(v)), dval(std::move(d)) {}

  friend DualForm operator+(const DualForm& a, const DualForm& b) {
    return {a.val + b.val, a.dval + b.dval};
  }
  friend DualForm operator-(const DualForm& a, const DualForm& b) {
    return {a.val - b.val, a.dval - b.dval};
  }
  DualForm operator-() const { return {-val, -dval}; }
  friend DualForm operator*(const DualForm& a, const DualForm& b) {
    return {a.val * b.val, a.val * b.dval + a.dval * b.val};
  }
  bool operator==(const DualForm& o) const { return val == o.val && dval == o.dval; }
  bool is_zero() const { return val.is_zero() && dval.is_zero(); }
};

template <class R>
void require_skew(const std::vector<std::vector<R>>& M) {
  const std::size_t n = M.size();
  for (const auto& row : M)
    if (row.size() != n) throw std::invalid_argument("matrix is not square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (!(M[i][j] == -M[j][i])) throw std::invalid_argument("matrix is not antisymmetric");
}

namespace detail {

template <class R>
R pfaffian_rec(const std::vector<std::vector<R>>& M, std::vector<int>& idx, const R& one) {
  const std::size_t k = idx.size();
  if (k == 0) return one;
  // expand along the first remaining row
  R acc{};
  const int i0 = idx[0];
  for (std::size_t j = 1; j < k; ++j) {
    const R& mij = M[i0][idx[j]];
    if (mij == R{}) continue;
    std::vector<int> rest;
    rest.reserve(k - 2);
    for (std::size_t t = 1; t < k; ++t)
      if (t != j) rest.push_back(idx[t]);
    R sub = mij * pfaffian_rec(M, rest, one);
    if (j % 2 == 0) sub = -sub;
    acc = acc + sub;
  }
  return acc;
}

} // namespace detail

// Perfect-matching expansion; safe over rings with nilpotents (no division).
// Pf of the empty matrix is 1; odd dimension gives 0.
template <class R>
R pfaffian(const std::vector<std::vector<R>>& M, const R& one) {
  require_skew(M);
  if (M.size() % 2 != 0) return R{};
  std::vector<int> idx(M.size());
  for (std::size_t i = 0; i < M.size(); ++i) idx[i] = int(i);
  return detail::pfaffian_rec(M, idx, one);
}

inline Scalar pfaffian(const std::vector<std::vector<Scalar>>& M) {
  return pfaffian(M, Scalar(1));
}
inline double pfaffian_d(const std::vector<std::vector<double>>& M) {
  return pfaffian(M, 1.0);
}

// Euler form Pf[R / 2pi] for a skew matrix of curvature 2-forms.
template <class S>
Form<S> euler_form(const FormMatrix<S>& R, int n0) {
  if (int(R.size()) != n0) throw std::invalid_argument("size mismatch");
  const S inv2pi = ring<S>::pi_half_pow(-2) * ring<S>::from_fraction(1, 2);
  FormMatrix<S> scaled(n0, std::vector<Form<S>>(n0));
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n0; ++j) scaled[i][j] = R[i][j] * inv2pi;
  int dim = 0;
  for (const auto& row : R)
    for (const auto& f : row) dim = std::max(dim, f.dim());
  return pfaffian(scaled, Form<S>(dim, ring<S>::one()));
}

// Transgression form: the b-linear coefficient of Pf[(R + b Sdot) / 2pi].
template <class S>
Form<S> transgression_form(const FormMatrix<S>& R, const FormMatrix<S>& Sdot, int n0) {
  if (int(R.size()) != n0 || int(Sdot.size()) != n0)
    throw std::invalid_argument("size mismatch");
  const S inv2pi = ring<S>::pi_half_pow(-2) * ring<S>::from_fraction(1, 2);
  int dim = 0;
  for (const auto* mp : {&R, &Sdot})
    for (const auto& row : *mp)
      for (const auto& f : row) dim = std::max(dim, f.dim());
  std::vector<std::vector<DualForm<S>>> M(n0, std::vector<DualForm<S>>(n0));
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n0; ++j) M[i][j] = DualForm<S>{R[i][j] * inv2pi, Sdot[i][j] * inv2pi};
  const DualForm<S> one{Form<S>(dim, ring<S>::one()), Form<S>(dim)};
  return pfaffian(M, one).dval;
}

// Pointwise bundle-metric data over a local chart with flat trivialization.
struct BundleMetricPath {
  int rank = 1;
  int dirs = 1; // chart dimension
  struct Sample {
    Eigen::MatrixXcd h;               // positive hermitian
    std::vector<Eigen::MatrixXcd> dh; // partial derivative per direction
    Eigen::MatrixXcd hdot;            // epsilon-derivative, optional (0 size if absent)
  };
  std::vector<Sample> samples;

  void validate() const;
};

// omega(F,h)(x) = h(x)^{-1} dh(x), one matrix per direction per sample.
std::vector<std::vector<Eigen::MatrixXcd>> omega_flat_frame(const BundleMetricPath& h);

// V = h^{-1} hdot per sample.
std::vector<Eigen::MatrixXcd> metric_variation_V(const BundleMetricPath& h);

// theta(gamma,F,h) = Tr[gammaF omega], one value per direction per sample.
std::vector<std::vector<double>> theta_one_form(
    const Eigen::MatrixXcd& gammaF,
    const std::vector<std::vector<Eigen::MatrixXcd>>& omega);

} // namespace anomaly
