#include "anomaly/local_index.hpp"

#include <bit>
#include <cmath>

#include "anomaly/asymptotics.hpp"
#include "anomaly/fock.hpp"

namespace anomaly {

void FixedPointData::validate(double tol) const {
  if (n0 < 0 || n1 < 0 || fiber < 1) throw std::invalid_argument("invalid dimensions");
  if (Rgamma.size() != std::size_t(n0) * n0 * n0 * n0)
    throw std::invalid_argument("Rgamma has wrong size");
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n0; ++j)
      for (int k = 0; k < n0; ++k)
        for (int l = 0; l < n0; ++l) {
          const double v = Rg(i, j, k, l);
          if (std::abs(v + Rg(j, i, k, l)) > tol || std::abs(v + Rg(i, j, l, k)) > tol ||
              std::abs(v - Rg(k, l, i, j)) > tol)
            throw std::invalid_argument("Rgamma violates the curvature symmetries");
          if (std::abs(Rg(i, j, k, l) + Rg(j, k, i, l) + Rg(k, i, j, l)) > tol)
            throw std::invalid_argument("Rgamma violates the first Bianchi identity");
        }
  if (n1 > 0) {
    if (gammaTilde1.rows() != n1 || gammaTilde1.cols() != n1)
      throw std::invalid_argument("gammaTilde1 has wrong size");
    const Eigen::MatrixXd g = gammaTilde1.transpose() * gammaTilde1;
    if ((g - Eigen::MatrixXd::Identity(n1, n1)).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("gammaTilde1 must be orthogonal");
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(gammaTilde1).eigenvalues();
    for (int i = 0; i < n1; ++i)
      if (std::abs(ev(i) - std::complex<double>(1.0, 0.0)) < tol) throw FixedPointDegeneracy{};
  }
  if (gammaF.rows() != fiber || gammaF.cols() != fiber || V.rows() != fiber || V.cols() != fiber)
    throw std::invalid_argument("fiber endomorphism shape");
  if (n0 > 0) {
    if (gdot.rows() != n0 || gdot.cols() != n0 ||
        (gdot - gdot.transpose()).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("gdot must be a symmetric n0 x n0 matrix");
    if (int(domega.size()) != n0) throw std::invalid_argument("domega has wrong size");
    for (const auto& row : domega) {
      if (int(row.size()) != n0) throw std::invalid_argument("domega has wrong size");
      for (const auto& w : row)
        if (w.rows() != fiber || w.cols() != fiber)
          throw std::invalid_argument("domega entry shape");
    }
  }
}

std::pair<double, double> det_cancellation(const Eigen::MatrixXd& gt) {
  const int n1 = int(gt.rows());
  if (gt.cols() != n1) throw std::invalid_argument("gt must be square");
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(gt).eigenvalues();
  for (int i = 0; i < n1; ++i)
    if (std::abs(ev(i) - std::complex<double>(1.0, 0.0)) < 1e-9) throw FixedPointDegeneracy{};
  const Eigen::MatrixXd L = exterior_power_matrix(gt);
  double str = 0.0;
  for (std::uint32_t x = 0; x < (1u << n1); ++x)
    str += (std::popcount(x) % 2 == 0 ? 1.0 : -1.0) * L(x, x);
  const double det = (Eigen::MatrixXd::Identity(n1, n1) - gt).determinant();
  return {str, det};
}

Clifford<double> lambda_gamma_clifford(const Eigen::MatrixXd& gt, int n0) {
  const int n1 = int(gt.rows());
  const auto tail = clifford_from_fock(exterior_power_matrix(gt), n1);
  Clifford<double> out(n0 + n1);
  for (const auto& [m, c] : tail.terms()) out.add(Mono{m.e << n0, m.h << n0}, c);
  return out;
}

namespace {

Exterior<double> curvature_argument(const FixedPointData& d) {
  Exterior<double> arg(d.n0);
  for (int i = 0; i < d.n0; ++i)
    for (int j = 0; j < d.n0; ++j)
      for (int k = 0; k < d.n0; ++k)
        for (int l = 0; l < d.n0; ++l) {
          const double v = d.Rg(i, j, k, l);
          if (v == 0.0) continue;
          arg += Exterior<double>::e(d.n0, i) * Exterior<double>::e(d.n0, j) *
                 Exterior<double>::ehat(d.n0, k) * Exterior<double>::ehat(d.n0, l) * (v / 8.0);
        }
  return arg;
}

} // namespace

double integrand_I(const FixedPointData& d) {
  d.validate();
  const double tr = (d.gammaF * d.V).trace();
  if (d.n0 == 0) return tr;
  return tr * berezin_trace(exterior_exp(curvature_argument(d)));
}

double integrand_I_sigma(const FixedPointData& d) {
  d.validate();
  if (d.n0 == 0) return 0.0;
  Exterior<double> a(d.n0), b(d.n0);
  for (int i = 0; i < d.n0; ++i)
    for (int j = 0; j < d.n0; ++j) {
      const auto unit = Exterior<double>::e(d.n0, i) * Exterior<double>::ehat(d.n0, j);
      a += unit * (0.5 * d.gdot(i, j));
      b += unit * (0.5 * (d.gammaF * d.domega[i][j]).trace());
    }
  return -berezin_trace(a * exterior_exp(curvature_argument(d)) * b);
}

double rhs_variation_hF(const std::vector<FixedPointData>& samples,
                        const std::vector<double>& weights) {
  if (samples.size() != weights.size()) throw std::invalid_argument("sample/weight mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) acc += weights[i] * integrand_I(samples[i]);
  return acc;
}

double rhs_variation_gTM(const std::vector<ThetaSample>& samples,
                         const std::vector<double>& weights) {
  if (samples.size() != weights.size()) throw std::invalid_argument("sample/weight mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto prod = samples[i].theta * samples[i].eprime;
    const int n0 = prod.dim();
    const std::uint32_t full = (n0 == 32) ? ~0u : ((1u << n0) - 1);
    acc += weights[i] * prod.coeff(Mono{full, 0});
  }
  return -acc;
}

std::pair<double, double> pipeline_consistency(const FixedPointData& d) {
  d.validate();
  const int n = d.n0 + d.n1;

  // a_1: the exterior-power operator of the normal rotation, or 1 when the
  // normal space is trivial
  Clifford<double> a1 = (d.n1 > 0) ? lambda_gamma_clifford(d.gammaTilde1, d.n0)
                                   : Clifford<double>(n, 1.0);

  // the closed-form symbol series at A = 0:
  //   exp{1/4 sum e^e^ehat^ehat} ^ exp{1/8 sum R e^e^ehat^ehat},
  // scaled by det(1 - gt)^{-1} = det Q_1(0)^{-1/2} and by V gammaF
  Exterior<double> quarter(d.n0);
  for (int i = 0; i < d.n0; ++i)
    for (int j = i + 1; j < d.n0; ++j)
      quarter.add(Mono{(1u << i) | (1u << j), (1u << i) | (1u << j)}, 0.5);
  const auto series = exterior_exp(quarter) * exterior_exp(curvature_argument(d));

  double detQ = 1.0;
  if (d.n1 > 0)
    detQ = (Eigen::MatrixXd::Identity(d.n1, d.n1) - d.gammaTilde1).determinant();
  const Eigen::MatrixXd endf = (d.V * d.gammaF) / detQ;

  const int N = n * (n - 1) / 2;
  std::vector<CliffordPolyMap<double>> Phi;
  for (int l = 0; 2 * l <= d.n0; ++l) {
    Exterior<double> part(n);
    const auto graded = series.degree_part(4 * l);
    for (const auto& [m, c] : graded.terms()) part.add(m, c);
    FiberMat<Clifford<double>> mat(d.fiber, n);
    const auto cliff = quantize(part);
    for (int r = 0; r < d.fiber; ++r)
      for (int s = 0; s < d.fiber; ++s)
        if (endf(r, s) != 0.0) mat.at(r, s) = cliff * endf(r, s);
    CliffordPolyMap<double> p;
    p.emplace(MultiIndex(N, 0), std::move(mat));
    Phi.push_back(std::move(p));
  }

  return {split_limit(a1, Phi, d.n0), integrand_I(d)};
}

} // namespace anomaly
