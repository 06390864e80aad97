#include "anomaly/transport.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>

namespace anomaly {

void PointGeometry::validate(double tol) const {
  if (n < 1 || fiber < 1) throw std::invalid_argument("invalid dimensions");
  if (R.size() != std::size_t(n) * n * n * n) throw std::invalid_argument("R has wrong size");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = Rt(i, j, k, l);
          if (std::abs(v + Rt(j, i, k, l)) > tol || std::abs(v + Rt(i, j, l, k)) > tol ||
              std::abs(v - Rt(k, l, i, j)) > tol)
            throw std::invalid_argument("R violates the curvature symmetries");
          if (std::abs(Rt(i, j, k, l) + Rt(j, k, i, l) + Rt(k, i, j, l)) > tol)
            throw std::invalid_argument("R violates the first Bianchi identity");
        }
  if (int(omega.size()) != n) throw std::invalid_argument("omega has wrong size");
  for (const auto& w : omega)
    if (w.rows() != fiber || w.cols() != fiber) throw std::invalid_argument("omega entry shape");
  if (int(domega.size()) != n) throw std::invalid_argument("domega has wrong size");
  for (const auto& row : domega) {
    if (int(row.size()) != n) throw std::invalid_argument("domega has wrong size");
    for (const auto& w : row)
      if (w.rows() != fiber || w.cols() != fiber) throw std::invalid_argument("domega entry shape");
  }
  if (gdot.rows() != n || gdot.cols() != n || (gdot - gdot.transpose()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("gdot must be a symmetric n x n matrix");
}

std::pair<FockOperator<Scalar>, FockOperator<Scalar>> casimir_two_ways(int n) {
  FockOperator<Scalar> left(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      // E_{ij}: e_i -> -e_j, e_j -> e_i
      std::vector<std::vector<Scalar>> A(n, std::vector<Scalar>(n, Scalar(0)));
      A[j][i] = Scalar(-1);
      A[i][j] = Scalar(1);
      const auto L = so_derivation<Scalar>(A, n);
      left += L * L;
    }

  Clifford<Scalar> cas(n, Scalar(Rational(-n * n, 4)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto prod = Clifford<Scalar>::e(n, i) * Clifford<Scalar>::e(n, j) *
                        Clifford<Scalar>::ehat(n, i) * Clifford<Scalar>::ehat(n, j);
      cas += prod * Scalar(Rational(-1, 4));
    }
  return {left, fock_rep(cas)};
}

namespace {

// commutator [omega(e_i), omega(e_j)] = (omega ^ omega)(e_i, e_j)
Eigen::MatrixXd omega_sq(const PointGeometry& g, int i, int j) {
  return g.omega[i] * g.omega[j] - g.omega[j] * g.omega[i];
}

CliffEndF tensor_id(const Clifford<double>& a, int rank) {
  CliffEndF m(rank, a.dim());
  for (int i = 0; i < rank; ++i) m.at(i, i) = a;
  return m;
}

CliffEndF tensor(const Clifford<double>& a, const Eigen::MatrixXd& f) {
  CliffEndF m(int(f.rows()), a.dim());
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j)
      if (f(i, j) != 0.0) m.at(i, j) = a * f(i, j);
  return m;
}

ExtEndF tensor_ext(const Exterior<double>& a, const Eigen::MatrixXd& f) {
  ExtEndF m(int(f.rows()), a.dim());
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j)
      if (f(i, j) != 0.0) m.at(i, j) = a * f(i, j);
  return m;
}

// The odd part H_odd = -1/2 sum_{ij} c_i chat_j {(grad_{e_i} omega)(e_j)
//                                               + 1/2 omega^2(e_i,e_j)}.
CliffEndF odd_term(const PointGeometry& g) {
  CliffEndF acc(g.fiber, g.n);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const Eigen::MatrixXd f = g.domega[i][j] + 0.5 * omega_sq(g, i, j);
      if (f.cwiseAbs().maxCoeff() == 0.0) continue;
      const auto cc = Clifford<double>::e(g.n, i) * Clifford<double>::ehat(g.n, j);
      acc += tensor(cc * (-0.5), f);
    }
  return acc;
}

} // namespace

CliffEndF lich_E(const PointGeometry& g) {
  g.validate();
  const int n = g.n;
  CliffEndF E(g.fiber, n);

  // -1/8 sum (R(e_i,e_j)e_k, e_l) c_i c_j chat_k chat_l
  Clifford<double> curv(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = g.Rt(i, j, k, l);
          if (v == 0.0) continue;
          curv += Clifford<double>::e(n, i) * Clifford<double>::e(n, j) *
                  Clifford<double>::ehat(n, k) * Clifford<double>::ehat(n, l) * (-v / 8.0);
        }
  E += tensor_id(curv, g.fiber);

  // -1/8 sum c_i c_j omega^2(e_i,e_j) + 1/8 sum chat_i chat_j omega^2(e_i,e_j)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Eigen::MatrixXd w2 = omega_sq(g, i, j);
      if (w2.cwiseAbs().maxCoeff() == 0.0) continue;
      E += tensor(Clifford<double>::e(n, i) * Clifford<double>::e(n, j) * (-0.125), w2);
      E += tensor(Clifford<double>::ehat(n, i) * Clifford<double>::ehat(n, j) * 0.125, w2);
    }

  E += odd_term(g);

  // 1/4 sum (omega(e_i))^2 + 1/4 r
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(g.fiber, g.fiber);
  for (int i = 0; i < n; ++i) sq += g.omega[i] * g.omega[i];
  E += tensor(Clifford<double>(n, 0.25), sq);
  E += tensor_id(Clifford<double>(n, g.r / 4.0), g.fiber);
  return E;
}

CliffEndF lich_E_lifted(const PointGeometry& g) {
  CliffEndF E = lich_E(g);
  const int n = g.n;
  Clifford<double> cas(n, -double(n) * n / 4.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cas += Clifford<double>::e(n, i) * Clifford<double>::e(n, j) *
             Clifford<double>::ehat(n, i) * Clifford<double>::ehat(n, j) * (-0.25);
  E += tensor_id(cas, g.fiber);
  return E;
}

namespace {

Exterior<double> sigma4_scalar(const PointGeometry& g) {
  const int n = g.n;
  Exterior<double> s4(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = g.Rt(i, j, k, l);
          if (v == 0.0) continue;
          s4 += Exterior<double>::e(n, i) * Exterior<double>::e(n, j) *
                Exterior<double>::ehat(n, k) * Exterior<double>::ehat(n, l) * (-v / 8.0);
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      s4 += Exterior<double>::e(n, i) * Exterior<double>::e(n, j) * Exterior<double>::ehat(n, i) *
            Exterior<double>::ehat(n, j) * (-0.25);
  return s4;
}

ExtEndF sigma2_endf(const PointGeometry& g) {
  const int n = g.n;
  ExtEndF s2(g.fiber, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Eigen::MatrixXd f = g.domega[i][j] + 0.5 * omega_sq(g, i, j);
      if (f.cwiseAbs().maxCoeff() == 0.0) continue;
      s2 += tensor_ext(Exterior<double>::e(n, i) * Exterior<double>::ehat(n, j) * (-0.5), f);
    }
  return s2;
}

ExtEndF ext_identity(int rank, int n) {
  return ExtEndF::identity(rank, n, Exterior<double>(n, 1.0));
}

// Conjugate the geometric data by the orthogonal matrix Q (frame rotation).
PointGeometry rotate_geometry(const PointGeometry& g, const Eigen::MatrixXd& Q) {
  PointGeometry out = g;
  const int n = g.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double acc = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                  acc += g.Rt(a, b, c, d) * Q(a, i) * Q(b, j) * Q(c, k) * Q(d, l);
          out.Rt(i, j, k, l) = acc;
        }
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(g.fiber, g.fiber);
    for (int a = 0; a < n; ++a) w += Q(a, i) * g.omega[a];
    out.omega[i] = w;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Eigen::MatrixXd w = Eigen::MatrixXd::Zero(g.fiber, g.fiber);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) w += Q(a, i) * Q(b, j) * g.domega[a][b];
      out.domega[i][j] = w;
    }
  return out;
}

} // namespace

std::pair<ExtEndF, ExtEndF> sigma_symbols_E(const PointGeometry& g) {
  g.validate();
  ExtEndF s4(g.fiber, g.n);
  const auto s = sigma4_scalar(g);
  for (int i = 0; i < g.fiber; ++i) s4.at(i, i) = s;
  return {s4, sigma2_endf(g)};
}

std::pair<CliffEndF, CliffEndF> split_even_odd(const PointGeometry& g) {
  const CliffEndF odd = odd_term(g);
  return {lich_E_lifted(g) - odd, odd};
}

Clifford<double> hodge_C(const Eigen::MatrixXd& gdot) {
  if (gdot.rows() != gdot.cols() || (gdot - gdot.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("gdot must be symmetric");
  const int n = int(gdot.rows());
  Clifford<double> C(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (gdot(i, j) != 0.0)
        C += Clifford<double>::e(n, i) * Clifford<double>::ehat(n, j) * (-0.5 * gdot(i, j));
  return C;
}

ExtEndF transport_closed_form(const PointGeometry& g) {
  g.validate();
  const auto expo = exterior_exp(-sigma4_scalar(g));
  ExtEndF out(g.fiber, g.n);
  for (int i = 0; i < g.fiber; ++i) out.at(i, i) = expo;
  return out;
}

ExtEndF transport_sigma_closed_form(const PointGeometry& g) {
  g.validate();
  const auto expo = transport_closed_form(g);
  return expo * (-sigma2_endf(g));
}

TransportState transport_ode_solve(const PointGeometry& g, const Eigen::MatrixXd& A, int steps,
                                   double homotopy) {
  g.validate();
  require_antisymmetric(A);
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  const int n = g.n;
  if (A.rows() != n) throw std::invalid_argument("A has wrong size");

  struct Deriv {
    ExtEndF dF, dFs;
  };
  auto rhs = [&](double s, const ExtEndF& F, const ExtEndF& Fs) -> Deriv {
    const Eigen::MatrixXd Q = (-s * homotopy * A).exp();
    const PointGeometry rg = rotate_geometry(g, Q);
    Exterior<double> s4 = sigma4_scalar(rg);
    ExtEndF s2 = sigma2_endf(rg);
    return {(-s4) * F, (-s4) * Fs - s2 * F};
  };

  ExtEndF F = ext_identity(g.fiber, n);
  ExtEndF Fs(g.fiber, n);
  const double h = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const double s = k * h;
    const auto k1 = rhs(s, F, Fs);
    const auto k2 = rhs(s + h / 2, F + k1.dF.scaled(h / 2), Fs + k1.dFs.scaled(h / 2));
    const auto k3 = rhs(s + h / 2, F + k2.dF.scaled(h / 2), Fs + k2.dFs.scaled(h / 2));
    const auto k4 = rhs(s + h, F + k3.dF.scaled(h), Fs + k3.dFs.scaled(h));
    F += (k1.dF + k2.dF.scaled(2.0) + k3.dF.scaled(2.0) + k4.dF).scaled(h / 6);
    Fs += (k1.dFs + k2.dFs.scaled(2.0) + k3.dFs.scaled(2.0) + k4.dFs).scaled(h / 6);
  }
  return {std::move(F), std::move(Fs), 1.0};
}

} // namespace anomaly
