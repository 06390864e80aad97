#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "anomaly/fiber.hpp"
#include "anomaly/fock.hpp"
#include "anomaly/multivector.hpp"

namespace anomaly {

using CliffEndF = FiberMat<Clifford<double>>;
using ExtEndF = FiberMat<Exterior<double>>;

// Pointwise geometric data feeding the curvature endomorphism assembly.
struct PointGeometry {
  int n = 2;     // tangent dimension
  int fiber = 1; // rank of F
  // curvature components (R(e_i,e_j)e_k, e_l), row-major over (i,j,k,l)
  std::vector<double> R;
  // omega(F,h)(e_i) as EndF matrices
  std::vector<Eigen::MatrixXd> omega;
  // (grad_{e_i} omega)(e_j)
  std::vector<std::vector<Eigen::MatrixXd>> domega;
  double r = 0.0;        // scalar curvature
  Eigen::MatrixXd gdot;  // ((g^{TM})^{-1} gdot^{TM} e_i, e_j), symmetric

  double Rt(int i, int j, int k, int l) const {
    return R[std::size_t(((i * n + j) * n + k)) * n + l];
  }
  double& Rt(int i, int j, int k, int l) {
    return R[std::size_t(((i * n + j) * n + k)) * n + l];
  }

  void validate(double tol = 1e-10) const;
};

struct TransportState {
  ExtEndF F;      // F^1(s)
  ExtEndF Fsigma; // F^sigma(s)
  double s = 0.0;
};

// Casimir operator on Lambda V, two ways: the so(n) derivation sum
// sum_{i<j} (lambda E_{ij})^2 and the Fock image of
// -1/4 sum_{i,j} c_i c_j chat_i chat_j - n^2/4.
std::pair<FockOperator<Scalar>, FockOperator<Scalar>> casimir_two_ways(int n);

// The curvature endomorphism E of the Hodge Laplacian (five printed terms).
CliffEndF lich_E(const PointGeometry& g);

// The lifted version: E - 1/4 sum_{i,j} c_i c_j chat_i chat_j - n^2/4.
CliffEndF lich_E_lifted(const PointGeometry& g);

// Highest symbols at A = 0: (sigma_4 of the lifted E, sigma_2 of the odd part).
std::pair<ExtEndF, ExtEndF> sigma_symbols_E(const PointGeometry& g);

// Even/odd split of the lifted endomorphism.
std::pair<CliffEndF, CliffEndF> split_even_odd(const PointGeometry& g);

// C = -1/2 sum_{ij} gdot_{ij} c(e_i) chat(e_j).
Clifford<double> hodge_C(const Eigen::MatrixXd& gdot);

// Closed-form transport solutions at A = 0.
ExtEndF transport_closed_form(const PointGeometry& g);
ExtEndF transport_sigma_closed_form(const PointGeometry& g);

// Fixed-step order-4 integration of
//   dF/ds      = -(sigma_4 E~)(sA) ^ F,            F(0) = 1 (x) Id
//   dFsigma/ds = -(sigma_4 E~)(sA) ^ Fsigma - (sigma_2 E~)(sA) ^ F,
// with the rotation exp(-s lambda_A) realized as conjugation of the R and
// grad-omega tensors by exp(-sA). `homotopy` in [0,1] interpolates to the
// constant-coefficient system (0: frozen at A = 0 data).
TransportState transport_ode_solve(const PointGeometry& g, const Eigen::MatrixXd& A,
                                   int steps, double homotopy = 1.0);

} // namespace anomaly
