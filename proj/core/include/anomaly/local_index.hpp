#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>
#include <vector>

#include "anomaly/multivector.hpp"

namespace anomaly {

struct FixedPointDegeneracy : std::runtime_error {
  FixedPointDegeneracy() : std::runtime_error("normal rotation has eigenvalue 1") {}
};

// Pointwise data on the fixed-point set: tangent splitting n = n0 + n1, the
// curvature of the fixed submanifold, the normal rotation, and the bundle
// endomorphisms feeding the density limits.
struct FixedPointData {
  int n0 = 0;    // fixed directions
  int n1 = 0;    // normal directions
  int fiber = 1; // rank of F
  std::vector<double> Rgamma;                       // n0^4 components, row-major (i,j,k,l)
  Eigen::MatrixXd gammaTilde1;                      // n1 x n1 orthogonal, no eigenvalue 1
  Eigen::MatrixXd gammaF;                           // parallel bundle isometry
  Eigen::MatrixXd V;                                // h^F-variation endomorphism
  Eigen::MatrixXd gdot;                             // metric variation on the fixed directions
  std::vector<std::vector<Eigen::MatrixXd>> domega; // (grad_{e_i} omega)(e_j), fixed directions

  double Rg(int i, int j, int k, int l) const {
    return Rgamma[std::size_t(((i * n0 + j) * n0 + k)) * n0 + l];
  }
  double& Rg(int i, int j, int k, int l) {
    return Rgamma[std::size_t(((i * n0 + j) * n0 + k)) * n0 + l];
  }

  void validate(double tol = 1e-9) const;
};

// Both sides of the cancellation: the alternating trace of the exterior
// powers of gt and det(Id - gt). Throws FixedPointDegeneracy when 1 is an
// eigenvalue of gt.
std::pair<double, double> det_cancellation(const Eigen::MatrixXd& gt);

// The exterior-power operator of gt realized as a Clifford element on the
// tail indices n0 .. n0+n1-1 of C(V,-V).
Clifford<double> lambda_gamma_clifford(const Eigen::MatrixXd& gt, int n0);

// Density limits at a fixed point.
double integrand_I(const FixedPointData& d);
double integrand_I_sigma(const FixedPointData& d);

// Quadrature assembly of the right-hand sides. Weights carry the measure.
double rhs_variation_hF(const std::vector<FixedPointData>& samples,
                        const std::vector<double>& weights);

// One sample of theta (a form on the fixed directions) paired with the
// transgression form; the integrand is -(theta ^ eprime), top coefficient.
struct ThetaSample {
  Exterior<double> theta;
  Exterior<double> eprime;
};
double rhs_variation_gTM(const std::vector<ThetaSample>& samples,
                         const std::vector<double>& weights);

// Master identity of the module: the split-limit route through the
// closed-form symbol series (with the det Q_1(0)^{-1/2} normalization)
// against the direct density formula.
std::pair<double, double> pipeline_consistency(const FixedPointData& d);

} // namespace anomaly
