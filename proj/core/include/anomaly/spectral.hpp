#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace anomaly {

struct IllConditioned : std::runtime_error {
  IllConditioned() : std::runtime_error("eigenvalue inside the kernel guard band") {}
};

struct ConstantKernelViolation : std::runtime_error {
  ConstantKernelViolation() : std::runtime_error("kernel dimension changes along the family") {}
};

using SpMat = Eigen::SparseMatrix<double>;

// S^1 model on N grid nodes theta_k = 2 pi k / N. The bundle is real of the
// given rank with orthogonal holonomy U at the seam; a complex line with
// holonomy e^{i phi} is the rank-2 rotation block. g is the metric density
// (metric g d theta^2), h the fiber metric; gdot/hdot describe a 1-parameter
// family direction (leave unset for a frozen model).
struct CircleModel {
  int N = 64;
  int rank = 1;
  std::function<double(double)> g;
  std::function<double(double)> gdot;                // optional
  std::function<Eigen::MatrixXd(double)> h;
  std::function<Eigen::MatrixXd(double)> hdot;       // optional
  Eigen::MatrixXd U;                                 // orthogonal, rank x rank
  // 0: identity, 1: rotation by 2 pi j / N (param = j), 2: reflection
  // through theta = 0 (fixed nodes 0 and N/2, N even)
  int iso_kind = 0;
  int iso_param = 0;

  void validate() const;
};

// One degree of the discretized complex. d is combinatorial (cochain
// convention: q-cochains are integrals over q-cells), so all metric content
// sits in the mass matrices. K = M * Laplacian is symmetric PSD.
struct DegreeData {
  SpMat M, Msqrt, Minvsqrt;    // block-diagonal SPD mass and its square roots
  SpMat gamma;                 // isometry representation (signed permutation blocks)
  SpMat X;                     // M^{-1} Mdot along the family (empty if frozen)
  Eigen::MatrixXd K;           // quadratic form of the Laplacian
};

struct DiscreteComplex {
  std::vector<DegreeData> deg;
  std::vector<SpMat> d;        // d[q]: q-cochains -> (q+1)-cochains

  Eigen::MatrixXd laplacian(int q) const;
};

// Shift the family by eps: g + eps gdot, h + eps hdot (X still taken from
// the derivative at that point; the families used here are affine in eps).
DiscreteComplex build_complex(const CircleModel& m, double eps = 0.0);

// Eigenstructure of the symmetrized Laplacian L = M^{-1/2} K M^{-1/2}.
struct SpectralDegree {
  Eigen::VectorXd evals;
  Eigen::MatrixXd vecs;        // columns, orthonormal
  Eigen::MatrixXd gammaS;      // isometry in the symmetrized frame
  int kerdim = 0;
  double kernel_threshold = 0.0;
};

std::vector<SpectralDegree> analyze(const DiscreteComplex& dc);

// theta(gamma, s) = sum_q (-1)^q q Tr[gamma_q Delta_q^{-s} (1 - P0)]
// as an exact finite eigenvalue-power sum, and its s-derivative at 0.
double zeta_theta(const std::vector<SpectralDegree>& sp, double s);
double theta_prime_zero(const std::vector<SpectralDegree>& sp);
inline double log_torsion(const std::vector<SpectralDegree>& sp) {
  return -0.5 * theta_prime_zero(sp);
}

// sum_q (-1)^q Tr[X_q gamma_q exp(-t Delta_q)]; with_insertion = false drops
// the X factor.
double heat_supertrace(const DiscreteComplex& dc, const std::vector<SpectralDegree>& sp,
                       bool with_insertion, double t);

// t -> 0 extrapolation of f on [tmin, tmax] by a least-squares line in t.
double lim_t0(const std::function<double(double)>& f, double tmin, double tmax, int samples);

// A fixed isotypic block of cohomology in one degree: the character value at
// the gamma of interest and cocycle representatives of a basis of the block
// (columns). The metric is the Gram determinant of their harmonic
// representatives. top_dual = true computes the representative of a
// top-degree class as a multiple of M^{-1} applied to the class vector
// (valid when d_{top-1}^T annihilates it Euclidean-wise), instead of
// subtracting an exact form.
struct CohomologyBlock {
  int degree = 0;
  double chi = 1.0;
  Eigen::MatrixXd cocycles;
  bool top_dual = false;
  // dim ker d_{degree-1}; the harmonic solve pins that many leading
  // coordinates, which is an exact gauge fix when the kernel restricts
  // injectively to them (true for constant sections on a connected complex)
  int gauge_pins = 0;
};

// log|.|^2(gamma) = sum_q (-1)^q sum_blocks chi * log det Gram_q(block).
double equivariant_log_metric(const DiscreteComplex& dc,
                              const std::vector<CohomologyBlock>& blocks);

// Kernel projector in cochain coordinates and the variation identity helper
// Str[(-1)^q X gamma P0].
Eigen::MatrixXd kernel_projector(const DiscreteComplex& dc, const std::vector<SpectralDegree>& sp,
                                 int q);
double log_metric_variation_trace(const DiscreteComplex& dc,
                                  const std::vector<SpectralDegree>& sp);

// Residuals of the variation identities along the model family:
//   dDelta/deps = -X d*d + d* X d - d X d* + d d* X (per degree), and
//   d/deps log|.|^2 = Str[(-1)^q X gamma P0].
struct VariationResiduals {
  std::vector<double> laplacian; // per degree, relative
  double log_metric = 0.0;       // absolute difference
};
VariationResiduals laplacian_variation_check(const CircleModel& m,
                                             const std::vector<CohomologyBlock>& blocks,
                                             double step = 1e-4);

struct TorsionReport {
  std::string label;
  double log_tau = 0.0;     // at eps = 0
  double log_metric = 0.0;  // log|.|^2(gamma) at eps = 0
  double log_norm = 0.0;    // log|.|^2 - theta'(0)
  double lhs = 0.0;         // central difference of log_norm in eps
  double rhs = 0.0;         // fixed-point formula value
  double err = 0.0;
  // convergence table rows (N, value) filled by the callers that refine
  std::vector<std::pair<int, double>> convergence;
};

// S^1 experiment: LHS = finite-difference variation of log||.||^2(gamma),
// RHS = fixed-point assembly (v at the two reflection-fixed nodes for the
// h-family with reflection; 0 for the vanishing cases).
TorsionReport anomaly_experiment(const CircleModel& m, const std::vector<CohomologyBlock>& blocks,
                                 char vary /* 'g' or 'h' */, double step = 1e-4);

// Finite-dimensional variation identity for a graded family of PSD
// operators with constant kernel and a commuting isometry:
//   d/deps theta'(0) = -Tr[(-1)^q q gamma Hdot H^+ (1 - P0)].
// Returns the absolute residual between the finite difference and the trace.
struct GradedFamily {
  std::vector<std::function<Eigen::MatrixXd(double)>> H;
  std::vector<Eigen::MatrixXd> gamma;
};
double prop_var_finite_check(const GradedFamily& f, double step = 1e-5);

// Flat T^2 on an N x N periodic grid, rank 1, fiber metric family h + eps v.
struct TorusModel {
  int N = 16;
  std::function<double(double, double)> h;
  std::function<double(double, double)> hdot; // optional
  bool minus_id = false;                      // gamma = -id instead of id
};

DiscreteComplex torus_complex(const TorusModel& m, double eps = 0.0);

// theta'(0) on the torus from the degree-0 and degree-2 spectra only
// (the degree-1 nonzero spectrum splits gamma-equivariantly into the two).
double torus_theta_prime_zero(const DiscreteComplex& dc);

TorsionReport torus_anomaly(const TorusModel& m, double step = 1e-4);

} // namespace anomaly
