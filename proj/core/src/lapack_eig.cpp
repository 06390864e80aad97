// Isolated LAPACKE wrapper: lapacke.h leaks C <complex.h> macros, so it must
// not share a translation unit with boost headers.
#include <Eigen/Dense>

#ifdef ANOMALY_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace anomaly {

// Symmetric eigendecomposition: on success A is replaced by the eigenvector
// columns and evals holds the ascending eigenvalues. Returns false when no
// LAPACKE backend is available or the factorization fails; the caller falls
// back to Eigen's solver.
bool lapack_dsyev_inplace(Eigen::MatrixXd& A, Eigen::VectorXd& evals) {
#ifdef ANOMALY_HAVE_LAPACKE
  const auto n = static_cast<lapack_int>(A.rows());
  if (A.cols() != A.rows()) return false;
  evals.resize(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, A.data(), n, evals.data());
  return info == 0;
#else
  (void)A;
  (void)evals;
  return false;
#endif
}

} // namespace anomaly
