#include "anomaly/chern_weil.hpp"

namespace anomaly {

void BundleMetricPath::validate() const {
  for (const auto& s : samples) {
    if (s.h.rows() != rank || s.h.cols() != rank)
      throw std::invalid_argument("h sample has wrong shape");
    if ((s.h - s.h.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("h sample is not hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.h);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("h sample is not positive-definite");
    if (int(s.dh.size()) != dirs)
      throw std::invalid_argument("dh sample count does not match chart dimension");
  }
}

std::vector<std::vector<Eigen::MatrixXcd>> omega_flat_frame(const BundleMetricPath& h) {
  h.validate();
  std::vector<std::vector<Eigen::MatrixXcd>> out;
  out.reserve(h.samples.size());
  for (const auto& s : h.samples) {
    const Eigen::MatrixXcd hinv = s.h.inverse();
    std::vector<Eigen::MatrixXcd> per_dir;
    per_dir.reserve(h.dirs);
    for (int d = 0; d < h.dirs; ++d) per_dir.push_back(hinv * s.dh[d]);
    out.push_back(std::move(per_dir));
  }
  return out;
}

std::vector<Eigen::MatrixXcd> metric_variation_V(const BundleMetricPath& h) {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(h.samples.size());
  for (const auto& s : h.samples) {
    if (s.hdot.size() == 0)
      throw std::invalid_argument("sample carries no epsilon-derivative");
    out.push_back(s.h.inverse() * s.hdot);
  }
  return out;
}

std::vector<std::vector<double>> theta_one_form(
    const Eigen::MatrixXcd& gammaF,
    const std::vector<std::vector<Eigen::MatrixXcd>>& omega) {
  std::vector<std::vector<double>> out;
  out.reserve(omega.size());
  for (const auto& per_dir : omega) {
    std::vector<double> row;
    row.reserve(per_dir.size());
    for (const auto& w : per_dir) {
      if (gammaF.cols() != w.rows()) throw std::invalid_argument("shape mismatch");
      row.push_back((gammaF * w).trace().real());
    }
    out.push_back(std::move(row));
  }
  return out;
}

} // namespace anomaly
