#include "tesp/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace tesp::linalg {

CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

double sigma_max(const CMat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(a);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

CMat pinv(const CMat& a, double cutoff) {
  CMat out = CMat::Zero(a.cols(), a.rows());
  if (a.size() == 0) return out;
  Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  for (Index q = 0; q < sv.size(); ++q) {
    if (sv[q] <= cutoff) continue;
    out.noalias() += (svd.matrixV().col(q) / sv[q]) * svd.matrixU().col(q).adjoint();
  }
  return out;
}

std::vector<CMat> pinv_slices(const std::vector<CMat>& slices) {
  double smax = 0;
  Index dim = 0;
  for (const auto& s : slices) {
    smax = std::max(smax, sigma_max(s));
    dim = std::max({dim, s.rows(), s.cols()});
  }
  const double cutoff = static_cast<double>(dim) * machine_eps() * smax;
  std::vector<CMat> out(slices.size());
  for (std::size_t k = 0; k < slices.size(); ++k) out[k] = pinv(slices[k], cutoff);
  return out;
}

HermEig herm_eig(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

template <class F>
CMat spectral_map(const CMat& a, F f) {
  auto e = herm_eig(hermitian_part(a));
  Eigen::VectorXd d = e.values.unaryExpr(f);
  return e.vectors * d.asDiagonal() * e.vectors.adjoint();
}

}  // namespace

CMat herm_sqrt(const CMat& a, double cutoff) {
  return spectral_map(a, [cutoff](double v) { return v > cutoff ? std::sqrt(v) : 0.0; });
}

CMat herm_pinv_sqrt(const CMat& a, double cutoff) {
  return spectral_map(a, [cutoff](double v) { return v > cutoff ? 1.0 / std::sqrt(v) : 0.0; });
}

CMat herm_pinv(const CMat& a, double cutoff) {
  return spectral_map(a, [cutoff](double v) { return v > cutoff ? 1.0 / v : 0.0; });
}

CMat psd_pinv_factor(const CMat& g, double cutoff) {
  auto e = herm_eig(hermitian_part(g));
  Eigen::VectorXd d = e.values.unaryExpr([cutoff](double v) { return v > cutoff ? 1.0 / std::sqrt(v) : 0.0; });
  return e.vectors * d.asDiagonal();
}

double psd_family_cutoff(const std::vector<CMat>& slices) {
  double lmax = 0;
  Index dim = 0;
  for (const auto& s : slices) {
    if (s.size() == 0) continue;
    lmax = std::max(lmax, herm_eig(hermitian_part(s)).values.cwiseAbs().maxCoeff());
    dim = std::max(dim, s.rows());
  }
  return static_cast<double>(dim) * machine_eps() * lmax;
}

double min_positive_eig(const CMat& herm, double cutoff) {
  auto v = herm_eig(hermitian_part(herm)).values;
  double best = 0;
  for (Index q = 0; q < v.size(); ++q)
    if (v[q] > cutoff && (best == 0 || v[q] < best)) best = v[q];
  return best;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

}  // namespace tesp::linalg
