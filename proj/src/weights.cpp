#include "tesp/weights.hpp"

#include "tesp/errors.hpp"
#include "tesp/linalg.hpp"

#include <cmath>

namespace tesp {

namespace {

bool is_exact_identity(const TubalMatrix& a) {
  if (a.rows() != a.cols()) return false;
  for (Index k = 0; k < a.tubes(); ++k)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index i = 0; i < a.rows(); ++i)
        if (a(i, j, k) != ((k == 0 && i == j) ? 1.0 : 0.0)) return false;
  return true;
}

SpectralWeight analyse(const TubalMatrix& w, Definiteness mode, const char* name) {
  if (w.rows() != w.cols()) throw shape_error(std::string(name) + " must be square");
  SpectralWeight s;
  s.identity = is_exact_identity(w);
  auto half = dft_half(w);
  if (s.identity) {
    s.inverse = s.sqrt = s.inv_sqrt = half;
    return s;
  }
  bool ok = mode == Definiteness::definite ? is_t_spd(w) : is_t_spsd(w);
  if (!ok)
    throw domain_error(std::string(name) + (mode == Definiteness::definite
                                                ? " is not T-symmetric positive definite"
                                                : " is not T-symmetric positive semidefinite"));
  for (auto& h : half) h = linalg::hermitian_part(h);
  double cutoff = mode == Definiteness::definite ? 0.0 : linalg::psd_family_cutoff(half);
  for (const auto& h : half) {
    s.inverse.push_back(linalg::herm_pinv(h, cutoff));
    s.sqrt.push_back(linalg::herm_sqrt(h, cutoff));
    s.inv_sqrt.push_back(linalg::herm_pinv_sqrt(h, cutoff));
  }
  return s;
}

TubalMatrix spatial(const std::vector<CMat>& half, Index n, Index l) { return idft_half(half, n, n, l); }

}  // namespace

WeightPair::WeightPair(TubalMatrix m, TubalMatrix n, Definiteness mode)
    : m_(std::move(m)), n_(std::move(n)), mode_(mode) {
  if (m_.tubes() != n_.tubes()) throw shape_error("weight tube lengths differ");
  left_ = analyse(m_, mode_, "M");
  right_ = analyse(n_, mode_, "N");
}

WeightPair WeightPair::identity(Index r, Index s, Index tubes) {
  return {TubalMatrix::identity(r, tubes), TubalMatrix::identity(s, tubes)};
}

TubalMatrix WeightPair::m_inverse() const { return spatial(left_.inverse, m_.rows(), m_.tubes()); }
TubalMatrix WeightPair::n_inverse() const { return spatial(right_.inverse, n_.rows(), n_.tubes()); }
TubalMatrix WeightPair::m_sqrt() const { return spatial(left_.sqrt, m_.rows(), m_.tubes()); }
TubalMatrix WeightPair::n_sqrt() const { return spatial(right_.sqrt, n_.rows(), n_.tubes()); }
TubalMatrix WeightPair::m_inv_sqrt() const { return spatial(left_.inv_sqrt, m_.rows(), m_.tubes()); }
TubalMatrix WeightPair::n_inv_sqrt() const { return spatial(right_.inv_sqrt, n_.rows(), n_.tubes()); }

double fnorm_weighted(const TubalMatrix& a, const WeightPair& w) {
  if (a.rows() != w.m().rows() || a.cols() != w.n().rows() || a.tubes() != w.m().tubes())
    throw shape_error("fnorm_weighted: weights do not match operand");
  if (w.is_identity()) return a.norm();
  auto half = dft_half(a);
  const Index l = a.tubes();
  double s = 0;
  for (Index k = 0; k < static_cast<Index>(half.size()); ++k) {
    CMat g = w.left().sqrt[k] * half[k] * w.right().sqrt[k];
    s += spectral_weight(k, l) * g.squaredNorm();
  }
  return std::sqrt(s / static_cast<double>(l));
}

}  // namespace tesp
