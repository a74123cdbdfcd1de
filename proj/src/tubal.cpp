#include "tesp/tubal.hpp"

#include "tesp/errors.hpp"
#include "tesp/kernels.hpp"
#include "tesp/linalg.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <string>

namespace tesp {

namespace {

std::string shape_str(const TubalMatrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + "x" + std::to_string(a.tubes());
}

// FFTW planning is not thread-safe; execution with new-array calls is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan forward(int tubes, int count) { return get(tubes, count, true); }
  fftw_plan backward(int tubes, int count) { return get(tubes, count, false); }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  fftw_plan get(int tubes, int count, bool fwd) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(tubes, count, fwd);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int half = tubes / 2 + 1;
    double* real = fftw_alloc_real(static_cast<std::size_t>(tubes) * count);
    fftw_complex* cplx = fftw_alloc_complex(static_cast<std::size_t>(half) * count);
    int n[] = {tubes};
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = fwd ? fftw_plan_many_dft_r2c(1, n, count, real, nullptr, count, 1, cplx, nullptr,
                                               count, 1, flags)
                      : fftw_plan_many_dft_c2r(1, n, count, cplx, nullptr, count, 1, real, nullptr,
                                               count, 1, flags);
    fftw_free(real);
    fftw_free(cplx);
    if (!p) throw std::runtime_error("fftw planning failed");
    plans_.emplace(key, p);
    return p;
  }

  std::mutex mu_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

void require_finite(const TubalMatrix& a, const char* what) {
  if (!a.all_finite()) throw domain_error(std::string(what) + ": non-finite entry");
}

}  // namespace

// ---------------------------------------------------------------------------
// TubalMatrix

TubalMatrix::TubalMatrix(Index rows, Index cols, Index tubes)
    : rows_(rows), cols_(cols), tubes_(tubes) {
  if (rows < 1 || cols < 1 || tubes < 1)
    throw shape_error("tensor dimensions must be positive");
  data_.assign(static_cast<std::size_t>(rows * cols * tubes), 0.0);
}

TubalMatrix::TubalMatrix(Index rows, Index cols, Index tubes, std::vector<double> data)
    : rows_(rows), cols_(cols), tubes_(tubes), data_(std::move(data)) {
  if (rows < 1 || cols < 1 || tubes < 1)
    throw shape_error("tensor dimensions must be positive");
  if (static_cast<Index>(data_.size()) != rows * cols * tubes)
    throw shape_error("data length does not match dimensions");
  if (!all_finite()) throw domain_error("tensor entries must be finite");
}

TubalMatrix TubalMatrix::identity(Index n, Index tubes) {
  TubalMatrix t(n, n, tubes);
  t.slice(0).setIdentity();
  return t;
}

TubalMatrix TubalMatrix::from_slices(const std::vector<Mat>& slices) {
  if (slices.empty()) throw shape_error("no slices");
  Index m = slices[0].rows(), n = slices[0].cols();
  TubalMatrix t(m, n, static_cast<Index>(slices.size()));
  for (Index k = 0; k < t.tubes(); ++k) {
    if (slices[k].rows() != m || slices[k].cols() != n) throw shape_error("slice shapes differ");
    t.slice(k) = slices[k];
  }
  if (!t.all_finite()) throw domain_error("tensor entries must be finite");
  return t;
}

TubalMatrix TubalMatrix::from_first_slice(const Mat& first, Index tubes) {
  TubalMatrix t(first.rows(), first.cols(), tubes);
  t.slice(0) = first;
  return t;
}

TubalMatrix TubalMatrix::random_normal(Index rows, Index cols, Index tubes, std::mt19937_64& rng) {
  TubalMatrix t(rows, cols, tubes);
  std::normal_distribution<double> g;
  for (double& v : t.data_) v = g(rng);
  return t;
}

TubalMatrix TubalMatrix::row_slice(Index i) const {
  TubalMatrix t(1, cols_, tubes_);
  for (Index k = 0; k < tubes_; ++k)
    for (Index j = 0; j < cols_; ++j) t(0, j, k) = (*this)(i, j, k);
  return t;
}

TubalMatrix TubalMatrix::col_slice(Index j) const {
  TubalMatrix t(rows_, 1, tubes_);
  for (Index k = 0; k < tubes_; ++k)
    for (Index i = 0; i < rows_; ++i) t(i, 0, k) = (*this)(i, j, k);
  return t;
}

Eigen::VectorXd TubalMatrix::tube(Index i, Index j) const {
  Eigen::VectorXd v(tubes_);
  for (Index k = 0; k < tubes_; ++k) v[k] = (*this)(i, j, k);
  return v;
}

double TubalMatrix::squared_norm() const {
  double s = 0;
  for (double v : data_) s += v * v;
  return s;
}

double TubalMatrix::norm() const { return std::sqrt(squared_norm()); }

bool TubalMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

TubalMatrix& TubalMatrix::operator+=(const TubalMatrix& o) {
  if (!same_shape(o)) throw shape_error("sum of " + shape_str(*this) + " and " + shape_str(o));
  for (std::size_t p = 0; p < data_.size(); ++p) data_[p] += o.data_[p];
  return *this;
}

TubalMatrix& TubalMatrix::operator-=(const TubalMatrix& o) {
  if (!same_shape(o)) throw shape_error("difference of " + shape_str(*this) + " and " + shape_str(o));
  for (std::size_t p = 0; p < data_.size(); ++p) data_[p] -= o.data_[p];
  return *this;
}

TubalMatrix& TubalMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

TubalMatrix operator+(TubalMatrix a, const TubalMatrix& b) { return a += b; }
TubalMatrix operator-(TubalMatrix a, const TubalMatrix& b) { return a -= b; }
TubalMatrix operator*(double s, TubalMatrix a) { return a *= s; }

double max_abs_diff(const TubalMatrix& a, const TubalMatrix& b) {
  if (!a.same_shape(b)) throw shape_error("max_abs_diff: shapes differ");
  double d = 0;
  for (Index p = 0; p < a.size(); ++p) d = std::max(d, std::abs(a.data()[p] - b.data()[p]));
  return d;
}

double inner(const TubalMatrix& a, const TubalMatrix& b) {
  if (!a.same_shape(b)) throw shape_error("inner: shapes differ");
  double s = 0;
  for (Index p = 0; p < a.size(); ++p) s += a.data()[p] * b.data()[p];
  return s;
}

// ---------------------------------------------------------------------------
// Fourier transforms along tubes

SpectralTubal::SpectralTubal(Index rows, Index cols, std::vector<CMat> slices, bool origin_real)
    : rows_(rows), cols_(cols), slices_(std::move(slices)), origin_real_(origin_real) {
  if (slices_.empty()) throw shape_error("spectral tensor needs at least one slice");
  for (const auto& s : slices_)
    if (s.rows() != rows || s.cols() != cols) throw shape_error("spectral slice shape mismatch");
}

std::vector<CMat> dft_half(const TubalMatrix& a) {
  const Index m = a.rows(), n = a.cols(), l = a.tubes(), h = half_count(l);
  const Index count = m * n;
  std::vector<std::complex<double>> out(static_cast<std::size_t>(count * h));
  fftw_plan p = PlanCache::instance().forward(static_cast<int>(l), static_cast<int>(count));
  fftw_execute_dft_r2c(p, const_cast<double*>(a.data().data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  std::vector<CMat> half(h);
  for (Index k = 0; k < h; ++k) {
    half[k] = Eigen::Map<const CMat>(out.data() + count * k, m, n);
    if (k == 0 || 2 * k == l) half[k] = half[k].real().cast<std::complex<double>>();
  }
  return half;
}

TubalMatrix idft_half(const std::vector<CMat>& half, Index rows, Index cols, Index tubes) {
  const Index h = half_count(tubes), count = rows * cols;
  if (static_cast<Index>(half.size()) < h) throw shape_error("idft_half: too few slices");
  std::vector<std::complex<double>> in(static_cast<std::size_t>(count * h));
  for (Index k = 0; k < h; ++k) {
    if (half[k].rows() != rows || half[k].cols() != cols) throw shape_error("idft_half: slice shape");
    Eigen::Map<CMat>(in.data() + count * k, rows, cols) = half[k];
  }
  TubalMatrix t(rows, cols, tubes);
  fftw_plan p = PlanCache::instance().backward(static_cast<int>(tubes), static_cast<int>(count));
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in.data()), t.data().data());
  t *= 1.0 / static_cast<double>(tubes);
  return t;
}

SpectralTubal dft_cube(const TubalMatrix& a) {
  require_finite(a, "dft_cube");
  const Index l = a.tubes();
  std::vector<CMat> half = dft_half(a);
  std::vector<CMat> full(l);
  for (Index k = 0; k < l; ++k)
    full[k] = k < half_count(l) ? half[k] : CMat(half[l - k].conjugate());
  return {a.rows(), a.cols(), std::move(full), true};
}

TubalMatrix idft_cube(const SpectralTubal& s) {
  const Index l = s.tubes();
  if (!s.origin_real()) {
    double scale = 0, asym = 0;
    for (Index k = 0; k < l; ++k) {
      scale = std::max(scale, s[k].cwiseAbs().maxCoeff());
      asym = std::max(asym, (s[k] - s[(l - k) % l].conjugate()).cwiseAbs().maxCoeff());
    }
    if (asym > 1e-10 * std::max(1.0, scale))
      throw domain_error("idft_cube: spectrum is not conjugate-symmetric");
  }
  std::vector<CMat> half(s.slices().begin(), s.slices().begin() + half_count(l));
  return idft_half(half, s.rows(), s.cols(), l);
}

// ---------------------------------------------------------------------------
// Products and structure

TubalMatrix t_product(const TubalMatrix& a, const TubalMatrix& b) {
  if (a.cols() != b.rows() || a.tubes() != b.tubes())
    throw shape_error("t_product: " + shape_str(a) + " * " + shape_str(b));
  require_finite(a, "t_product");
  require_finite(b, "t_product");
  auto ah = dft_half(a), bh = dft_half(b);
  std::vector<CMat> ch(ah.size());
  kernels::slice_products(ah, bh, ch, kernels::default_exec());
  return idft_half(ch, a.rows(), b.cols(), a.tubes());
}

TubalMatrix t_transpose(const TubalMatrix& a, TransposeKind kind) {
  const Index l = a.tubes();
  const bool swap = kind != TransposeKind::R;
  const bool reverse = kind != TransposeKind::ST;
  TubalMatrix t(swap ? a.cols() : a.rows(), swap ? a.rows() : a.cols(), l);
  for (Index k = 0; k < l; ++k) {
    Index src = reverse ? (l - k) % l : k;
    if (swap)
      t.slice(k) = a.slice(src).transpose();
    else
      t.slice(k) = a.slice(src);
  }
  return t;
}

TubalMatrix t_kron(const TubalMatrix& a, const TubalMatrix& b) {
  if (a.tubes() != b.tubes()) throw shape_error("t_kron: tube lengths differ");
  auto ah = dft_half(a), bh = dft_half(b);
  std::vector<CMat> ch(ah.size());
  for (std::size_t k = 0; k < ah.size(); ++k) ch[k] = linalg::kron(ah[k], bh[k]);
  return idft_half(ch, a.rows() * b.rows(), a.cols() * b.cols(), a.tubes());
}

TubalMatrix vec_t(const TubalMatrix& a) {
  // Stacking lateral slices keeps the storage order unchanged.
  std::vector<double> d(a.data().begin(), a.data().end());
  return {a.rows() * a.cols(), 1, a.tubes(), std::move(d)};
}

TubalMatrix unvec_t(const TubalMatrix& v, Index rows, Index cols) {
  if (v.cols() != 1 || v.rows() != rows * cols) throw shape_error("unvec_t: length mismatch");
  std::vector<double> d(v.data().begin(), v.data().end());
  return {rows, cols, v.tubes(), std::move(d)};
}

TubalMatrix t_pinv(const TubalMatrix& a) {
  require_finite(a, "t_pinv");
  auto p = linalg::pinv_slices(dft_half(a));
  return idft_half(p, a.cols(), a.rows(), a.tubes());
}

namespace {

struct SpdCheck {
  bool hermitian = true;
  double min_eig = std::numeric_limits<double>::infinity();
};

SpdCheck spd_check(const TubalMatrix& a, double tol) {
  SpdCheck c;
  if (a.rows() != a.cols()) {
    c.hermitian = false;
    return c;
  }
  for (const auto& s : dft_half(a)) {
    double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.adjoint()).cwiseAbs().maxCoeff() > tol * scale) c.hermitian = false;
    c.min_eig = std::min(c.min_eig, linalg::herm_eig(linalg::hermitian_part(s)).values.minCoeff());
  }
  return c;
}

}  // namespace

bool is_t_spd(const TubalMatrix& a, double tol) {
  auto c = spd_check(a, tol);
  return c.hermitian && c.min_eig > tol;
}

bool is_t_spsd(const TubalMatrix& a, double tol) {
  auto c = spd_check(a, tol);
  return c.hermitian && c.min_eig >= -tol;
}

TubalMatrix t_sqrt(const TubalMatrix& a) {
  if (!is_t_spd(a)) throw domain_error("t_sqrt: operand is not T-symmetric positive definite");
  auto h = dft_half(a);
  for (auto& s : h) s = linalg::herm_sqrt(linalg::hermitian_part(s), 0.0);
  return idft_half(h, a.rows(), a.cols(), a.tubes());
}

TubalMatrix t_inverse(const TubalMatrix& a) {
  if (a.rows() != a.cols()) throw shape_error("t_inverse: tensor is not square");
  auto h = dft_half(a);
  for (auto& s : h) {
    Eigen::PartialPivLU<CMat> lu(s);
    if (std::abs(lu.determinant()) == 0.0) throw domain_error("t_inverse: singular Fourier slice");
    s = lu.inverse();
  }
  return idft_half(h, a.rows(), a.cols(), a.tubes());
}

// ---------------------------------------------------------------------------
// Block-circulant view

Mat bcirc_expand(const TubalMatrix& a, Index budget) {
  const Index m = a.rows(), n = a.cols(), l = a.tubes();
  if ((m * l) * (n * l) > budget)
    throw budget_error("bcirc_expand: " + std::to_string(m * l) + "x" + std::to_string(n * l) +
                       " exceeds entry budget " + std::to_string(budget));
  Mat b(m * l, n * l);
  for (Index p = 0; p < l; ++p)
    for (Index q = 0; q < l; ++q) b.block(p * m, q * n, m, n) = a.slice(((p - q) % l + l) % l);
  return b;
}

Mat unfold(const TubalMatrix& a) {
  Mat u(a.rows() * a.tubes(), a.cols());
  for (Index k = 0; k < a.tubes(); ++k) u.middleRows(k * a.rows(), a.rows()) = a.slice(k);
  return u;
}

TubalMatrix fold(const Mat& stacked, Index tubes) {
  if (tubes < 1 || stacked.rows() % tubes != 0) throw shape_error("fold: rows not divisible by tubes");
  Index m = stacked.rows() / tubes;
  TubalMatrix t(m, stacked.cols(), tubes);
  for (Index k = 0; k < tubes; ++k) t.slice(k) = stacked.middleRows(k * m, m);
  return t;
}

}  // namespace tesp
