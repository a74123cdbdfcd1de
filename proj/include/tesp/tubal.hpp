#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace tesp {

using Index = Eigen::Index;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

/**
 * Real third-order tensor of size rows x cols x tubes.
 *
 * Entries are stored column-major inside each frontal slice and slices are
 * contiguous, so entry (i, j, k) lives at i + rows * (j + cols * k).
 */
class TubalMatrix {
 public:
  TubalMatrix() = default;
  TubalMatrix(Index rows, Index cols, Index tubes);
  TubalMatrix(Index rows, Index cols, Index tubes, std::vector<double> data);

  static TubalMatrix zeros(Index rows, Index cols, Index tubes) { return {rows, cols, tubes}; }
  static TubalMatrix identity(Index n, Index tubes);
  static TubalMatrix from_slices(const std::vector<Mat>& slices);
  static TubalMatrix from_first_slice(const Mat& first, Index tubes);
  static TubalMatrix random_normal(Index rows, Index cols, Index tubes, std::mt19937_64& rng);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index tubes() const { return tubes_; }
  Index size() const { return rows_ * cols_ * tubes_; }
  bool same_shape(const TubalMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && tubes_ == o.tubes_;
  }

  double operator()(Index i, Index j, Index k) const { return data_[i + rows_ * (j + cols_ * k)]; }
  double& operator()(Index i, Index j, Index k) { return data_[i + rows_ * (j + cols_ * k)]; }

  Eigen::Map<const Mat> slice(Index k) const {
    return {data_.data() + rows_ * cols_ * k, rows_, cols_};
  }
  Eigen::Map<Mat> slice(Index k) { return {data_.data() + rows_ * cols_ * k, rows_, cols_}; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  // Horizontal slice i as a 1 x cols x tubes tensor.
  TubalMatrix row_slice(Index i) const;
  // Lateral slice j as a rows x 1 x tubes tensor.
  TubalMatrix col_slice(Index j) const;
  // Tube (i, j, :).
  Eigen::VectorXd tube(Index i, Index j) const;

  double squared_norm() const;
  double norm() const;
  bool all_finite() const;

  TubalMatrix& operator+=(const TubalMatrix& o);
  TubalMatrix& operator-=(const TubalMatrix& o);
  TubalMatrix& operator*=(double s);

 private:
  Index rows_ = 0, cols_ = 0, tubes_ = 0;
  std::vector<double> data_;
};

TubalMatrix operator+(TubalMatrix a, const TubalMatrix& b);
TubalMatrix operator-(TubalMatrix a, const TubalMatrix& b);
TubalMatrix operator*(double s, TubalMatrix a);

// Largest absolute entry of a - b.
double max_abs_diff(const TubalMatrix& a, const TubalMatrix& b);
// Frobenius inner product.
double inner(const TubalMatrix& a, const TubalMatrix& b);

/**
 * Fourier-domain image of a tensor: one complex frontal slice per frequency.
 *
 * Forward transform is unnormalised along the tubes, the inverse carries 1/l.
 * For real-origin tensors slice l-k is the conjugate of slice k, so only the
 * first half_count() slices carry information.
 */
class SpectralTubal {
 public:
  SpectralTubal() = default;
  SpectralTubal(Index rows, Index cols, std::vector<CMat> slices, bool origin_real);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index tubes() const { return static_cast<Index>(slices_.size()); }
  Index half_count() const { return tubes() / 2 + 1; }
  bool origin_real() const { return origin_real_; }

  const CMat& operator[](Index k) const { return slices_[k]; }
  CMat& operator[](Index k) { return slices_[k]; }
  const std::vector<CMat>& slices() const { return slices_; }

 private:
  Index rows_ = 0, cols_ = 0;
  std::vector<CMat> slices_;
  bool origin_real_ = true;
};

// Number of independent Fourier slices for tube length l.
inline Index half_count(Index l) { return l / 2 + 1; }
// Multiplicity of half-spectrum slice k in a full-spectrum sum.
inline double spectral_weight(Index k, Index l) {
  return (k == 0 || 2 * k == l) ? 1.0 : 2.0;
}

SpectralTubal dft_cube(const TubalMatrix& a);
TubalMatrix idft_cube(const SpectralTubal& s);

// Half-spectrum slices only; the conjugate partners are not formed.
std::vector<CMat> dft_half(const TubalMatrix& a);
// Inverse of dft_half for a real tensor with the given shape.
TubalMatrix idft_half(const std::vector<CMat>& half, Index rows, Index cols, Index tubes);

TubalMatrix t_product(const TubalMatrix& a, const TubalMatrix& b);

enum class TransposeKind { T, ST, R };
TubalMatrix t_transpose(const TubalMatrix& a, TransposeKind kind = TransposeKind::T);

TubalMatrix t_kron(const TubalMatrix& a, const TubalMatrix& b);
TubalMatrix vec_t(const TubalMatrix& a);
TubalMatrix unvec_t(const TubalMatrix& v, Index rows, Index cols);
TubalMatrix t_pinv(const TubalMatrix& a);
TubalMatrix t_sqrt(const TubalMatrix& a);
TubalMatrix t_inverse(const TubalMatrix& a);

bool is_t_spd(const TubalMatrix& a, double tol = 1e-10);
bool is_t_spsd(const TubalMatrix& a, double tol = 1e-10);

inline constexpr Index kBcircBudget = 40000;

Mat bcirc_expand(const TubalMatrix& a, Index budget = kBcircBudget);
Mat unfold(const TubalMatrix& a);
TubalMatrix fold(const Mat& stacked, Index tubes);

}  // namespace tesp
