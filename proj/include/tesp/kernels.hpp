#pragma once

#include "tesp/tubal.hpp"

#include <complex>
#include <vector>

// Slice-parallel kernels. Every kernel has a plain serial reference and an
// OpenMP version; both produce the same values up to summation order.
namespace tesp::kernels {

enum class Exec { serial, parallel };

Exec default_exec();
void set_default_exec(Exec e);

using cplx = std::complex<double>;

// Dense table of equally sized complex blocks indexed by (i, j, k).
class BlockTable {
 public:
  BlockTable() = default;
  BlockTable(Index ni, Index nj, Index nk, Index rows, Index cols)
      : ni_(ni), nj_(nj), nk_(nk), rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(ni * nj * nk * rows * cols)) {}

  Index ni() const { return ni_; }
  Index nj() const { return nj_; }
  Index nk() const { return nk_; }
  Index block_rows() const { return rows_; }
  Index block_cols() const { return cols_; }

  cplx* ptr(Index i, Index j, Index k) { return data_.data() + offset(i, j, k); }
  const cplx* ptr(Index i, Index j, Index k) const { return data_.data() + offset(i, j, k); }
  Eigen::Map<CMat> block(Index i, Index j, Index k) { return {ptr(i, j, k), rows_, cols_}; }
  Eigen::Map<const CMat> block(Index i, Index j, Index k) const { return {ptr(i, j, k), rows_, cols_}; }

  std::vector<cplx>& raw() { return data_; }
  const std::vector<cplx>& raw() const { return data_; }

 private:
  std::size_t offset(Index i, Index j, Index k) const {
    return static_cast<std::size_t>(((i * nj_ + j) * nk_ + k) * rows_ * cols_);
  }
  Index ni_ = 0, nj_ = 0, nk_ = 0, rows_ = 0, cols_ = 0;
  std::vector<cplx> data_;
};

// out[k] = a[k] * b[k] for every slice.
void slice_products(const std::vector<CMat>& a, const std::vector<CMat>& b, std::vector<CMat>& out,
                    Exec exec);

// table(i, j, k) = left(i, 0, k) * mid[k] * right(0, j, k).
void sandwich_table(const BlockTable& left, const std::vector<CMat>& mid, const BlockTable& right,
                    BlockTable& table, Exec exec);

// table(i, j, k) -= gl(i, pivot_i, k) * table(pivot_i, pivot_j, k) * gr(pivot_j, j, k).
void rank_update_table(BlockTable& table, const BlockTable& gl, const BlockTable& gr, Index pivot_i,
                       Index pivot_j, Exec exec);

// losses(i, j) = (1/l) sum_k w_k ||table(i, j, k)||^2 over half-spectrum slices.
void loss_table(const BlockTable& table, Index tubes, Mat& losses, Exec exec);

namespace serial {
void slice_products(const std::vector<CMat>& a, const std::vector<CMat>& b, std::vector<CMat>& out);
void sandwich_table(const BlockTable& left, const std::vector<CMat>& mid, const BlockTable& right,
                    BlockTable& table);
void rank_update_table(BlockTable& table, const BlockTable& gl, const BlockTable& gr, Index pivot_i,
                       Index pivot_j);
void loss_table(const BlockTable& table, Index tubes, Mat& losses);
}  // namespace serial

namespace omp {
void slice_products(const std::vector<CMat>& a, const std::vector<CMat>& b, std::vector<CMat>& out);
void sandwich_table(const BlockTable& left, const std::vector<CMat>& mid, const BlockTable& right,
                    BlockTable& table);
void rank_update_table(BlockTable& table, const BlockTable& gl, const BlockTable& gr, Index pivot_i,
                       Index pivot_j);
void loss_table(const BlockTable& table, Index tubes, Mat& losses);
}  // namespace omp

}  // namespace tesp::kernels
