#include "tesp/kernels.hpp"

#include "tesp/errors.hpp"

#include <atomic>

namespace tesp::kernels {

namespace {
std::atomic<Exec> g_exec{Exec::parallel};

// Below this many scalar multiply-adds a parallel region costs more than it saves.
constexpr double kParallelWork = 2e4;

void check_sandwich(const BlockTable& left, const std::vector<CMat>& mid, const BlockTable& right,
                    const BlockTable& table) {
  if (left.nj() != 1 || right.ni() != 1 || left.nk() != right.nk() ||
      static_cast<Index>(mid.size()) < left.nk() || table.ni() != left.ni() ||
      table.nj() != right.nj() || table.nk() != left.nk() || table.block_rows() != left.block_rows() ||
      table.block_cols() != right.block_cols())
    throw shape_error("sandwich_table: inconsistent tables");
}

void check_update(const BlockTable& t, const BlockTable& gl, const BlockTable& gr, Index pi, Index pj) {
  if (gl.ni() != t.ni() || gl.nj() != t.ni() || gr.ni() != t.nj() || gr.nj() != t.nj() ||
      gl.nk() != t.nk() || gr.nk() != t.nk() || pi < 0 || pi >= t.ni() || pj < 0 || pj >= t.nj())
    throw shape_error("rank_update_table: inconsistent tables");
}
}  // namespace

Exec default_exec() { return g_exec.load(); }
void set_default_exec(Exec e) { g_exec.store(e); }

void slice_products(const std::vector<CMat>& a, const std::vector<CMat>& b, std::vector<CMat>& out,
                    Exec exec) {
  exec == Exec::serial ? serial::slice_products(a, b, out) : omp::slice_products(a, b, out);
}

void sandwich_table(const BlockTable& left, const std::vector<CMat>& mid, const BlockTable& right,
                    BlockTable& table, Exec exec) {
  exec == Exec::serial ? serial::sandwich_table(left, mid, right, table)
                       : omp::sandwich_table(left, mid, right, table);
}

void rank_update_table(BlockTable& table, const BlockTable& gl, const BlockTable& gr, Index pi,
                       Index pj, Exec exec) {
  exec == Exec::serial ? serial::rank_update_table(table, gl, gr, pi, pj)
                       : omp::rank_update_table(table, gl, gr, pi, pj);
}

void loss_table(const BlockTable& table, Index tubes, Mat& losses, Exec exec) {
  exec == Exec::serial ? serial::loss_table(table, tubes, losses) : omp::loss_table(table, tubes, losses);
}

// ---------------------------------------------------------------------------

namespace serial {

void slice_products(const std::vector<CMat>& a, const std::vector<CMat>& b, std::vector<CMat>& out) {
  if (a.size() != b.size()) throw shape_error("slice_products: slice counts differ");
  out.resize(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
}

void sandwich_table(const BlockTable& left, const std::vector<CMat>& mid, const BlockTable& right,
                    BlockTable& table) {
  check_sandwich(left, mid, right, table);
  for (Index i = 0; i < table.ni(); ++i)
    for (Index j = 0; j < table.nj(); ++j)
      for (Index k = 0; k < table.nk(); ++k)
        table.block(i, j, k) = left.block(i, 0, k) * mid[k] * right.block(0, j, k);
}

void rank_update_table(BlockTable& table, const BlockTable& gl, const BlockTable& gr, Index pi,
                       Index pj) {
  check_update(table, gl, gr, pi, pj);
  std::vector<CMat> pivot(table.nk());
  for (Index k = 0; k < table.nk(); ++k) pivot[k] = table.block(pi, pj, k);
  for (Index i = 0; i < table.ni(); ++i)
    for (Index j = 0; j < table.nj(); ++j)
      for (Index k = 0; k < table.nk(); ++k)
        table.block(i, j, k) -= gl.block(i, pi, k) * pivot[k] * gr.block(pj, j, k);
}

void loss_table(const BlockTable& table, Index tubes, Mat& losses) {
  losses.setZero(table.ni(), table.nj());
  for (Index i = 0; i < table.ni(); ++i)
    for (Index j = 0; j < table.nj(); ++j) {
      double s = 0;
      for (Index k = 0; k < table.nk(); ++k)
        s += spectral_weight(k, tubes) * table.block(i, j, k).squaredNorm();
      losses(i, j) = s / static_cast<double>(tubes);
    }
}

}  // namespace serial

// ---------------------------------------------------------------------------

namespace omp {

void slice_products(const std::vector<CMat>& a, const std::vector<CMat>& b, std::vector<CMat>& out) {
  if (a.size() != b.size()) throw shape_error("slice_products: slice counts differ");
  out.resize(a.size());
  const Index h = static_cast<Index>(a.size());
  double work = h ? static_cast<double>(h) * a[0].rows() * a[0].cols() * b[0].cols() : 0;
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (Index k = 0; k < h; ++k) out[k].noalias() = a[k] * b[k];
}

void sandwich_table(const BlockTable& left, const std::vector<CMat>& mid, const BlockTable& right,
                    BlockTable& table) {
  check_sandwich(left, mid, right, table);
  const Index ni = table.ni(), nj = table.nj(), nk = table.nk();
  const Index tr = table.block_rows(), tc = table.block_cols();
  const Index mr = nk ? mid[0].rows() : 0, mc = nk ? mid[0].cols() : 0;
  double work = static_cast<double>(ni) * nk * tr * mr * mc + static_cast<double>(ni) * nj * nk * tr * mc * tc;
#pragma omp parallel if (work > kParallelWork)
  {
    CMat lm(tr, mc);
#pragma omp for schedule(static) collapse(2)
    for (Index i = 0; i < ni; ++i)
      for (Index k = 0; k < nk; ++k) {
        lm.noalias() = left.block(i, 0, k) * mid[k];
        for (Index j = 0; j < nj; ++j) table.block(i, j, k).noalias() = lm * right.block(0, j, k);
      }
  }
}

void rank_update_table(BlockTable& table, const BlockTable& gl, const BlockTable& gr, Index pi,
                       Index pj) {
  check_update(table, gl, gr, pi, pj);
  const Index ni = table.ni(), nj = table.nj(), nk = table.nk();
  const Index tr = table.block_rows(), tc = table.block_cols();
  double work = static_cast<double>(ni) * nj * nk * (tr * tc * tc + tr * tr * tc);

  if (tr == 1 && tc == 1) {
    std::vector<cplx> pivot(nk);
    for (Index k = 0; k < nk; ++k) pivot[k] = *table.ptr(pi, pj, k);
#pragma omp parallel for schedule(static) if (work > kParallelWork)
    for (Index i = 0; i < ni; ++i)
      for (Index k = 0; k < nk; ++k) {
        const cplx lp = *gl.ptr(i, pi, k) * pivot[k];
        if (lp == cplx(0)) continue;
        for (Index j = 0; j < nj; ++j) *table.ptr(i, j, k) -= lp * *gr.ptr(pj, j, k);
      }
    return;
  }

  std::vector<CMat> pivot(nk);
  for (Index k = 0; k < nk; ++k) pivot[k] = table.block(pi, pj, k);
#pragma omp parallel if (work > kParallelWork)
  {
    CMat lp(tr, tc);
#pragma omp for schedule(static) collapse(2)
    for (Index i = 0; i < ni; ++i)
      for (Index k = 0; k < nk; ++k) {
        lp.noalias() = gl.block(i, pi, k) * pivot[k];
        for (Index j = 0; j < nj; ++j) table.block(i, j, k).noalias() -= lp * gr.block(pj, j, k);
      }
  }
}

void loss_table(const BlockTable& table, Index tubes, Mat& losses) {
  const Index ni = table.ni(), nj = table.nj(), nk = table.nk();
  const Index bs = table.block_rows() * table.block_cols();
  losses.resize(ni, nj);
  const double inv_l = 1.0 / static_cast<double>(tubes);
#pragma omp parallel for schedule(static) if (static_cast<double>(ni) * nj * nk * bs > kParallelWork)
  for (Index i = 0; i < ni; ++i)
    for (Index j = 0; j < nj; ++j) {
      double s = 0;
      for (Index k = 0; k < nk; ++k) {
        const cplx* p = table.ptr(i, j, k);
        double b = 0;
        for (Index q = 0; q < bs; ++q) b += std::norm(p[q]);
        s += spectral_weight(k, tubes) * b;
      }
      losses(i, j) = s * inv_l;
    }
}

}  // namespace omp

}  // namespace tesp::kernels
