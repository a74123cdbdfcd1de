#include "tesp/spectral_factors.hpp"

#include "tesp/errors.hpp"
#include "tesp/linalg.hpp"

namespace tesp::spectral {

System::System(const Problem& p, const WeightPair& w)
    : m(p.m()), r(p.r()), s(p.s()), n(p.n()), l(p.tubes()), h(half_count(p.tubes())),
      a(dft_half(p.a)), b(dft_half(p.b)), c(dft_half(p.c)), mw(w.left()), nw(w.right()) {
  if (w.m().rows() != r || w.n().rows() != s || w.m().tubes() != l)
    throw shape_error("weights do not match the problem");
  for (Index k = 0; k < h; ++k) {
    a_h.push_back(a[k].adjoint());
    b_h.push_back(b[k].adjoint());
  }
}

std::vector<std::vector<CMat>> sketch_spectra(const SketchSet& set) {
  std::vector<std::vector<CMat>> out;
  out.reserve(set.ops.size());
  for (const auto& op : set.ops) out.push_back(dft_half(op.tensor));
  return out;
}

LeftFactors left_factors(const System& sys, const std::vector<std::vector<CMat>>& sketches) {
  const Index q = static_cast<Index>(sketches.size());
  if (q == 0) throw parameter_error("left_factors: no sketches");
  const Index tau = sketches[0][0].cols();
  LeftFactors f{BlockTable(q, 1, sys.h, tau, sys.m), BlockTable(q, 1, sys.h, sys.r, tau),
                BlockTable(q, 1, sys.h, sys.m, tau)};
  bool bad_shape = false;
#pragma omp parallel for schedule(dynamic) if (q * sys.h * sys.m * sys.r > 20000)
  for (Index i = 0; i < q; ++i) {
    const auto& sk = sketches[i];
    if (static_cast<Index>(sk.size()) < sys.h || sk[0].rows() != sys.m || sk[0].cols() != tau) {
      bad_shape = true;
      continue;
    }
    std::vector<CMat> mas(sys.h), gram(sys.h);
    for (Index k = 0; k < sys.h; ++k) {
      CMat as = sys.a_h[k] * sk[k];
      mas[k] = sys.mw.identity ? as : CMat(sys.mw.inverse[k] * as);
      gram[k] = as.adjoint() * mas[k];
    }
    const double cutoff = linalg::psd_family_cutoff(gram);
    for (Index k = 0; k < sys.h; ++k) {
      CMat fac = linalg::psd_pinv_factor(gram[k], cutoff);
      f.outer.block(i, 0, k) = fac.adjoint() * sk[k].adjoint();
      f.update.block(i, 0, k) = mas[k] * fac;
      f.through.block(i, 0, k) = sys.a[k] * f.update.block(i, 0, k);
    }
  }
  if (bad_shape) throw shape_error("left sketch does not match the problem");
  return f;
}

RightFactors right_factors(const System& sys, const std::vector<std::vector<CMat>>& sketches) {
  const Index q = static_cast<Index>(sketches.size());
  if (q == 0) throw parameter_error("right_factors: no sketches");
  const Index zeta = sketches[0][0].cols();
  RightFactors f{BlockTable(1, q, sys.h, sys.n, zeta), BlockTable(1, q, sys.h, zeta, sys.s),
                 BlockTable(1, q, sys.h, zeta, sys.n)};
  bool bad_shape = false;
#pragma omp parallel for schedule(dynamic) if (q * sys.h * sys.n * sys.s > 20000)
  for (Index j = 0; j < q; ++j) {
    const auto& sk = sketches[j];
    if (static_cast<Index>(sk.size()) < sys.h || sk[0].rows() != sys.n || sk[0].cols() != zeta) {
      bad_shape = true;
      continue;
    }
    std::vector<CMat> nbv(sys.h), gram(sys.h);
    for (Index k = 0; k < sys.h; ++k) {
      CMat bv = sys.b[k] * sk[k];
      nbv[k] = sys.nw.identity ? bv : CMat(sys.nw.inverse[k] * bv);
      gram[k] = bv.adjoint() * nbv[k];
    }
    const double cutoff = linalg::psd_family_cutoff(gram);
    for (Index k = 0; k < sys.h; ++k) {
      CMat fac = linalg::psd_pinv_factor(gram[k], cutoff);
      f.outer.block(0, j, k) = sk[k] * fac;
      f.update.block(0, j, k) = fac.adjoint() * nbv[k].adjoint();
      f.through.block(0, j, k) = f.update.block(0, j, k) * sys.b[k];
    }
  }
  if (bad_shape) throw shape_error("right sketch does not match the problem");
  return f;
}

BlockTable left_cross(const LeftFactors& f) {
  const Index q = f.count(), h = f.outer.nk(), tau = f.outer.block_rows();
  BlockTable g(q, q, h, tau, tau);
#pragma omp parallel for schedule(static) if (q * q * h > 4096)
  for (Index i = 0; i < q; ++i)
    for (Index v = 0; v < q; ++v)
      for (Index k = 0; k < h; ++k) g.block(i, v, k).noalias() = f.outer.block(i, 0, k) * f.through.block(v, 0, k);
  return g;
}

BlockTable right_cross(const RightFactors& f) {
  const Index q = f.count(), h = f.outer.nk(), zeta = f.outer.block_cols();
  BlockTable g(q, q, h, zeta, zeta);
#pragma omp parallel for schedule(static) if (q * q * h > 4096)
  for (Index j = 0; j < q; ++j)
    for (Index w = 0; w < q; ++w)
      for (Index k = 0; k < h; ++k) g.block(j, w, k).noalias() = f.through.block(0, j, k) * f.outer.block(0, w, k);
  return g;
}

std::vector<CMat> residual(const System& sys, const std::vector<CMat>& x) {
  std::vector<CMat> res(sys.h);
  for (Index k = 0; k < sys.h; ++k) res[k] = sys.a[k] * x[k] * sys.b[k] - sys.c[k];
  return res;
}

double half_squared_norm(const std::vector<CMat>& slices, Index tubes) {
  double s = 0;
  for (Index k = 0; k < static_cast<Index>(slices.size()); ++k)
    s += spectral_weight(k, tubes) * slices[k].squaredNorm();
  return s / static_cast<double>(tubes);
}

double weighted_error_sq(const System& sys, const std::vector<CMat>& x, const std::vector<CMat>& y) {
  double s = 0;
  for (Index k = 0; k < sys.h; ++k) {
    CMat d = x[k] - y[k];
    if (!sys.mw.identity) d = sys.mw.sqrt[k] * d;
    if (!sys.nw.identity) d = d * sys.nw.sqrt[k];
    s += spectral_weight(k, sys.l) * d.squaredNorm();
  }
  return s / static_cast<double>(sys.l);
}

}  // namespace tesp::spectral
