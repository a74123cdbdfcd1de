#include "tesp/analysis.hpp"

#include "tesp/errors.hpp"
#include "tesp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace tesp {

namespace {

// Orthogonal projectors Z_i = M^-1/2 A^T E_i A M^-1/2 for every left sketch.
std::vector<TubalMatrix> left_projectors(const TubalMatrix& a, const SketchSet& set, const WeightPair& w) {
  const TubalMatrix at = t_transpose(a);
  const TubalMatrix mis = w.m_inv_sqrt();
  const TubalMatrix ama = t_product(t_product(a, w.m_inverse()), at);
  const TubalMatrix left = t_product(mis, at), right = t_product(a, mis);
  std::vector<TubalMatrix> out;
  for (const auto& op : set.ops) {
    const TubalMatrix st = t_transpose(op.tensor);
    TubalMatrix e = t_product(t_product(op.tensor, t_pinv(t_product(t_product(st, ama), op.tensor))), st);
    out.push_back(t_product(t_product(left, e), right));
  }
  return out;
}

// W_j = N^-1/2 B G_j B^T N^-1/2 for every right sketch.
std::vector<TubalMatrix> right_projectors(const TubalMatrix& b, const SketchSet& set, const WeightPair& w) {
  const TubalMatrix bt = t_transpose(b);
  const TubalMatrix nis = w.n_inv_sqrt();
  const TubalMatrix bnb = t_product(t_product(bt, w.n_inverse()), b);
  const TubalMatrix left = t_product(nis, b), right = t_product(bt, nis);
  std::vector<TubalMatrix> out;
  for (const auto& op : set.ops) {
    const TubalMatrix vt = t_transpose(op.tensor);
    TubalMatrix g = t_product(t_product(op.tensor, t_pinv(t_product(t_product(vt, bnb), op.tensor))), vt);
    out.push_back(t_product(t_product(left, g), right));
  }
  return out;
}

TubalMatrix mix(const std::vector<TubalMatrix>& ts, const std::vector<double>& probs) {
  TubalMatrix acc = TubalMatrix::zeros(ts[0].rows(), ts[0].cols(), ts[0].tubes());
  for (std::size_t q = 0; q < ts.size(); ++q) acc += probs[q] * ts[q];
  return acc;
}

// Orthonormal basis of the column space of each slice; one relative cutoff for all slices.
std::vector<CMat> range_bases(const std::vector<CMat>& slices) {
  double smax = 0;
  for (const auto& s : slices) smax = std::max(smax, linalg::sigma_max(s));
  std::vector<CMat> out;
  for (const auto& s : slices) {
    Eigen::JacobiSVD<CMat> svd(s, Eigen::ComputeThinU);
    Index rank = 0;
    for (Index q = 0; q < svd.singularValues().size(); ++q)
      if (svd.singularValues()[q] > 1e-10 * smax) ++rank;
    out.push_back(svd.matrixU().leftCols(rank));
  }
  return out;
}

// Pairwise quadratic forms of a real tensor given by its half spectrum.
class PairForms {
 public:
  PairForms(std::vector<std::vector<CMat>> z, std::vector<std::vector<CMat>> w, Index tubes)
      : z_(std::move(z)), w_(std::move(w)), l_(tubes) {}

  Index qs() const { return static_cast<Index>(z_.size()); }
  Index qv() const { return static_cast<Index>(w_.size()); }
  Index h() const { return half_count(l_); }
  const CMat& z(Index i, Index k) const { return z_[i][k]; }
  const CMat& w(Index j, Index k) const { return w_[j][k]; }

  double norm_sq(const std::vector<CMat>& g) const {
    double s = 0;
    for (Index k = 0; k < h(); ++k) s += spectral_weight(k, l_) * g[k].squaredNorm();
    return s;
  }

  Mat values(const std::vector<CMat>& g) const {
    Mat q = Mat::Zero(qs(), qv());
    const double nrm = norm_sq(g);
    for (Index k = 0; k < h(); ++k) {
      if (g[k].squaredNorm() == 0) continue;
      for (Index i = 0; i < qs(); ++i) {
        CMat y = z_[i][k] * g[k];
        for (Index j = 0; j < qv(); ++j) q(i, j) += spectral_weight(k, l_) * (y * w_[j][k]).squaredNorm();
      }
    }
    return q / nrm;
  }

  // sum_ij mu_ij Z_i G W_j per slice.
  std::vector<CMat> mixed(const std::vector<CMat>& g, const Mat& mu) const {
    std::vector<CMat> out(h());
    for (Index k = 0; k < h(); ++k) {
      out[k] = CMat::Zero(g[k].rows(), g[k].cols());
      for (Index i = 0; i < qs(); ++i) {
        CMat wsum = CMat::Zero(w_[0][k].rows(), w_[0][k].cols());
        for (Index j = 0; j < qv(); ++j)
          if (mu(i, j) != 0) wsum += mu(i, j) * w_[j][k];
        out[k] += z_[i][k] * g[k] * wsum;
      }
    }
    return out;
  }

 private:
  std::vector<std::vector<CMat>> z_, w_;
  Index l_;
};

// Keep self-conjugate slices real so the half spectrum describes a real tensor.
void realify(std::vector<CMat>& g, Index tubes) {
  for (Index k = 0; k < static_cast<Index>(g.size()); ++k)
    if (k == 0 || 2 * k == tubes) {
      CMat re = g[k].real().cast<std::complex<double>>();
      CMat im = g[k].imag().cast<std::complex<double>>();
      g[k] = re.squaredNorm() >= im.squaredNorm() ? re : im;
    }
}

struct MaxQuotient {
  double lower = 0, upper = 1, restricted_p = 0;
  int iterations = 0;
};

/**
 * Bounds on min_{|g|=1, g in range} max_ij <g, P_ij g>.
 *
 * Lower bound: mirror ascent on the simplex for lambda_min(sum_ij mu_ij P_ij),
 * started from the base distribution. Upper bound: values at the eigenvectors
 * it produces, refined by smoothed-max descent on the sphere.
 */
MaxQuotient max_quotient(const PairForms& forms, const std::vector<CMat>& ua, const std::vector<CMat>& ub,
                         const std::vector<double>& pl, const std::vector<double>& pr, Index tubes,
                         const SpectrumOptions& opt, bool compute_inf) {
  const Index qs = forms.qs(), qv = forms.qv(), h = forms.h();
  std::vector<std::vector<CMat>> zr(h), wr(h);
  for (Index k = 0; k < h; ++k) {
    for (Index i = 0; i < qs; ++i) zr[k].push_back(ua[k].adjoint() * forms.z(i, k) * ua[k]);
    for (Index j = 0; j < qv; ++j) wr[k].push_back(ub[k].adjoint() * forms.w(j, k) * ub[k]);
  }

  Mat mu(qs, qv);
  for (Index i = 0; i < qs; ++i)
    for (Index j = 0; j < qv; ++j) mu(i, j) = pl[i] * pr[j];

  MaxQuotient out;
  out.lower = -1;
  std::vector<CMat> best_g;
  const double eta0 = std::sqrt(2.0 * std::log(static_cast<double>(qs * qv)) + 1.0);

  for (int it = 0; it < std::max(1, opt.max_iters); ++it) {
    double lmin = std::numeric_limits<double>::infinity();
    Index kstar = -1;
    CMat vstar;
    bool empty_range = true;
    for (Index k = 0; k < h; ++k) {
      const Index ra = ua[k].cols(), rb = ub[k].cols();
      if (ra == 0 || rb == 0) continue;
      empty_range = false;
      CMat hk = CMat::Zero(ra * rb, ra * rb);
      for (Index j = 0; j < qv; ++j) {
        CMat zs = CMat::Zero(ra, ra);
        for (Index i = 0; i < qs; ++i)
          if (mu(i, j) != 0) zs += mu(i, j) * zr[k][i];
        hk += linalg::kron(wr[k][j].transpose(), zs);
      }
      auto e = linalg::herm_eig(linalg::hermitian_part(hk));
      if (e.values[0] < lmin) {
        lmin = e.values[0];
        kstar = k;
        vstar = e.vectors.col(0);
      }
    }
    if (empty_range) {
      out.lower = out.upper = out.restricted_p = 0;
      return out;
    }
    if (it == 0) out.restricted_p = lmin;
    out.lower = std::max(out.lower, lmin);
    out.iterations = it + 1;
    if (!compute_inf) {
      out.upper = 1;
      return out;
    }

    const Index ra = ua[kstar].cols(), rb = ub[kstar].cols();
    CMat y = Eigen::Map<CMat>(vstar.data(), ra, rb);
    Mat g(qs, qv);
    for (Index i = 0; i < qs; ++i) {
      CMat zy = zr[kstar][i] * y;
      for (Index j = 0; j < qv; ++j) g(i, j) = (zy * wr[kstar][j]).squaredNorm();
    }

    std::vector<CMat> cand(h);
    for (Index k = 0; k < h; ++k) cand[k] = CMat::Zero(ua[k].rows(), ub[k].rows());
    cand[kstar] = ua[kstar] * y * ub[kstar].adjoint();
    realify(cand, tubes);
    if (forms.norm_sq(cand) > 0) {
      double val = forms.values(cand).maxCoeff();
      if (val < out.upper) {
        out.upper = val;
        best_g = cand;
      }
    }
    if (out.upper - out.lower <= opt.tol) break;

    const double eta = eta0 / std::sqrt(static_cast<double>(it + 1));
    Mat logmu = (mu.array().max(1e-300)).log().matrix() + eta * g;
    double shift = logmu.maxCoeff();
    mu = (logmu.array() - shift).exp().matrix();
    mu /= mu.sum();
  }

  // Local descent on the smoothed maximum from the best candidate.
  if (!best_g.empty() && out.upper - out.lower > opt.tol) {
    const double beta = 400.0;
    double step = 0.5;
    std::vector<CMat> gam = best_g;
    for (auto& s : gam) s /= std::sqrt(forms.norm_sq(best_g));
    Mat q = forms.values(gam);
    double cur = q.maxCoeff();
    for (int it = 0; it < opt.max_iters && step > 1e-8; ++it) {
      Mat mu_s = (beta * (q.array() - cur)).exp().matrix();
      mu_s /= mu_s.sum();
      auto grad = forms.mixed(gam, mu_s);
      std::complex<double> dot = 0;
      double nrm = 0;
      for (Index k = 0; k < h; ++k) {
        dot += spectral_weight(k, tubes) * (gam[k].array().conjugate() * grad[k].array()).sum();
        nrm += spectral_weight(k, tubes) * gam[k].squaredNorm();
      }
      std::vector<CMat> trial(h);
      for (Index k = 0; k < h; ++k) {
        CMat tangent = grad[k] - (dot.real() / nrm) * gam[k];
        trial[k] = gam[k] - step * tangent;
        trial[k] = ua[k] * (ua[k].adjoint() * trial[k] * ub[k]) * ub[k].adjoint();
      }
      realify(trial, tubes);
      double tn = forms.norm_sq(trial);
      if (!(tn > 0)) break;
      for (auto& s : trial) s /= std::sqrt(tn);
      Mat tq = forms.values(trial);
      double tv = tq.maxCoeff();
      if (tv < cur) {
        gam = std::move(trial);
        q = std::move(tq);
        cur = tv;
        step *= 1.2;
      } else {
        step *= 0.5;
      }
      if (cur - out.lower <= opt.tol) break;
    }
    out.upper = std::min(out.upper, cur);
  }
  out.upper = std::max(out.upper, out.lower);
  return out;
}

double min_eig(const CMat& m) { return linalg::herm_eig(linalg::hermitian_part(m)).values.minCoeff(); }

}  // namespace

ConvergenceReport expected_projector_spectrum(const Problem& p, const SketchSet& left, const SketchSet& right,
                                              const WeightPair& w, const SpectrumOptions& opt) {
  if (p.a.tubes() != p.b.tubes()) throw shape_error("expected_projector_spectrum: tube lengths differ");
  left.validate();
  right.validate();
  const Index r = p.r(), s = p.s(), l = p.tubes();
  if (w.m().rows() != r || w.n().rows() != s) throw shape_error("expected_projector_spectrum: weight shapes");
  if (left.ops[0].rows() != p.m() || right.ops[0].rows() != p.n())
    throw shape_error("expected_projector_spectrum: sketch shapes");
  if (r * s * l > opt.max_rsl)
    throw budget_error("expected_projector_spectrum: r*s*l = " + std::to_string(r * s * l) +
                       " exceeds " + std::to_string(opt.max_rsl));

  auto zs = left_projectors(p.a, left, w);
  auto ws = right_projectors(p.b, right, w);
  TubalMatrix ez = mix(zs, left.probs), ew = mix(ws, right.probs);

  ConvergenceReport rep;
  {
    TubalMatrix kr = t_kron(t_transpose(ew, TransposeKind::ST), ez);
    Mat bc = bcirc_expand(kr, opt.max_rsl * opt.max_rsl);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (bc + bc.transpose()), Eigen::EigenvaluesOnly);
    rep.delta_p_sq = es.eigenvalues()[0];
  }

  auto ezh = dft_half(ez), ewh = dft_half(ew);
  const Index h = half_count(l);
  std::vector<std::pair<double, double>> half_lambdas;
  double fourier = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < h; ++k) {
    double lz = min_eig(ezh[k]), lw = min_eig(ewh[k]);
    half_lambdas.emplace_back(lz, lw);
    fourier = std::min(fourier, lz * lw);
  }
  rep.delta_p_sq_fourier = fourier;
  for (Index k = 0; k < l; ++k) rep.per_slice_lambdas.push_back(half_lambdas[k < h ? k : l - k]);
  rep.assumption_holds = std::all_of(half_lambdas.begin(), half_lambdas.end(),
                                     [](const auto& pr) { return pr.first > 1e-10 && pr.second > 1e-10; });
  rep.rho = 1 - rep.delta_p_sq;

  // Range of the update operator in every Fourier slice.
  auto ah = dft_half(p.a), bh = dft_half(p.b);
  std::vector<CMat> ra(h), rb(h);
  for (Index k = 0; k < h; ++k) {
    ra[k] = w.left().inv_sqrt[k] * ah[k].adjoint();
    rb[k] = w.right().inv_sqrt[k] * bh[k];
  }
  auto ua = range_bases(ra), ub = range_bases(rb);

  std::vector<std::vector<CMat>> zh, wh;
  for (const auto& z : zs) zh.push_back(dft_half(z));
  for (const auto& x : ws) wh.push_back(dft_half(x));
  PairForms forms(std::move(zh), std::move(wh), l);
  auto mq = max_quotient(forms, ua, ub, left.probs, right.probs, l, opt, opt.compute_delta_inf);
  rep.delta_p_sq_restricted = mq.restricted_p;
  if (opt.compute_delta_inf) {
    rep.delta_inf_sq = mq.lower;
    rep.delta_inf_sq_upper = mq.upper;
    rep.delta_inf_iterations = mq.iterations;
    rep.delta_inf_approximate = mq.upper - mq.lower > opt.tol;
  }
  return rep;
}

double special_case_rho(Preset name, const TubalMatrix& a, const TubalMatrix& b) {
  if (a.tubes() != b.tubes()) throw shape_error("special_case_rho: tube lengths differ");
  const Index l = a.tubes();
  auto ah = dft_half(a), bh = dft_half(b);
  const double na = a.squared_norm(), nb = b.squared_norm();
  if (!(na > 0) || !(nb > 0)) throw domain_error("special_case_rho: zero operand");

  const bool uses_a = name != Preset::terk_right && name != Preset::tercd_right;
  const bool uses_b = name != Preset::terk_left && name != Preset::tercd_left;
  if (name == Preset::custom) throw preset_error("special_case_rho: no closed form for custom presets");

  // Minimise the per-slice product, as the factors of one slice act together.
  const Index h = half_count(l);
  std::vector<CMat> ga, gb;
  for (Index k = 0; k < h; ++k) {
    ga.push_back(ah[k] * ah[k].adjoint());
    gb.push_back(bh[k].adjoint() * bh[k]);
  }
  const double ca = linalg::psd_family_cutoff(ga), cb = linalg::psd_family_cutoff(gb);
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < h; ++k) {
    double fa = uses_a ? linalg::min_positive_eig(ga[k], ca) / na : 1.0;
    double fb = uses_b ? linalg::min_positive_eig(gb[k], cb) / nb : 1.0;
    best = std::min(best, fa * fb);
  }
  return 1 - best;
}

// ---------------------------------------------------------------------------

namespace {

Mat matrix_pinv(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = static_cast<double>(std::max(a.rows(), a.cols())) * linalg::machine_eps() *
                        (sv.size() ? sv[0] : 0.0);
  Mat out = Mat::Zero(a.cols(), a.rows());
  for (Index q = 0; q < sv.size(); ++q)
    if (sv[q] > cutoff) out += (svd.matrixV().col(q) / sv[q]) * svd.matrixU().col(q).transpose();
  return out;
}

}  // namespace

TubalMatrix oracle_step(const TubalMatrix& x, const Problem& p, const SketchOperator& s, const SketchOperator& v,
                        const WeightPair& w, Index budget) {
  p.validate();
  const Index l = p.tubes();
  if (x.rows() != p.r() || x.cols() != p.s() || x.tubes() != l) throw shape_error("oracle_step: iterate shape");
  if (s.rows() != p.m() || v.rows() != p.n()) throw shape_error("oracle_step: sketch shape");
  const Mat ba = bcirc_expand(p.a, budget), bb = bcirc_expand(p.b, budget), bc = bcirc_expand(p.c, budget);
  const Mat bx = bcirc_expand(x, budget), bs = bcirc_expand(s.tensor, budget), bv = bcirc_expand(v.tensor, budget);
  const Mat bm = bcirc_expand(w.m(), budget), bn = bcirc_expand(w.n(), budget);
  const Mat mi = matrix_pinv(bm), ni = matrix_pinv(bn);
  const Mat e = bs * matrix_pinv(bs.transpose() * ba * mi * ba.transpose() * bs) * bs.transpose();
  const Mat g = bv * matrix_pinv(bv.transpose() * bb.transpose() * ni * bb * bv) * bv.transpose();
  const Mat next = bx - mi * ba.transpose() * e * (ba * bx * bb - bc) * g * bb.transpose() * ni;
  TubalMatrix out(p.r(), p.s(), l);
  for (Index k = 0; k < l; ++k) out.slice(k) = next.block(k * p.r(), 0, p.r(), p.s());
  return out;
}

double pr_step_factor(const Mat& losses, double delta_uniform_sq) {
  const double total = losses.sum();
  if (!(total > 0)) throw parameter_error("pr_step_factor: loss table is zero");
  const double q = static_cast<double>(losses.size());
  const Mat prob = losses / total;
  const double var = prob.squaredNorm() / q - 1.0 / (q * q);
  return 1 - (1 + q * q * var) * delta_uniform_sq;
}

double empirical_rate(std::span<const RunTrace> traces) {
  if (traces.empty()) throw insufficient_data_error("empirical_rate: no traces");
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  std::size_t window = std::numeric_limits<std::size_t>::max();
  for (const auto& tr : traces) {
    if (tr.records.empty()) throw insufficient_data_error("empirical_rate: empty trace");
    window = std::min(window, tr.records.back().iter);
    for (const auto& rec : tr.records) {
      if (std::isnan(rec.err_fmn)) throw insufficient_data_error("empirical_rate: trace lacks error values");
      auto& slot = acc[rec.iter];
      slot.first += rec.err_fmn * rec.err_fmn;
      slot.second += 1;
    }
  }
  std::vector<std::pair<double, double>> pts;
  double e0 = -1;
  for (const auto& [t, v] : acc) {
    if (t > window || v.second != traces.size()) continue;
    double mean = v.first / static_cast<double>(v.second);
    if (t == 0) e0 = mean;
    pts.emplace_back(static_cast<double>(t), mean);
  }
  if (e0 > 0) {
    for (const auto& [t, mean] : pts)
      if (t == 1 && mean <= 1e-24 * e0) return 0.0;
  }
  std::vector<std::pair<double, double>> fit;
  for (const auto& [t, mean] : pts)
    if (mean > 0 && (e0 <= 0 || mean > 1e-24 * e0)) fit.emplace_back(t, std::log(mean));
  if (fit.size() < 10) throw insufficient_data_error("empirical_rate: fewer than 10 usable iterations");
  double st = 0, sy = 0;
  for (const auto& [t, y] : fit) {
    st += t;
    sy += y;
  }
  const double n = static_cast<double>(fit.size()), tm = st / n, ym = sy / n;
  double num = 0, den = 0;
  for (const auto& [t, y] : fit) {
    num += (t - tm) * (y - ym);
    den += (t - tm) * (t - tm);
  }
  return std::exp(num / den);
}

}  // namespace tesp
