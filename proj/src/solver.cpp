#include "tesp/solver.hpp"

#include "tesp/errors.hpp"
#include "tesp/spectral_factors.hpp"

#include <chrono>
#include <cmath>

namespace tesp {

using kernels::BlockTable;

// ---------------------------------------------------------------------------
// Problem

void Problem::validate() const {
  const Index l = a.tubes();
  if (b.tubes() != l || c.tubes() != l) throw shape_error("problem: tube lengths differ");
  if (c.rows() != a.rows() || c.cols() != b.cols())
    throw shape_error("problem: C must be rows(A) x cols(B)");
  if (x_star && (x_star->rows() != a.cols() || x_star->cols() != b.rows() || x_star->tubes() != l))
    throw shape_error("problem: reference solution must be cols(A) x rows(B)");
  if (!a.all_finite() || !b.all_finite() || !c.all_finite() || (x_star && !x_star->all_finite()))
    throw domain_error("problem: non-finite entry");
}

Problem make_problem(TubalMatrix a, TubalMatrix b, TubalMatrix c, std::optional<TubalMatrix> x_star) {
  Problem p{std::move(a), std::move(b), std::move(c), std::move(x_star)};
  p.validate();
  if (p.x_star) {
    const double cn = p.c.norm();
    const double rn = (t_product(t_product(p.a, *p.x_star), p.b) - p.c).norm();
    if (rn > 1e-8 * std::max(cn, 1e-300) && rn > 0)
      throw domain_error("problem: reference solution does not satisfy A*X*B = C");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Names

std::string to_string(Rule r) {
  switch (r) {
    case Rule::ntesp: return "NTESP";
    case Rule::md: return "MD";
    case Rule::pr: return "PR";
    case Rule::cs: return "CS";
    case Rule::stream: return "stream";
  }
  return "?";
}

Rule parse_rule(const std::string& s) {
  for (Rule r : {Rule::ntesp, Rule::md, Rule::pr, Rule::cs, Rule::stream})
    if (s == to_string(r)) return r;
  throw parameter_error("unknown rule '" + s + "'");
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::iteration_cap: return "iteration_cap";
    case RunStatus::time_cap: return "time_cap";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Selection

namespace {

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Index drawn with probability weights[q] / sum(weights).
Index categorical(const double* weights, Index count, double total, std::mt19937_64& rng) {
  const double u = uniform01(rng) * total;
  double cum = 0;
  Index last_positive = -1;
  for (Index q = 0; q < count; ++q) {
    if (weights[q] <= 0) continue;
    cum += weights[q];
    last_positive = q;
    if (u < cum) return q;
  }
  return last_positive;
}

Index categorical(const std::vector<double>& p, std::mt19937_64& rng) {
  double total = 0;
  for (double v : p) total += v;
  return categorical(p.data(), static_cast<Index>(p.size()), total, rng);
}

void check_probs(const std::vector<double>& p, Index count, const char* side) {
  if (static_cast<Index>(p.size()) != count)
    throw parameter_error(std::string("select_index: ") + side + " probabilities do not match the table");
}

}  // namespace

std::optional<IndexPair> select_index(const Mat& losses, Rule rule, double theta,
                                      const std::vector<double>& left_probs,
                                      const std::vector<double>& right_probs, std::mt19937_64& rng) {
  const Index qs = losses.rows(), qv = losses.cols();
  if (qs == 0 || qv == 0) throw shape_error("select_index: empty loss table");
  if (!losses.allFinite() || losses.minCoeff() < 0) throw parameter_error("select_index: losses must be finite and non-negative");

  if (rule == Rule::ntesp || rule == Rule::stream) {
    check_probs(left_probs, qs, "left");
    check_probs(right_probs, qv, "right");
    Index i = categorical(left_probs, rng);
    Index j = categorical(right_probs, rng);
    return IndexPair{i, j};
  }

  const double fmax = losses.maxCoeff();
  if (fmax <= 0) return std::nullopt;

  if (rule == Rule::md) {
    IndexPair best{0, 0};
    double v = -1;
    for (Index i = 0; i < qs; ++i)
      for (Index j = 0; j < qv; ++j)
        if (losses(i, j) > v) {
          v = losses(i, j);
          best = {i, j};
        }
    return best;
  }

  // Row-major copy so sampling order matches lexicographic pair order.
  std::vector<double> w(static_cast<std::size_t>(qs * qv));
  for (Index i = 0; i < qs; ++i)
    for (Index j = 0; j < qv; ++j) w[i * qv + j] = losses(i, j);

  if (rule == Rule::cs) {
    if (!(theta >= 0 && theta <= 1)) throw parameter_error("select_index: theta must lie in [0, 1]");
    std::vector<double> pl = left_probs, pr = right_probs;
    if (pl.empty()) pl.assign(qs, 1.0 / static_cast<double>(qs));
    if (pr.empty()) pr.assign(qv, 1.0 / static_cast<double>(qv));
    check_probs(pl, qs, "left");
    check_probs(pr, qv, "right");
    double expected = 0;
    for (Index i = 0; i < qs; ++i)
      for (Index j = 0; j < qv; ++j) expected += pl[i] * pr[j] * losses(i, j);
    const double thresh = std::min(fmax, theta * fmax + (1 - theta) * expected);
    for (double& v : w)
      if (v < thresh) v = 0;
  } else if (rule != Rule::pr) {
    throw parameter_error("select_index: unsupported rule");
  }

  double total = 0;
  for (double v : w) total += v;
  Index flat = categorical(w.data(), static_cast<Index>(w.size()), total, rng);
  return IndexPair{flat / qv, flat % qv};
}

// ---------------------------------------------------------------------------
// Single step and loss tables

namespace {

void pivot_from_residual(const spectral::LeftFactors& lf, Index i, const std::vector<CMat>& res,
                         const spectral::RightFactors& rf, Index j, std::vector<CMat>& pivot) {
  pivot.resize(res.size());
  for (Index k = 0; k < static_cast<Index>(res.size()); ++k)
    pivot[k].noalias() = lf.outer.block(i, 0, k) * res[k] * rf.outer.block(0, j, k);
}

void apply_update(const spectral::LeftFactors& lf, Index i, const spectral::RightFactors& rf, Index j,
                  const std::vector<CMat>& pivot, std::vector<CMat>& x) {
  for (Index k = 0; k < static_cast<Index>(x.size()); ++k)
    x[k].noalias() -= lf.update.block(i, 0, k) * (pivot[k] * rf.update.block(0, j, k));
}

void apply_residual_update(const spectral::LeftFactors& lf, Index i, const spectral::RightFactors& rf,
                           Index j, const std::vector<CMat>& pivot, std::vector<CMat>& res) {
  for (Index k = 0; k < static_cast<Index>(res.size()); ++k)
    res[k].noalias() -= lf.through.block(i, 0, k) * (pivot[k] * rf.through.block(0, j, k));
}

void check_weights(const Problem& p, const WeightPair& w) {
  if (w.m().rows() != p.r() || w.n().rows() != p.s() || w.m().tubes() != p.tubes())
    throw shape_error("weights must be r x r x l and s x s x l");
}

}  // namespace

TubalMatrix tesp_step(const TubalMatrix& x, const Problem& p, const SketchOperator& s,
                      const SketchOperator& v, const WeightPair& w) {
  p.validate();
  check_weights(p, w);
  if (x.rows() != p.r() || x.cols() != p.s() || x.tubes() != p.tubes()) throw shape_error("tesp_step: iterate shape");
  if (s.rows() != p.m() || v.rows() != p.n()) throw shape_error("tesp_step: sketch shape");
  spectral::System sys(p, w);
  auto lf = spectral::left_factors(sys, {dft_half(s.tensor)});
  auto rf = spectral::right_factors(sys, {dft_half(v.tensor)});
  auto xh = dft_half(x);
  auto res = spectral::residual(sys, xh);
  std::vector<CMat> pivot;
  pivot_from_residual(lf, 0, res, rf, 0, pivot);
  apply_update(lf, 0, rf, 0, pivot, xh);
  return idft_half(xh, p.r(), p.s(), p.tubes());
}

Mat sketched_losses(const TubalMatrix& x, const Problem& p, const SketchSet& left, const SketchSet& right,
                    const WeightPair& w) {
  p.validate();
  check_weights(p, w);
  left.validate();
  right.validate();
  spectral::System sys(p, w);
  auto lf = spectral::left_factors(sys, spectral::sketch_spectra(left));
  auto rf = spectral::right_factors(sys, spectral::sketch_spectra(right));
  auto res = spectral::residual(sys, dft_half(x));
  BlockTable table(lf.count(), rf.count(), sys.h, lf.outer.block_rows(), rf.outer.block_cols());
  kernels::sandwich_table(lf.outer, res, rf.outer, table, kernels::default_exec());
  Mat losses;
  kernels::loss_table(table, sys.l, losses, kernels::default_exec());
  return losses;
}

double residual_norm(const TubalMatrix& x, const Problem& p) {
  return (t_product(t_product(p.a, x), p.b) - p.c).norm();
}

double rrn(const TubalMatrix& x, const Problem& p, double baseline) {
  if (baseline < 0) throw parameter_error("rrn: negative baseline");
  if (baseline == 0) return 0.0;
  return residual_norm(x, p) / baseline;
}

// ---------------------------------------------------------------------------
// Iterative driver

namespace {

using Clock = std::chrono::steady_clock;

// Half-spectrum slices of a random real sketch, drawn independently per slice.
std::vector<CMat> per_slice_draw(SketchKind kind, Index rows, Index width, Index tubes,
                                 const std::vector<double>& probs, std::mt19937_64& rng) {
  std::vector<CMat> out;
  for (Index k = 0; k < half_count(tubes); ++k) {
    SketchOperator op = kind == SketchKind::sampling ? sampling_sketch(rows, width, 1, rng, probs)
                                                     : gaussian_sketch(rows, width, 1, rng);
    out.push_back(op.tensor.slice(0).cast<std::complex<double>>());
  }
  return out;
}

SketchOperator spatial_draw(SketchKind kind, Index rows, Index width, Index tubes,
                            const std::vector<double>& probs, std::mt19937_64& rng) {
  return kind == SketchKind::sampling ? sampling_sketch(rows, width, tubes, rng, probs)
                                      : gaussian_sketch(rows, width, tubes, rng);
}

void validate_config(const SolverConfig& cfg) {
  if (!(cfg.rrn_tol > 0)) throw parameter_error("rrn_tol must be positive");
  if (!(cfg.theta >= 0 && cfg.theta <= 1)) throw parameter_error("theta must lie in [0, 1]");
  if (cfg.trace_stride < 1) throw parameter_error("trace_stride must be at least 1");
  if (cfg.refresh_period < 1) throw parameter_error("refresh_period must be at least 1");
  if (!(cfg.max_seconds > 0)) throw parameter_error("max_seconds must be positive");
  if (cfg.rule == Rule::stream && cfg.stream.kind != SketchKind::gaussian &&
      cfg.stream.kind != SketchKind::sampling)
    throw parameter_error("stream sketches must be gaussian or sampling");
}

}  // namespace

SolveResult solve(const Problem& p, const MethodPreset& preset, const SolverConfig& cfg) {
  p.validate();
  validate_config(cfg);
  check_weights(p, preset.weights);
  const bool stream = cfg.rule == Rule::stream;
  const bool adaptive = cfg.rule == Rule::md || cfg.rule == Rule::pr || cfg.rule == Rule::cs;
  const bool recursive = cfg.residual_mode == ResidualMode::recursive;
  if (!stream) {
    preset.left.validate();
    preset.right.validate();
    if (preset.left.ops[0].rows() != p.m() || preset.right.ops[0].rows() != p.n())
      throw shape_error("sketch families do not match the problem");
  }

  std::mt19937_64 rng(cfg.seed);
  spectral::System sys(p, preset.weights);
  const Index h = sys.h, l = sys.l;

  std::vector<CMat> x;
  if (cfg.x0) {
    if (cfg.x0->rows() != p.r() || cfg.x0->cols() != p.s() || cfg.x0->tubes() != l)
      throw shape_error("initial iterate must be r x s x l");
    x = dft_half(*cfg.x0);
  } else {
    x.assign(h, CMat::Zero(p.r(), p.s()));
  }
  const bool track = cfg.track_error && p.x_star.has_value();
  std::vector<CMat> xs = track ? dft_half(*p.x_star) : std::vector<CMat>{};

  auto res = spectral::residual(sys, x);
  double baseline = std::sqrt(spectral::half_squared_norm(res, l));
  if (baseline <= 1e-13 * p.c.norm()) baseline = 0;

  spectral::LeftFactors lf;
  spectral::RightFactors rf;
  BlockTable gl, gr, table;
  if (!stream) {
    lf = spectral::left_factors(sys, spectral::sketch_spectra(preset.left));
    rf = spectral::right_factors(sys, spectral::sketch_spectra(preset.right));
    if (adaptive) {
      table = BlockTable(lf.count(), rf.count(), h, lf.outer.block_rows(), rf.outer.block_cols());
      kernels::sandwich_table(lf.outer, res, rf.outer, table, cfg.exec);
      if (recursive) {
        gl = spectral::left_cross(lf);
        gr = spectral::right_cross(rf);
      }
    }
  }

  SolveResult out;
  RunTrace& trace = out.trace;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  auto current_rrn = [&] {
    return baseline > 0 ? std::sqrt(spectral::half_squared_norm(res, l)) / baseline : 0.0;
  };
  auto record = [&](std::size_t t, double rel, IndexPair ij, double loss) {
    TraceRecord rec;
    rec.iter = t;
    rec.rrn = rel;
    if (track) rec.err_fmn = std::sqrt(spectral::weighted_error_sq(sys, x, xs));
    rec.chosen = ij;
    rec.elapsed_s = elapsed();
    rec.step_loss = loss;
    trace.records.push_back(rec);
  };
  auto refresh = [&] {
    res = spectral::residual(sys, x);
    if (adaptive) kernels::sandwich_table(lf.outer, res, rf.outer, table, cfg.exec);
  };

  double rel = baseline > 0 ? 1.0 : 0.0;
  record(0, rel, {}, std::numeric_limits<double>::quiet_NaN());

  Mat losses;
  std::vector<CMat> pivot(h);
  spectral::LeftFactors lf1;
  spectral::RightFactors rf1;
  SketchOperator s_draw, v_draw;
  std::size_t t = 0;

  while (true) {
    if (rel < cfg.rrn_tol) {
      if (recursive && t > 0) {
        refresh();
        rel = current_rrn();
      }
      if (rel < cfg.rrn_tol) {
        trace.status = RunStatus::converged;
        break;
      }
    }
    if (t >= cfg.max_iters) {
      trace.status = RunStatus::iteration_cap;
      break;
    }
    if (elapsed() >= cfg.max_seconds) {
      trace.status = RunStatus::time_cap;
      break;
    }

    IndexPair ij{0, 0};
    const spectral::LeftFactors* lp = &lf;
    const spectral::RightFactors* rp = &rf;
    double step_loss = 0;

    if (adaptive) {
      kernels::loss_table(table, l, losses, cfg.exec);
      auto sel = select_index(losses, cfg.rule, cfg.theta, preset.left.probs, preset.right.probs, rng);
      if (!sel) {
        refresh();
        rel = current_rrn();
        if (rel < cfg.rrn_tol) {
          trace.status = RunStatus::converged;
          break;
        }
        std::uniform_int_distribution<Index> ui(0, lf.count() - 1), uj(0, rf.count() - 1);
        sel = IndexPair{ui(rng), uj(rng)};
      }
      ij = *sel;
      for (Index k = 0; k < h; ++k) pivot[k] = table.block(ij.i, ij.j, k);
      step_loss = losses(ij.i, ij.j);
    } else {
      if (stream) {
        const auto& st = cfg.stream;
        std::vector<CMat> sh, vh;
        if (st.per_slice_sketch) {
          sh = per_slice_draw(st.kind, p.m(), st.left_width, l, st.left_probs, rng);
          vh = per_slice_draw(st.kind, p.n(), st.right_width, l, st.right_probs, rng);
          if (cfg.observer) {
            s_draw = {idft_half(sh, p.m(), st.left_width, l), SketchKind::custom};
            v_draw = {idft_half(vh, p.n(), st.right_width, l), SketchKind::custom};
          }
        } else {
          s_draw = spatial_draw(st.kind, p.m(), st.left_width, l, st.left_probs, rng);
          v_draw = spatial_draw(st.kind, p.n(), st.right_width, l, st.right_probs, rng);
          sh = dft_half(s_draw.tensor);
          vh = dft_half(v_draw.tensor);
        }
        lf1 = spectral::left_factors(sys, {sh});
        rf1 = spectral::right_factors(sys, {vh});
        lp = &lf1;
        rp = &rf1;
      } else {
        ij.i = categorical(preset.left.probs, rng);
        ij.j = categorical(preset.right.probs, rng);
      }
      pivot_from_residual(*lp, ij.i, res, *rp, ij.j, pivot);
      step_loss = spectral::half_squared_norm(pivot, l);
    }

    apply_update(*lp, ij.i, *rp, ij.j, pivot, x);
    if (recursive) {
      apply_residual_update(*lp, ij.i, *rp, ij.j, pivot, res);
      if (adaptive) kernels::rank_update_table(table, gl, gr, ij.i, ij.j, cfg.exec);
    } else {
      refresh();
    }
    ++t;
    if (recursive && t % cfg.refresh_period == 0) refresh();
    rel = current_rrn();

    if (cfg.observer) {
      TubalMatrix xt = idft_half(x, p.r(), p.s(), l);
      StepInfo info;
      info.iter = t;
      info.chosen = ij;
      info.step_loss = step_loss;
      info.x_next = &xt;
      info.losses = adaptive ? &losses : nullptr;
      info.table = adaptive ? &table : nullptr;
      info.left = stream ? &s_draw : nullptr;
      info.right = stream ? &v_draw : nullptr;
      cfg.observer(info);
    }
    if (t % cfg.trace_stride == 0) record(t, rel, ij, step_loss);
  }

  if (trace.records.back().iter != t) {
    record(t, rel, {}, std::numeric_limits<double>::quiet_NaN());
  } else {
    trace.records.back().rrn = rel;
  }
  trace.iterations = t;
  trace.theory_applies = !cfg.x0 || cfg.x0->squared_norm() == 0;
  trace.final_rrn = rel;
  trace.seconds = elapsed();
  out.x = idft_half(x, p.r(), p.s(), l);
  return out;
}

SolveResult fast_pr_solve(const Problem& p, const MethodPreset& preset, SolverConfig cfg) {
  cfg.rule = Rule::pr;
  cfg.residual_mode = ResidualMode::recursive;
  return solve(p, preset, cfg);
}

}  // namespace tesp
