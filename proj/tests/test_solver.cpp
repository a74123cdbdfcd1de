#include "oracles.hpp"
#include "solver_checks.hpp"

#include "tesp/errors.hpp"
#include "tesp/experiment.hpp"
#include "tesp/spectral_factors.hpp"
#include "tesp/solver.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

using namespace tesp;

namespace {

SketchSet single(SketchOperator op) { return SketchSet{{std::move(op)}, {1.0}}; }

MethodPreset identity_preset(const Problem& p) {
  return make_custom_preset(single(identity_sketch(p.m(), p.tubes())), single(identity_sketch(p.n(), p.tubes())),
                            WeightPair::identity(p.r(), p.s(), p.tubes()));
}

// Tensor whose Fourier slices are I + E with ||E|| <= 0.5.
TubalMatrix well_conditioned(Index n, Index l, std::mt19937_64& rng) {
  TubalMatrix e = oracle::random(n, n, l, rng);
  double worst = 0;
  for (auto& s : oracle::direct_dft(e)) worst = std::max(worst, s.norm());
  e *= 0.5 / worst;
  return TubalMatrix::identity(n, l) + e;
}

Problem problem_from(TubalMatrix a, TubalMatrix b, TubalMatrix x) {
  TubalMatrix c = t_product(t_product(a, x), b);
  return make_problem(std::move(a), std::move(b), std::move(c), std::move(x));
}

// Orthogonal tubal matrix: Fourier slices unitary with conjugate symmetry.
TubalMatrix orthogonal(Index n, Index l, std::mt19937_64& rng) {
  std::vector<CMat> half;
  for (Index k = 0; k < half_count(l); ++k) {
    CMat g = CMat::Random(n, n);
    if (k == 0 || 2 * k == l) g = g.real().cast<std::complex<double>>();
    Eigen::HouseholderQR<CMat> qr(g);
    half.push_back(qr.householderQ());
  }
  (void)rng;
  return idft_half(half, n, n, l);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

}  // namespace

TEST(Step, SolutionIsFixedPoint) {
  Problem p = gen_random_equation(5, 3, 3, 4, 3, 1);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  TubalMatrix x = tesp_step(*p.x_star, p, pre.left.ops[2], pre.right.ops[1], pre.weights);
  EXPECT_LT(max_abs_diff(x, *p.x_star), 1e-10);
}

TEST(Step, FullSketchesReachSolutionInOneStep) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    Problem p = problem_from(well_conditioned(4, 3, rng), well_conditioned(4, 3, rng), oracle::random(4, 4, 3, rng));
    MethodPreset pre = identity_preset(p);
    TubalMatrix x0 = oracle::random(4, 4, 3, rng);
    TubalMatrix x1 = tesp_step(x0, p, pre.left.ops[0], pre.right.ops[0], pre.weights);
    EXPECT_LT((x1 - *p.x_star).norm(), 1e-8);
  }
}

TEST(Step, SingleTubeMatchesMatrixKaczmarz) {
  Problem p = gen_random_equation(5, 3, 4, 6, 1, 3);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  Mat a = p.a.slice(0), b = p.b.slice(0), c = p.c.slice(0);
  std::mt19937_64 rng(4);
  Mat x = Mat::Random(3, 4);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 6; ++j) {
      Mat r = a * x * b - c;
      Mat expected = x - a.row(i).transpose() * r(i, j) * b.col(j).transpose() /
                             (a.row(i).squaredNorm() * b.col(j).squaredNorm());
      TubalMatrix xt = TubalMatrix::from_slices({x});
      TubalMatrix got = tesp_step(xt, p, pre.left.ops[i], pre.right.ops[j], pre.weights);
      EXPECT_LT((Mat(got.slice(0)) - expected).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Step, ShapeErrors) {
  Problem p = gen_random_equation(4, 3, 3, 4, 2, 5);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  EXPECT_THROW(tesp_step(TubalMatrix(2, 3, 2), p, pre.left.ops[0], pre.right.ops[0], pre.weights), shape_error);
  EXPECT_THROW(tesp_step(TubalMatrix(3, 3, 2), p, pre.right.ops[0], slice_selector(5, 0, 2), pre.weights),
               shape_error);
}

TEST(Losses, ZeroAtSolution) {
  Problem p = gen_random_equation(6, 3, 4, 5, 3, 6);
  for (Preset name : {Preset::terk_both, Preset::tercd_right}) {
    MethodPreset pre = build_preset(name, p.a, p.b);
    Mat f = sketched_losses(*p.x_star, p, pre.left, pre.right, pre.weights);
    EXPECT_GE(f.minCoeff(), 0.0);
    EXPECT_LT(f.maxCoeff(), 1e-20 * p.c.squared_norm());
  }
}

TEST(Losses, IdentitySketchesWithOrthogonalOperators) {
  std::mt19937_64 rng(7);
  Problem p = problem_from(orthogonal(4, 4, rng), orthogonal(3, 4, rng), oracle::random(4, 3, 4, rng));
  MethodPreset pre = identity_preset(p);
  TubalMatrix x = oracle::random(4, 3, 4, rng);
  Mat f = sketched_losses(x, p, pre.left, pre.right, pre.weights);
  double direct = (t_product(t_product(p.a, x), p.b) - p.c).squared_norm();
  EXPECT_NEAR(f(0, 0), direct, 1e-10 * direct);
}

TEST(Losses, MatchProjectedErrorDefinition) {
  Problem p = gen_random_equation(4, 3, 3, 4, 3, 8);
  std::mt19937_64 rng(9);
  TubalMatrix x = oracle::random(3, 3, 3, rng);
  auto check = [&](const MethodPreset& pre) {
    const WeightPair& w = pre.weights;
    Mat f = sketched_losses(x, p, pre.left, pre.right, pre.weights);
    TubalMatrix gamma = t_product(t_product(w.m_sqrt(), x - *p.x_star), w.n_sqrt());
    TubalMatrix ami = t_product(p.a, w.m_inv_sqrt()), nib = t_product(w.n_inv_sqrt(), p.b);
    for (Index i = 0; i < pre.left.size(); ++i)
      for (Index j = 0; j < pre.right.size(); ++j) {
        TubalMatrix z = t_product(t_product(t_transpose(ami),
                                            checks::sketch_projector(pre.left.ops[i].tensor,
                                                                     t_product(ami, t_transpose(ami)))),
                                  ami);
        TubalMatrix wj = t_product(t_product(nib, checks::sketch_projector(pre.right.ops[j].tensor,
                                                                          t_product(t_transpose(nib), nib))),
                                   t_transpose(nib));
        double def = t_product(t_product(z, gamma), wj).squared_norm();
        EXPECT_NEAR(f(i, j), def, 1e-8 * std::max(1.0, def)) << i << "," << j;
      }
  };
  MethodPreset terk = build_preset(Preset::terk_both, p.a, p.b);
  ASSERT_EQ(terk.left.size(), 4);
  ASSERT_EQ(terk.right.size(), 4);
  check(terk);
  SketchSet g{{gaussian_sketch(4, 2, 3, rng), gaussian_sketch(4, 2, 3, rng)}, {0.5, 0.5}};
  check(make_custom_preset(g, g, WeightPair(oracle::random_spd(3, 3, rng), oracle::random_spd(3, 3, rng))));
}

TEST(Select, MaxDistance) {
  std::mt19937_64 rng(10);
  Mat f(2, 2);
  f << 4, 0, 2, 2;
  auto ij = select_index(f, Rule::md, 0.5, {0.5, 0.5}, {0.5, 0.5}, rng);
  ASSERT_TRUE(ij);
  EXPECT_EQ(*ij, (IndexPair{0, 0}));
  Mat tie(2, 2);
  tie << 1, 3, 3, 0;
  std::mt19937_64 other(99);
  EXPECT_EQ(*select_index(tie, Rule::md, 0.5, {0.5, 0.5}, {0.5, 0.5}, rng), (IndexPair{0, 1}));
  EXPECT_EQ(*select_index(tie, Rule::md, 0.5, {0.5, 0.5}, {0.5, 0.5}, other), (IndexPair{0, 1}));
}

TEST(Select, CappedSamplingKeepsOnlyLargeLosses) {
  std::mt19937_64 rng(11);
  Mat f(2, 2);
  f << 4, 0, 2, 2;
  for (int t = 0; t < 200; ++t)
    EXPECT_EQ(*select_index(f, Rule::cs, 0.5, {0.5, 0.5}, {0.5, 0.5}, rng), (IndexPair{0, 0}));
  // theta = 0 keeps every pair at or above the mean 2.
  std::map<std::pair<Index, Index>, int> seen;
  for (int t = 0; t < 2000; ++t) {
    auto ij = *select_index(f, Rule::cs, 0.0, {0.5, 0.5}, {0.5, 0.5}, rng);
    ++seen[{ij.i, ij.j}];
  }
  EXPECT_EQ(seen.count(std::pair<Index, Index>{0, 1}), 0u);
  EXPECT_NEAR((seen[{0, 0}] / 2000.0), 0.5, 0.04);
}

TEST(Select, ProportionalFrequencies) {
  std::mt19937_64 rng(12);
  Mat f = Mat::Ones(2, 2);
  std::map<std::pair<Index, Index>, int> seen;
  const int n = 10000;
  for (int t = 0; t < n; ++t) {
    auto ij = *select_index(f, Rule::pr, 0.5, {0.5, 0.5}, {0.5, 0.5}, rng);
    ++seen[{ij.i, ij.j}];
  }
  for (const auto& [k, c] : seen) EXPECT_NEAR(static_cast<double>(c) / n, 0.25, 0.02);
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Select, BaseDistributionAndDegenerateTables) {
  std::mt19937_64 rng(13);
  Mat zero = Mat::Zero(2, 3);
  EXPECT_FALSE(select_index(zero, Rule::pr, 0.5, {0.5, 0.5}, {0.2, 0.3, 0.5}, rng));
  EXPECT_FALSE(select_index(zero, Rule::md, 0.5, {0.5, 0.5}, {0.2, 0.3, 0.5}, rng));
  EXPECT_FALSE(select_index(zero, Rule::cs, 0.5, {0.5, 0.5}, {0.2, 0.3, 0.5}, rng));
  int col2 = 0;
  for (int t = 0; t < 10000; ++t)
    if (select_index(zero, Rule::ntesp, 0.5, {0.5, 0.5}, {0.2, 0.3, 0.5}, rng)->j == 2) ++col2;
  EXPECT_NEAR(col2 / 10000.0, 0.5, 0.02);
  Mat neg = Mat::Ones(2, 2);
  neg(1, 1) = -1;
  EXPECT_THROW(select_index(neg, Rule::pr, 0.5, {0.5, 0.5}, {0.5, 0.5}, rng), parameter_error);
  EXPECT_THROW(select_index(Mat::Ones(2, 2), Rule::cs, 1.5, {0.5, 0.5}, {0.5, 0.5}, rng), parameter_error);
}

TEST(Solve, IdentityOperatorsConvergeInOneStep) {
  std::mt19937_64 rng(14);
  TubalMatrix x = oracle::random(3, 4, 3, rng);
  Problem p = problem_from(TubalMatrix::identity(3, 3), TubalMatrix::identity(4, 3), x);
  SolverConfig cfg;
  cfg.rule = Rule::ntesp;
  auto out = solve(p, identity_preset(p), cfg);
  EXPECT_EQ(out.trace.iterations, 1u);
  EXPECT_EQ(out.trace.status, RunStatus::converged);
  EXPECT_LT(max_abs_diff(out.x, x), 1e-12);
}

TEST(Solve, TerkLeftRecoversSolution) {
  Problem p = gen_random_equation(20, 10, 10, 20, 4, 15);
  MethodPreset pre = build_preset(Preset::terk_left, p.a, p.b);
  SolverConfig cfg;
  cfg.rule = Rule::ntesp;
  cfg.seed = 1;
  auto out = solve(p, pre, cfg);
  ASSERT_EQ(out.trace.status, RunStatus::converged);
  EXPECT_LT(out.trace.final_rrn, 1e-4);
  EXPECT_LT(rrn(out.x, p, p.c.norm()), 1e-4);
  EXPECT_LT((out.x - *p.x_star).norm() / p.x_star->norm(), 1e-3);
}

TEST(Solve, MaxDistanceBeatsNonadaptive) {
  Problem p = gen_random_equation(20, 10, 10, 20, 4, 15);
  MethodPreset pre = build_preset(Preset::terk_left, p.a, p.b);
  std::vector<double> md, nt;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SolverConfig cfg;
    cfg.seed = seed;
    cfg.track_error = false;
    cfg.rule = Rule::md;
    md.push_back(static_cast<double>(solve(p, pre, cfg).trace.iterations));
    cfg.rule = Rule::ntesp;
    nt.push_back(static_cast<double>(solve(p, pre, cfg).trace.iterations));
  }
  EXPECT_LT(median(md), median(nt));
}

TEST(Solve, TraceShapeAndStatus) {
  Problem p = gen_random_equation(8, 4, 4, 8, 2, 16);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  SolverConfig cfg;
  cfg.rule = Rule::cs;
  cfg.max_iters = 25;
  cfg.rrn_tol = 1e-14;
  auto out = solve(p, pre, cfg);
  EXPECT_EQ(out.trace.status, RunStatus::iteration_cap);
  EXPECT_EQ(out.trace.iterations, 25u);
  ASSERT_EQ(out.trace.records.size(), 26u);
  EXPECT_EQ(out.trace.records.front().rrn, 1.0);
  for (std::size_t t = 0; t < out.trace.records.size(); ++t) EXPECT_EQ(out.trace.records[t].iter, t);
  EXPECT_TRUE(out.trace.theory_applies);
  cfg.x0 = *p.x_star + 0.1 * TubalMatrix::identity(4, 2);
  EXPECT_FALSE(solve(p, pre, cfg).trace.theory_applies);
  cfg.rrn_tol = -1;
  EXPECT_THROW(solve(p, pre, cfg), parameter_error);
}

TEST(Solve, TraceStrideKeepsEndpoints) {
  Problem p = gen_random_equation(8, 4, 4, 8, 2, 17);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  SolverConfig cfg;
  cfg.rule = Rule::ntesp;
  cfg.trace_stride = 7;
  cfg.max_iters = 30;
  cfg.rrn_tol = 1e-14;
  auto out = solve(p, pre, cfg);
  EXPECT_EQ(out.trace.records.front().iter, 0u);
  EXPECT_EQ(out.trace.records.back().iter, 30u);
  EXPECT_EQ(out.trace.records.size(), 6u);
}

TEST(Solve, TimeCapRecorded) {
  Problem p = gen_random_equation(30, 10, 10, 30, 4, 18);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  SolverConfig cfg;
  cfg.rule = Rule::ntesp;
  cfg.max_seconds = 1e-4;
  cfg.rrn_tol = 1e-14;
  EXPECT_EQ(solve(p, pre, cfg).trace.status, RunStatus::time_cap);
}

TEST(FastPr, StartAtSolutionExitsImmediately) {
  Problem p = gen_random_equation(12, 8, 8, 12, 3, 19);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  Mat f = sketched_losses(*p.x_star, p, pre.left, pre.right, pre.weights);
  EXPECT_LT(f.maxCoeff(), 1e-20 * p.c.squared_norm());
  SolverConfig cfg;
  cfg.x0 = *p.x_star;
  auto out = fast_pr_solve(p, pre, cfg);
  EXPECT_EQ(out.trace.iterations, 0u);
  EXPECT_EQ(out.trace.status, RunStatus::converged);
}

TEST(FastPr, RecursedTableTracksDirectTable) {
  Problem p = gen_random_equation(12, 8, 8, 12, 3, 20);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  spectral::System sys(p, pre.weights);
  auto lf = spectral::left_factors(sys, spectral::sketch_spectra(pre.left));
  auto rf = spectral::right_factors(sys, spectral::sketch_spectra(pre.right));
  SolverConfig cfg;
  cfg.max_iters = 200;
  cfg.rrn_tol = 1e-14;
  cfg.refresh_period = 100000;
  double worst = 0;
  std::size_t seen = 0;
  cfg.observer = [&](const StepInfo& info) {
    auto res = spectral::residual(sys, dft_half(*info.x_next));
    kernels::BlockTable direct(lf.count(), rf.count(), sys.h, 1, 1);
    kernels::serial::sandwich_table(lf.outer, res, rf.outer, direct);
    for (std::size_t q = 0; q < direct.raw().size(); ++q)
      worst = std::max(worst, std::abs(direct.raw()[q] - info.table->raw()[q]));
    ++seen;
  };
  fast_pr_solve(p, pre, cfg);
  EXPECT_EQ(seen, 200u);
  EXPECT_LT(worst, 1e-8);
}

TEST(FastPr, MatchesPlainProportionalRule) {
  Problem p = gen_random_equation(12, 8, 8, 12, 3, 21);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  SolverConfig cfg;
  cfg.seed = 5;
  cfg.max_iters = 500;
  cfg.rrn_tol = 1e-14;
  std::vector<TubalMatrix> fast_x, plain_x;
  cfg.observer = [&](const StepInfo& info) { fast_x.push_back(*info.x_next); };
  auto fast = fast_pr_solve(p, pre, cfg);
  cfg.rule = Rule::pr;
  cfg.residual_mode = ResidualMode::direct;
  cfg.observer = [&](const StepInfo& info) { plain_x.push_back(*info.x_next); };
  auto plain = solve(p, pre, cfg);
  ASSERT_EQ(fast.trace.records.size(), plain.trace.records.size());
  for (std::size_t t = 0; t < fast.trace.records.size(); ++t)
    ASSERT_EQ(fast.trace.records[t].chosen, plain.trace.records[t].chosen) << "step " << t;
  ASSERT_EQ(fast_x.size(), 500u);
  double worst = 0;
  for (std::size_t t = 0; t < fast_x.size(); ++t) worst = std::max(worst, max_abs_diff(fast_x[t], plain_x[t]));
  EXPECT_LT(worst, 1e-8);
}

TEST(Rrn, Examples) {
  Problem p = gen_random_equation(6, 3, 3, 5, 2, 22);
  TubalMatrix x0(3, 3, 2);
  double base = residual_norm(x0, p);
  EXPECT_DOUBLE_EQ(rrn(x0, p, base), 1.0);
  EXPECT_LT(rrn(*p.x_star, p, base), 1e-12);
  // Residual is affine in X, so moving halfway to the solution halves it.
  EXPECT_NEAR(rrn(0.5 * *p.x_star, p, base), 0.5, 1e-12);
  EXPECT_EQ(rrn(x0, p, 0.0), 0.0);
}

TEST(Properties, ExactDescentMonotoneAndRevisit) {
  Problem p = gen_random_equation(10, 5, 5, 10, 3, 23);
  for (Preset name : {Preset::terk_both, Preset::tercd_both, Preset::terk_rcd}) {
    MethodPreset pre = build_preset(name, p.a, p.b);
    for (Rule rule : {Rule::ntesp, Rule::md, Rule::pr, Rule::cs}) {
      for (ResidualMode mode : {ResidualMode::recursive, ResidualMode::direct}) {
        SolverConfig cfg;
        cfg.rule = rule;
        cfg.residual_mode = mode;
        cfg.max_iters = 60;
        cfg.rrn_tol = 1e-12;
        cfg.seed = 3;
        auto rep = checks::descent_check(p, pre, cfg);
        std::string tag = to_string(name) + " " + to_string(rule);
        EXPECT_EQ(rep.steps, 60u) << tag;
        EXPECT_LT(rep.identity, 1e-8) << tag;
        EXPECT_LT(rep.monotone, 1e-12) << tag;
        EXPECT_LT(rep.revisit, 1e-10) << tag;
      }
    }
  }
}

TEST(Properties, ExactDescentForStreamedSketches) {
  Problem p = gen_random_equation(10, 5, 5, 10, 4, 24);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  for (SketchKind kind : {SketchKind::gaussian, SketchKind::sampling})
    for (bool per_slice : {false, true}) {
      SolverConfig cfg;
      cfg.rule = Rule::stream;
      cfg.stream.kind = kind;
      cfg.stream.left_width = 3;
      cfg.stream.right_width = 2;
      cfg.stream.per_slice_sketch = per_slice;
      cfg.max_iters = 40;
      cfg.rrn_tol = 1e-12;
      auto rep = checks::descent_check(p, pre, cfg);
      EXPECT_EQ(rep.steps, 40u);
      EXPECT_LT(rep.identity, 1e-8);
      EXPECT_LT(rep.monotone, 1e-12);
      EXPECT_LT(rep.revisit, 1e-10);
    }
}

TEST(Properties, SketchProjectorsAreIdempotent) {
  std::mt19937_64 rng(25);
  Problem p = gen_random_equation(5, 3, 4, 6, 3, 25);
  WeightPair w(oracle::random_spd(3, 3, rng), oracle::random_spd(4, 3, rng));
  TubalMatrix ami = t_product(p.a, w.m_inv_sqrt()), nib = t_product(w.n_inv_sqrt(), p.b);
  std::vector<SketchOperator> lefts{gaussian_sketch(5, 2, 3, rng), sampling_sketch(5, 3, 3, rng),
                                    slice_selector(5, 4, 3)};
  std::vector<SketchOperator> rights{gaussian_sketch(6, 2, 3, rng), sampling_sketch(6, 2, 3, rng),
                                     slice_selector(6, 0, 3)};
  for (const auto& s : lefts) {
    TubalMatrix z = t_product(
        t_product(t_transpose(ami), checks::sketch_projector(s.tensor, t_product(ami, t_transpose(ami)))), ami);
    EXPECT_LT(max_abs_diff(t_product(z, z), z), 1e-9);
  }
  for (const auto& v : rights) {
    TubalMatrix wj = t_product(
        t_product(nib, checks::sketch_projector(v.tensor, t_product(t_transpose(nib), nib))), t_transpose(nib));
    EXPECT_LT(max_abs_diff(t_product(wj, wj), wj), 1e-9);
  }
}

TEST(Properties, SeedDeterminism) {
  Problem p = gen_random_equation(10, 5, 5, 10, 3, 26);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  for (Rule rule : {Rule::ntesp, Rule::pr, Rule::cs, Rule::stream}) {
    SolverConfig cfg;
    cfg.rule = rule;
    cfg.seed = 77;
    cfg.max_iters = 300;
    auto a = solve(p, pre, cfg), b = solve(p, pre, cfg);
    ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
    for (std::size_t t = 0; t < a.trace.records.size(); ++t) {
      EXPECT_EQ(a.trace.records[t].rrn, b.trace.records[t].rrn);
      EXPECT_EQ(a.trace.records[t].chosen, b.trace.records[t].chosen);
      EXPECT_EQ(a.trace.records[t].err_fmn, b.trace.records[t].err_fmn);
    }
    EXPECT_EQ(max_abs_diff(a.x, b.x), 0.0);
    EXPECT_EQ(a.trace.status, b.trace.status);
  }
}

TEST(Properties, SerialAndParallelKernelsAgree) {
  Problem p = gen_random_equation(30, 10, 10, 30, 4, 27);
  MethodPreset pre = build_preset(Preset::terk_both, p.a, p.b);
  SolverConfig cfg;
  cfg.rule = Rule::md;
  cfg.max_iters = 200;
  cfg.exec = kernels::Exec::serial;
  auto a = solve(p, pre, cfg);
  cfg.exec = kernels::Exec::parallel;
  auto b = solve(p, pre, cfg);
  for (std::size_t t = 0; t < a.trace.records.size(); ++t)
    EXPECT_EQ(a.trace.records[t].chosen, b.trace.records[t].chosen);
  EXPECT_LT(max_abs_diff(a.x, b.x), 1e-10);
}

TEST(Rules, NamesRoundTrip) {
  for (Rule r : {Rule::ntesp, Rule::md, Rule::pr, Rule::cs, Rule::stream}) EXPECT_EQ(parse_rule(to_string(r)), r);
  EXPECT_THROW(parse_rule("greedy"), parameter_error);
}
