#pragma once

#include "tesp/problem.hpp"
#include "tesp/sketch.hpp"
#include "tesp/solver.hpp"
#include "tesp/weights.hpp"

#include <span>
#include <utility>
#include <vector>

namespace tesp {

struct ConvergenceReport {
  // Smallest eigenvalue of the block-circulant expansion of E[W_j (x) Z_i].
  double delta_p_sq = 0;
  // Same quantity as min over Fourier slices of lambda_min(E Z_k) * lambda_min(E W_k).
  double delta_p_sq_fourier = 0;
  // Smallest eigenvalue restricted to the range of the update operator.
  double delta_p_sq_restricted = 0;
  // Min over the unit sphere (in the range) of the largest pairwise Rayleigh quotient.
  // delta_inf_sq is a certified lower bound, delta_inf_sq_upper an attained value.
  double delta_inf_sq = 0;
  double delta_inf_sq_upper = 0;
  bool delta_inf_approximate = true;
  int delta_inf_iterations = 0;
  bool assumption_holds = false;
  double rho = 1;  // 1 - delta_p_sq
  // (lambda_min(E Z_k), lambda_min(E W_k)) for every Fourier slice k.
  std::vector<std::pair<double, double>> per_slice_lambdas;

  double rho_md() const { return 1 - delta_inf_sq; }
  double rho_cs(double theta) const { return 1 - theta * delta_inf_sq - (1 - theta) * delta_p_sq; }
};

struct SpectrumOptions {
  Index max_rsl = 2000;     // refuse when r * s * l exceeds this
  double tol = 1e-6;        // gap target for the max-quotient bounds
  int max_iters = 500;
  bool compute_delta_inf = true;
};

ConvergenceReport expected_projector_spectrum(const Problem& p, const SketchSet& left,
                                              const SketchSet& right, const WeightPair& w,
                                              const SpectrumOptions& opt = {});

// Closed-form factor 1 - delta^2 for the named presets, from smallest positive
// eigenvalues of the Fourier slices of A and B.
double special_case_rho(Preset name, const TubalMatrix& a, const TubalMatrix& b);

// One step computed on explicit block-circulant matrices; budget-limited.
TubalMatrix oracle_step(const TubalMatrix& x, const Problem& p, const SketchOperator& s,
                        const SketchOperator& v, const WeightPair& w, Index budget = kBcircBudget);

// Per-iteration factor 1 - (1 + q^2 Var[p]) * delta_uniform_sq of the proportional rule
// for a loss table, where p is the normalised table and q its size.
double pr_step_factor(const Mat& losses, double delta_uniform_sq);

// exp of the least-squares slope of log(mean squared weighted error) over the
// iterations recorded in every trace. Returns 0 when the error vanishes after one step.
double empirical_rate(std::span<const RunTrace> traces);

}  // namespace tesp
