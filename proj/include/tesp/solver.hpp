#pragma once

#include "tesp/kernels.hpp"
#include "tesp/problem.hpp"
#include "tesp/sketch.hpp"
#include "tesp/weights.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tesp {

// Zero-based (left sketch, right sketch) pair.
struct IndexPair {
  Index i = -1;
  Index j = -1;
  bool operator==(const IndexPair&) const = default;
};

enum class Rule {
  ntesp,   // sample the pair from the base distribution
  md,      // maximum sketched loss
  pr,      // probability proportional to sketched loss
  cs,      // capped sampling
  stream   // fresh random sketches every iteration
};

std::string to_string(Rule r);
Rule parse_rule(const std::string& s);

enum class ResidualMode {
  recursive,  // residual and loss tables updated by low-rank recursion
  direct      // both recomputed from the iterate every step
};

enum class RunStatus { converged, iteration_cap, time_cap };
std::string to_string(RunStatus s);

// Distribution of the sketches drawn by the streaming rule.
struct StreamSpec {
  SketchKind kind = SketchKind::gaussian;  // gaussian or sampling
  Index left_width = 1;
  Index right_width = 1;
  std::vector<double> left_probs;   // sampling only; empty means uniform
  std::vector<double> right_probs;
  // Independent real draws for every Fourier slice instead of one spatial draw.
  bool per_slice_sketch = false;
};

struct StepInfo {
  std::size_t iter = 0;  // index of the iterate produced by this step
  IndexPair chosen;
  double step_loss = 0;                        // sketched loss of the chosen pair before the step
  const TubalMatrix* x_next = nullptr;
  const Mat* losses = nullptr;                 // adaptive rules: full loss table before the step
  const kernels::BlockTable* table = nullptr;  // adaptive rules: sketched residual table after the step
  const SketchOperator* left = nullptr;        // stream rule: the drawn sketches
  const SketchOperator* right = nullptr;
};

struct SolverConfig {
  Rule rule = Rule::pr;
  double theta = 0.5;
  double rrn_tol = 1e-4;
  std::size_t max_iters = 1'000'000;
  double max_seconds = 600;
  std::uint64_t seed = 0;
  ResidualMode residual_mode = ResidualMode::recursive;
  std::size_t refresh_period = 1000;
  std::size_t trace_stride = 1;
  bool track_error = true;
  StreamSpec stream;
  std::optional<TubalMatrix> x0;
  kernels::Exec exec = kernels::Exec::parallel;
  // Called after every step; x_next is materialised only when this is set.
  std::function<void(const StepInfo&)> observer;
};

struct TraceRecord {
  std::size_t iter = 0;
  double rrn = 0;
  double err_fmn = std::numeric_limits<double>::quiet_NaN();
  IndexPair chosen;
  double elapsed_s = 0;
  double step_loss = std::numeric_limits<double>::quiet_NaN();
};

struct RunTrace {
  std::vector<TraceRecord> records;  // starts with iteration 0
  RunStatus status = RunStatus::iteration_cap;
  std::size_t iterations = 0;
  double final_rrn = 0;
  double seconds = 0;
  // False when started away from zero, where the rate bounds are not claimed.
  bool theory_applies = true;
};

struct SolveResult {
  TubalMatrix x;
  RunTrace trace;
};

// One sketch-and-project step with sketches S (m x tau x l) and V (n x zeta x l).
TubalMatrix tesp_step(const TubalMatrix& x, const Problem& p, const SketchOperator& s,
                      const SketchOperator& v, const WeightPair& w);

// Table of f_ij(X) = ||A X B - C||^2_{F(E_i, G_j)} over all sketch pairs.
Mat sketched_losses(const TubalMatrix& x, const Problem& p, const SketchSet& left,
                    const SketchSet& right, const WeightPair& w);

/**
 * Choose a pair from a loss table.
 *
 * md picks the maximum, ties to the smallest (i, j) in row-major order.
 * pr samples proportionally to loss. cs keeps pairs whose loss reaches
 * theta * max + (1 - theta) * E[f] under the base distribution and samples
 * them proportionally. ntesp samples from the base distribution.
 * Returns nullopt when every loss is zero under an adaptive rule.
 */
std::optional<IndexPair> select_index(const Mat& losses, Rule rule, double theta,
                                      const std::vector<double>& left_probs,
                                      const std::vector<double>& right_probs, std::mt19937_64& rng);

SolveResult solve(const Problem& p, const MethodPreset& preset, const SolverConfig& cfg);

// Adaptive proportional rule with recursively maintained residual tables.
SolveResult fast_pr_solve(const Problem& p, const MethodPreset& preset, SolverConfig cfg);

// ||C - A X B|| / baseline; 0 when the baseline is 0.
double rrn(const TubalMatrix& x, const Problem& p, double baseline);
double residual_norm(const TubalMatrix& x, const Problem& p);

}  // namespace tesp
