#pragma once

#include "tesp/problem.hpp"
#include "tesp/sketch.hpp"
#include "tesp/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tesp {

// Random consistent equation: A, X*, B with iid N(0,1) entries, C = A * X* * B.
Problem gen_random_equation(Index m, Index r, Index s, Index n, Index tubes, std::uint64_t seed);

// Banded Toeplitz blur with entries exp(-d^2 / (2 sigma^2)) / (sigma sqrt(2 pi)) for |d| <= bandwidth,
// d = i - j.
Mat gaussian_toeplitz(Index rows, Index cols, double sigma, Index bandwidth);

// Default cross-channel mixing matrix.
Eigen::Matrix3d default_channel_mix();

struct DeblurSpec {
  double sigma = 7;
  Index bandwidth = 3;
  Eigen::Matrix3d channel_mix = default_channel_mix();
  Index rows_out = 0;  // m; 0 keeps the image height
  Index cols_out = 0;  // n; 0 keeps the image width
};

struct DeblurProblem {
  Problem problem;  // x_star is the sharp image
  Mat a_blur, b_blur;
  Eigen::Matrix3d channel_mix;
};

/**
 * Colour deblurring as A * X * B = C with X the h x w x 3 image.
 *
 * A has frontal slices mix(k, 0) * a_blur, B has b_blur^T as its first slice and
 * zeros elsewhere. The mixing matrix must be circulant with rows summing to 1.
 */
DeblurProblem build_deblur_problem(const TubalMatrix& image, const DeblurSpec& spec);
DeblurProblem build_deblur_problem(const TubalMatrix& image, const Mat& a_blur, const Mat& b_blur,
                                   const Eigen::Matrix3d& mix);

// Peak signal-to-noise ratio in dB; +infinity for identical images.
double psnr(const TubalMatrix& x, const TubalMatrix& reference, double peak = 1.0);

struct MethodSpec {
  std::string label;
  Preset preset = Preset::terk_both;
  Rule rule = Rule::ntesp;
  ResidualMode residual_mode = ResidualMode::recursive;
  StreamSpec stream;
};

/**
 * Parse a method label.
 *
 *   TERK-both            sampled pairs from the preset distribution
 *   TERK-both-MD|PR|CS   adaptive rules; append "-direct" to recompute tables each step
 *   stream-gaussian:T,Z  fresh Gaussian sketches of widths T and Z (also stream-sampling);
 *                        append "-slice" for independent draws per Fourier slice
 */
MethodSpec parse_method(const std::string& label);

struct ExperimentSpec {
  enum class Kind { random, deblur };
  Kind kind = Kind::random;
  Index m = 30, r = 10, s = 10, n = 30, tubes = 4;
  std::vector<std::string> methods;
  int trials = 10;
  std::uint64_t seed = 0;
  double tol = 1e-4;
  std::size_t max_iters = 1'000'000;
  double max_seconds = 600;
  double theta = 0.5;
  std::size_t trace_stride = 1;
  bool track_error = true;
  bool parallel_trials = false;
  // deblurring
  std::string image_path;  // empty: synthetic image of image_height x image_width
  Index image_height = 32, image_width = 24;
  DeblurSpec deblur;
};

struct ResultRow {
  std::string method;
  int trials = 0;
  double mean_iterations = 0;
  double median_iterations = 0;
  double mean_cpu_s = 0;
  double mean_final_rrn = 0;
  std::optional<double> psnr;  // deblurring only
  int converged = 0;
  int iteration_capped = 0;
  int time_capped = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;                // one per method, sorted by label
  std::vector<std::vector<RunTrace>> traces;  // [method][trial]
  std::vector<std::vector<TubalMatrix>> finals;
};

// Seed of trial t derived from the master seed.
std::uint64_t trial_seed(std::uint64_t master, int trial);

ExperimentResult run_experiment(const ExperimentSpec& spec);

// One JSON object per line. Timing goes to a separate file so result files are reproducible.
std::string result_json(const ResultRow& row);
std::string timing_json(const ResultRow& row);
void write_results(const std::vector<ResultRow>& rows, const std::string& path);
void write_timings(const std::vector<ResultRow>& rows, const std::string& path);
void write_trace_csv(const RunTrace& trace, const std::string& path);

}  // namespace tesp
