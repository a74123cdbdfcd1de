#pragma once

#include "tesp/tubal.hpp"
#include "tesp/weights.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tesp {

enum class SketchKind { gaussian, sampling, lateral_slice, custom };

// A left or right sketch: an m x tau x l tensor applied through its t-transpose.
struct SketchOperator {
  TubalMatrix tensor;
  SketchKind kind = SketchKind::custom;

  Index rows() const { return tensor.rows(); }
  Index width() const { return tensor.cols(); }
};

// Finite family of sketches with a sampling distribution.
struct SketchSet {
  std::vector<SketchOperator> ops;
  std::vector<double> probs;

  Index size() const { return static_cast<Index>(ops.size()); }
  // Throws on empty sets, mixed shapes, or probabilities that are negative or do not sum to 1.
  void validate() const;
};

// Gaussian sketch: first frontal slice has iid N(0,1) entries, the rest are zero.
SketchOperator gaussian_sketch(Index m, Index tau, Index tubes, std::mt19937_64& rng);

// Sampling sketch: tau lateral slices of the identity drawn with replacement.
// Empty probs means uniform.
SketchOperator sampling_sketch(Index m, Index tau, Index tubes, std::mt19937_64& rng,
                               const std::vector<double>& probs = {});

// Lateral slice i of the m x m x l identity.
SketchOperator slice_selector(Index m, Index i, Index tubes);

// The identity as a single sketch.
SketchOperator identity_sketch(Index m, Index tubes);

enum class Preset {
  terk_both,
  terk_left,
  terk_right,
  tercd_both,
  tercd_left,
  tercd_right,
  terk_rcd,
  tercd_rk,
  custom
};

std::string to_string(Preset p);
Preset parse_preset(const std::string& name);
const std::vector<Preset>& all_named_presets();

struct MethodPreset {
  Preset name = Preset::custom;
  SketchSet left;
  SketchSet right;
  WeightPair weights;
};

/**
 * Sketch families and weights for a named method.
 *
 * Row and column probabilities are proportional to squared norms of the
 * horizontal or lateral slices they select. Coordinate-descent variants use
 * A^T A and B B^T as weights; in definite mode these must be T-SPD, otherwise
 * preset_error is thrown.
 */
MethodPreset build_preset(Preset name, const TubalMatrix& a, const TubalMatrix& b,
                          Definiteness mode = Definiteness::definite);

MethodPreset make_custom_preset(SketchSet left, SketchSet right, WeightPair weights);

}  // namespace tesp
