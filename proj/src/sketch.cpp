#include "tesp/sketch.hpp"

#include "tesp/errors.hpp"

#include <cmath>
#include <numeric>

namespace tesp {

void SketchSet::validate() const {
  if (ops.empty()) throw parameter_error("sketch set is empty");
  if (probs.size() != ops.size()) throw parameter_error("sketch set: one probability per operator required");
  const auto& t0 = ops.front().tensor;
  for (const auto& op : ops)
    if (!op.tensor.same_shape(t0)) throw shape_error("sketch set: operators differ in shape");
  double total = 0;
  for (double p : probs) {
    if (!(p >= 0) || !std::isfinite(p)) throw parameter_error("sketch set: negative or non-finite probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw parameter_error("sketch set: probabilities do not sum to 1");
}

SketchOperator gaussian_sketch(Index m, Index tau, Index tubes, std::mt19937_64& rng) {
  if (m < 1 || tubes < 1) throw shape_error("gaussian_sketch: bad dimensions");
  if (tau < 1 || tau > m) throw parameter_error("gaussian_sketch: width must lie in [1, m]");
  TubalMatrix t(m, tau, tubes);
  std::normal_distribution<double> g;
  for (Index j = 0; j < tau; ++j)
    for (Index i = 0; i < m; ++i) t(i, j, 0) = g(rng);
  return {std::move(t), SketchKind::gaussian};
}

SketchOperator sampling_sketch(Index m, Index tau, Index tubes, std::mt19937_64& rng,
                               const std::vector<double>& probs) {
  if (m < 1 || tubes < 1) throw shape_error("sampling_sketch: bad dimensions");
  if (tau < 1 || tau > m) throw parameter_error("sampling_sketch: width must lie in [1, m]");
  std::vector<double> p = probs.empty() ? std::vector<double>(m, 1.0 / static_cast<double>(m)) : probs;
  if (static_cast<Index>(p.size()) != m) throw parameter_error("sampling_sketch: need m probabilities");
  double total = 0;
  for (double v : p) {
    if (!(v >= 0) || !std::isfinite(v)) throw parameter_error("sampling_sketch: invalid probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw parameter_error("sampling_sketch: probabilities do not sum to 1");
  std::discrete_distribution<Index> pick(p.begin(), p.end());
  TubalMatrix t(m, tau, tubes);
  for (Index j = 0; j < tau; ++j) t(pick(rng), j, 0) = 1.0;
  return {std::move(t), SketchKind::sampling};
}

SketchOperator slice_selector(Index m, Index i, Index tubes) {
  if (i < 0 || i >= m) throw parameter_error("slice_selector: index out of range");
  TubalMatrix t(m, 1, tubes);
  t(i, 0, 0) = 1.0;
  return {std::move(t), SketchKind::lateral_slice};
}

SketchOperator identity_sketch(Index m, Index tubes) {
  return {TubalMatrix::identity(m, tubes), SketchKind::custom};
}

namespace {

const std::vector<std::pair<Preset, const char*>>& preset_names() {
  static const std::vector<std::pair<Preset, const char*>> names = {
      {Preset::terk_both, "TERK-both"},     {Preset::terk_left, "TERK-left"},
      {Preset::terk_right, "TERK-right"},   {Preset::tercd_both, "TERCD-both"},
      {Preset::tercd_left, "TERCD-left"},   {Preset::tercd_right, "TERCD-right"},
      {Preset::terk_rcd, "TERK-RCD"},       {Preset::tercd_rk, "TERCD-RK"},
      {Preset::custom, "custom"}};
  return names;
}

std::vector<double> normalised(std::vector<double> w, const char* what) {
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0)) throw preset_error(std::string(what) + ": operand has zero norm");
  for (double& v : w) v /= total;
  return w;
}

// Rows of `a` as selectors with probability proportional to squared row-slice norm.
SketchSet row_selectors(const TubalMatrix& a) {
  SketchSet s;
  std::vector<double> w(a.rows(), 0.0);
  for (Index k = 0; k < a.tubes(); ++k)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index i = 0; i < a.rows(); ++i) w[i] += a(i, j, k) * a(i, j, k);
  for (Index i = 0; i < a.rows(); ++i) s.ops.push_back(slice_selector(a.rows(), i, a.tubes()));
  s.probs = normalised(std::move(w), "row sampling");
  return s;
}

// Columns of `a` as sketches a * e_j with probability proportional to squared column-slice norm.
SketchSet column_images(const TubalMatrix& a) {
  SketchSet s;
  std::vector<double> w(a.cols(), 0.0);
  for (Index j = 0; j < a.cols(); ++j) {
    TubalMatrix c = a.col_slice(j);
    w[j] = c.squared_norm();
    s.ops.push_back({std::move(c), SketchKind::custom});
  }
  s.probs = normalised(std::move(w), "column sampling");
  return s;
}

SketchSet single_identity(Index m, Index tubes) {
  SketchSet s;
  s.ops.push_back(identity_sketch(m, tubes));
  s.probs = {1.0};
  return s;
}

TubalMatrix gram_weight(const TubalMatrix& g, Definiteness mode, const char* what) {
  bool ok = mode == Definiteness::definite ? is_t_spd(g) : is_t_spsd(g);
  if (!ok)
    throw preset_error(std::string(what) +
                       (mode == Definiteness::definite ? " is not T-symmetric positive definite"
                                                       : " is not T-symmetric positive semidefinite"));
  return g;
}

}  // namespace

std::string to_string(Preset p) {
  for (const auto& [v, n] : preset_names())
    if (v == p) return n;
  return "custom";
}

Preset parse_preset(const std::string& name) {
  for (const auto& [v, n] : preset_names())
    if (name == n) return v;
  throw parameter_error("unknown preset '" + name + "'");
}

const std::vector<Preset>& all_named_presets() {
  static const std::vector<Preset> v = {Preset::terk_both,   Preset::terk_left,  Preset::terk_right,
                                        Preset::tercd_both,  Preset::tercd_left, Preset::tercd_right,
                                        Preset::terk_rcd,    Preset::tercd_rk};
  return v;
}

MethodPreset build_preset(Preset name, const TubalMatrix& a, const TubalMatrix& b, Definiteness mode) {
  if (a.tubes() != b.tubes()) throw shape_error("build_preset: tube lengths differ");
  const Index m = a.rows(), r = a.cols(), s = b.rows(), n = b.cols(), l = a.tubes();
  if (name == Preset::custom) throw preset_error("custom presets are built with make_custom_preset");

  const bool left_rk = name == Preset::terk_both || name == Preset::terk_left || name == Preset::terk_rcd;
  const bool left_cd = name == Preset::tercd_both || name == Preset::tercd_left || name == Preset::tercd_rk;
  const bool right_rk = name == Preset::terk_both || name == Preset::terk_right || name == Preset::tercd_rk;
  const bool right_cd = name == Preset::tercd_both || name == Preset::tercd_right || name == Preset::terk_rcd;

  MethodPreset p;
  p.name = name;
  TubalMatrix mw = TubalMatrix::identity(r, l), nw = TubalMatrix::identity(s, l);
  if (left_rk) {
    p.left = row_selectors(a);
  } else if (left_cd) {
    mw = gram_weight(t_product(t_transpose(a), a), mode, "A^T A");
    p.left = column_images(a);
  } else {
    p.left = single_identity(m, l);
  }
  if (right_rk) {
    p.right = row_selectors(t_transpose(b));
  } else if (right_cd) {
    nw = gram_weight(t_product(b, t_transpose(b)), mode, "B B^T");
    p.right = column_images(t_transpose(b));
  } else {
    p.right = single_identity(n, l);
  }
  p.weights = WeightPair(std::move(mw), std::move(nw), mode);
  p.left.validate();
  p.right.validate();
  return p;
}

MethodPreset make_custom_preset(SketchSet left, SketchSet right, WeightPair weights) {
  left.validate();
  right.validate();
  return {Preset::custom, std::move(left), std::move(right), std::move(weights)};
}

}  // namespace tesp
