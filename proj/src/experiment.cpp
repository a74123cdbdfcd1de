#include "tesp/experiment.hpp"

#include "tesp/errors.hpp"
#include "tesp/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

namespace tesp {

Problem gen_random_equation(Index m, Index r, Index s, Index n, Index tubes, std::uint64_t seed) {
  if (m < 1 || r < 1 || s < 1 || n < 1 || tubes < 1) throw shape_error("gen_random_equation: bad dimensions");
  std::mt19937_64 rng(seed);
  TubalMatrix a = TubalMatrix::random_normal(m, r, tubes, rng);
  TubalMatrix x = TubalMatrix::random_normal(r, s, tubes, rng);
  TubalMatrix b = TubalMatrix::random_normal(s, n, tubes, rng);
  TubalMatrix c = t_product(t_product(a, x), b);
  return make_problem(std::move(a), std::move(b), std::move(c), std::move(x));
}

Mat gaussian_toeplitz(Index rows, Index cols, double sigma, Index bandwidth) {
  if (rows < 1 || cols < 1) throw shape_error("gaussian_toeplitz: bad dimensions");
  if (!(sigma > 0) || bandwidth < 0) throw parameter_error("gaussian_toeplitz: need sigma > 0 and bandwidth >= 0");
  const double scale = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  Mat t = Mat::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const Index d = i - j;
      if (std::abs(d) <= bandwidth) t(i, j) = scale * std::exp(-static_cast<double>(d * d) / (2 * sigma * sigma));
    }
  return t;
}

Eigen::Matrix3d default_channel_mix() {
  Eigen::Matrix3d h;
  h << 0.3, 0.4, 0.3,
       0.3, 0.3, 0.4,
       0.4, 0.3, 0.3;
  return h;
}

DeblurProblem build_deblur_problem(const TubalMatrix& image, const Mat& a_blur, const Mat& b_blur,
                                   const Eigen::Matrix3d& mix) {
  if (image.tubes() != 3) throw shape_error("deblur: image must have three channels");
  if (a_blur.cols() != image.rows() || b_blur.cols() != image.cols())
    throw shape_error("deblur: blur operators do not match the image");
  for (Index i = 0; i < 3; ++i) {
    if (std::abs(mix.row(i).sum() - 1.0) > 1e-10) throw parameter_error("deblur: mixing rows must sum to 1");
    for (Index j = 0; j < 3; ++j)
      if (std::abs(mix(i, j) - mix((i - j + 3) % 3, 0)) > 1e-12)
        throw parameter_error("deblur: mixing matrix must be circulant");
  }
  TubalMatrix a(a_blur.rows(), a_blur.cols(), 3);
  for (Index k = 0; k < 3; ++k) a.slice(k) = mix(k, 0) * a_blur;
  TubalMatrix b = TubalMatrix::from_first_slice(b_blur.transpose(), 3);
  TubalMatrix c = t_product(t_product(a, image), b);
  return {make_problem(std::move(a), std::move(b), std::move(c), image), a_blur, b_blur, mix};
}

DeblurProblem build_deblur_problem(const TubalMatrix& image, const DeblurSpec& spec) {
  const Index m = spec.rows_out ? spec.rows_out : image.rows();
  const Index n = spec.cols_out ? spec.cols_out : image.cols();
  return build_deblur_problem(image, gaussian_toeplitz(m, image.rows(), spec.sigma, spec.bandwidth),
                              gaussian_toeplitz(n, image.cols(), spec.sigma, spec.bandwidth), spec.channel_mix);
}

double psnr(const TubalMatrix& x, const TubalMatrix& reference, double peak) {
  if (!x.same_shape(reference)) throw shape_error("psnr: shapes differ");
  const double mse = (x - reference).squared_norm() / static_cast<double>(x.size());
  if (mse == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

// ---------------------------------------------------------------------------

MethodSpec parse_method(const std::string& label) {
  MethodSpec ms;
  ms.label = label;
  std::string rest = label;
  auto strip = [&rest](const std::string& suffix) {
    if (rest.size() > suffix.size() && rest.compare(rest.size() - suffix.size(), suffix.size(), suffix) == 0) {
      rest.resize(rest.size() - suffix.size());
      return true;
    }
    return false;
  };

  if (rest.rfind("stream-", 0) == 0) {
    ms.rule = Rule::stream;
    ms.stream.per_slice_sketch = strip("-slice");
    std::string body = rest.substr(7);
    std::string kind = body.substr(0, body.find(':'));
    if (kind == "gaussian")
      ms.stream.kind = SketchKind::gaussian;
    else if (kind == "sampling")
      ms.stream.kind = SketchKind::sampling;
    else
      throw parameter_error("unknown stream sketch '" + kind + "'");
    if (auto colon = body.find(':'); colon != std::string::npos) {
      std::string widths = body.substr(colon + 1);
      auto comma = widths.find(',');
      if (comma == std::string::npos) throw parameter_error("stream widths must be T,Z");
      ms.stream.left_width = std::stol(widths.substr(0, comma));
      ms.stream.right_width = std::stol(widths.substr(comma + 1));
    }
    return ms;
  }

  if (strip("-direct")) ms.residual_mode = ResidualMode::direct;
  if (strip("-MD"))
    ms.rule = Rule::md;
  else if (strip("-PR"))
    ms.rule = Rule::pr;
  else if (strip("-CS"))
    ms.rule = Rule::cs;
  else
    ms.rule = Rule::ntesp;
  ms.preset = parse_preset(rest);
  if (ms.preset == Preset::custom) throw parameter_error("custom presets cannot be named on the command line");
  return ms;
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw parameter_error("run_experiment: trials must be positive");
  if (spec.methods.empty()) throw parameter_error("run_experiment: no methods");
  std::vector<MethodSpec> methods;
  for (const auto& lbl : spec.methods) methods.push_back(parse_method(lbl));

  std::optional<DeblurProblem> deblur;
  if (spec.kind == ExperimentSpec::Kind::deblur) {
    TubalMatrix img = spec.image_path.empty() ? image::synthetic(spec.image_height, spec.image_width)
                                              : image::load(spec.image_path, spec.image_height, spec.image_width);
    deblur = build_deblur_problem(img, spec.deblur);
  }

  const std::size_t nm = methods.size(), nt = static_cast<std::size_t>(spec.trials);
  ExperimentResult out;
  out.traces.assign(nm, std::vector<RunTrace>(nt));
  out.finals.assign(nm, std::vector<TubalMatrix>(nt));
  std::vector<std::string> errors(nt);

#pragma omp parallel for schedule(dynamic) if (spec.parallel_trials)
  for (int t = 0; t < spec.trials; ++t) {
    try {
      const std::uint64_t seed = trial_seed(spec.seed, t);
      Problem prob = deblur ? deblur->problem
                            : gen_random_equation(spec.m, spec.r, spec.s, spec.n, spec.tubes, seed);
      std::map<Preset, MethodPreset> presets;
      for (std::size_t q = 0; q < nm; ++q) {
        const auto& ms = methods[q];
        SolverConfig cfg;
        cfg.rule = ms.rule;
        cfg.residual_mode = ms.residual_mode;
        cfg.stream = ms.stream;
        cfg.theta = spec.theta;
        cfg.rrn_tol = spec.tol;
        cfg.max_iters = spec.max_iters;
        cfg.max_seconds = spec.max_seconds;
        cfg.seed = seed;
        cfg.trace_stride = spec.trace_stride;
        cfg.track_error = spec.track_error;
        const Preset key = ms.rule == Rule::stream ? Preset::terk_both : ms.preset;
        if (!presets.count(key)) presets.emplace(key, build_preset(key, prob.a, prob.b));
        auto res = solve(prob, presets.at(key), cfg);
        out.traces[q][t] = std::move(res.trace);
        out.finals[q][t] = std::move(res.x);
      }
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error("run_experiment: " + e);

  for (std::size_t q = 0; q < nm; ++q) {
    ResultRow row;
    row.method = methods[q].label;
    row.trials = spec.trials;
    std::vector<double> its;
    double psnr_sum = 0;
    bool exact = false;
    for (std::size_t t = 0; t < nt; ++t) {
      const auto& tr = out.traces[q][t];
      its.push_back(static_cast<double>(tr.iterations));
      row.mean_cpu_s += tr.seconds;
      row.mean_final_rrn += tr.final_rrn;
      row.converged += tr.status == RunStatus::converged;
      row.iteration_capped += tr.status == RunStatus::iteration_cap;
      row.time_capped += tr.status == RunStatus::time_cap;
      if (deblur) {
        double v = psnr(out.finals[q][t], *deblur->problem.x_star);
        if (std::isinf(v))
          exact = true;
        else
          psnr_sum += v;
      }
    }
    const double dn = static_cast<double>(nt);
    for (double v : its) row.mean_iterations += v / dn;
    std::sort(its.begin(), its.end());
    row.median_iterations = nt % 2 ? its[nt / 2] : 0.5 * (its[nt / 2 - 1] + its[nt / 2]);
    row.mean_cpu_s /= dn;
    row.mean_final_rrn /= dn;
    if (deblur) row.psnr = exact ? std::numeric_limits<double>::infinity() : psnr_sum / dn;
    out.rows.push_back(row);
  }
  std::vector<std::size_t> order(nm);
  for (std::size_t q = 0; q < nm; ++q) order[q] = q;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return out.rows[x].method < out.rows[y].method; });
  ExperimentResult sorted;
  for (std::size_t q : order) {
    sorted.rows.push_back(std::move(out.rows[q]));
    sorted.traces.push_back(std::move(out.traces[q]));
    sorted.finals.push_back(std::move(out.finals[q]));
  }
  return sorted;
}

// ---------------------------------------------------------------------------

std::string result_json(const ResultRow& row) {
  nlohmann::ordered_json j;
  j["method"] = row.method;
  j["trials"] = row.trials;
  j["mean_iterations"] = row.mean_iterations;
  j["median_iterations"] = row.median_iterations;
  j["mean_final_rrn"] = row.mean_final_rrn;
  if (row.psnr) {
    if (std::isinf(*row.psnr))
      j["psnr"] = "exact";
    else
      j["psnr"] = *row.psnr;
  }
  j["converged"] = row.converged;
  j["iteration_capped"] = row.iteration_capped;
  j["time_capped"] = row.time_capped;
  return j.dump();
}

std::string timing_json(const ResultRow& row) {
  nlohmann::ordered_json j;
  j["method"] = row.method;
  j["mean_cpu_s"] = row.mean_cpu_s;
  return j.dump();
}

namespace {
void write_lines(const std::vector<ResultRow>& rows, const std::string& path,
                 std::string (*fmt)(const ResultRow&)) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (const auto& r : rows) out << fmt(r) << '\n';
}
}  // namespace

void write_results(const std::vector<ResultRow>& rows, const std::string& path) {
  write_lines(rows, path, result_json);
}

void write_timings(const std::vector<ResultRow>& rows, const std::string& path) {
  write_lines(rows, path, timing_json);
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  std::fprintf(f, "iter,rrn,err_fmn,i,j,elapsed_s\n");
  for (const auto& r : trace.records)
    std::fprintf(f, "%zu,%.17g,%.17g,%td,%td,%.6f\n", r.iter, r.rrn, r.err_fmn, r.chosen.i, r.chosen.j, r.elapsed_s);
  std::fclose(f);
}

}  // namespace tesp
