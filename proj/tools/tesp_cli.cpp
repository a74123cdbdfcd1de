// Command-line front end: solve, bench, deblur, analyze.

#include "tesp/analysis.hpp"
#include "tesp/errors.hpp"
#include "tesp/experiment.hpp"
#include "tesp/image_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace tesp;

namespace {

struct Common {
  std::vector<Index> dims{30, 10, 10, 30, 4};
  std::uint64_t seed = 0;
  double tol = 1e-4;
  std::size_t max_iters = 1'000'000;
  double max_seconds = 600;
  double theta = 0.5;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--dims", c.dims, "m,r,s,n,l")->delimiter(',')->expected(5);
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--tol", c.tol, "relative residual tolerance");
  app->add_option("--max-iters", c.max_iters, "iteration cap");
  app->add_option("--max-seconds", c.max_seconds, "wall-clock cap per run");
  app->add_option("--theta", c.theta, "capped-sampling threshold in [0,1]");
  app->add_option("--out", c.out, "output path");
}

SolverConfig config_for(const MethodSpec& ms, const Common& c) {
  SolverConfig cfg;
  cfg.rule = ms.rule;
  cfg.residual_mode = ms.residual_mode;
  cfg.stream = ms.stream;
  cfg.rrn_tol = c.tol;
  cfg.max_iters = c.max_iters;
  cfg.max_seconds = c.max_seconds;
  cfg.theta = c.theta;
  cfg.seed = c.seed;
  return cfg;
}

nlohmann::ordered_json summary(const std::string& method, const RunTrace& tr) {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["status"] = to_string(tr.status);
  j["iterations"] = tr.iterations;
  j["final_rrn"] = tr.final_rrn;
  j["seconds"] = tr.seconds;
  if (!tr.records.empty() && !std::isnan(tr.records.back().err_fmn)) j["final_err"] = tr.records.back().err_fmn;
  return j;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// Splices `key=value` lines from the --config file into the argument list
// as `--key value`, skipping keys the command line already sets.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc), out;
  std::string path;
  for (std::size_t q = 0; q < args.size(); ++q) {
    if (args[q] == "--config" && q + 1 < args.size()) {
      path = args[++q];
    } else if (args[q].rfind("--config=", 0) == 0) {
      path = args[q].substr(9);
    } else {
      out.push_back(args[q]);
    }
  }
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  auto given = [&](const std::string& flag) {
    return std::any_of(out.begin(), out.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  for (std::string line; std::getline(in, line);) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    std::string key = trim(line.substr(0, eq)), value = eq == std::string::npos ? "true" : trim(line.substr(eq + 1));
    if (given("--" + key)) continue;
    if (value == "true") {
      extra.push_back("--" + key);
    } else if (value != "false") {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

nlohmann::ordered_json psnr_value(double v) {
  if (std::isinf(v)) return "exact";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized sketch-and-project solvers for tensor equations A*X*B = C"};
  app.require_subcommand(1);

  Common solve_c, bench_c, deblur_c, analyze_c;

  auto* solve_cmd = app.add_subcommand("solve", "solve one random equation and optionally write its trace");
  add_common(solve_cmd, solve_c);
  std::string solve_method = "TERK-both-PR";
  solve_cmd->add_option("--method", solve_method, "method label, e.g. TERK-left, TERK-both-MD, stream-gaussian:2,2");

  auto* bench_cmd = app.add_subcommand("bench", "run repeated trials and write JSON-lines results");
  add_common(bench_cmd, bench_c);
  std::vector<std::string> bench_methods{"TERK-both", "TERK-both-PR", "TERK-both-CS", "TERK-both-MD"};
  int trials = 10;
  std::size_t stride = 1;
  std::string trace_dir;
  bool parallel_trials = false;
  bench_cmd->add_option("--method,--methods", bench_methods, "comma-separated method labels")->delimiter(',');
  bench_cmd->add_option("--trials", trials, "independent trials");
  bench_cmd->add_option("--trace-stride", stride, "record every k-th iteration");
  bench_cmd->add_option("--trace-dir", trace_dir, "write one CSV trace per method and trial");
  bench_cmd->add_flag("--parallel-trials", parallel_trials, "run trials concurrently");

  auto* deblur_cmd = app.add_subcommand("deblur", "restore a blurred colour image");
  add_common(deblur_cmd, deblur_c);
  std::string deblur_method = "TERK-left";
  std::string image_path;
  std::vector<Index> image_size{32, 24};
  double sigma = 7;
  Index bandwidth = 3;
  deblur_cmd->add_option("--method", deblur_method, "method label");
  deblur_cmd->add_option("--image", image_path, "PNG, or raw planar float32 with --image-size");
  deblur_cmd->add_option("--image-size", image_size, "height,width")->delimiter(',')->expected(2);
  deblur_cmd->add_option("--sigma", sigma, "blur width");
  deblur_cmd->add_option("--bandwidth", bandwidth, "blur half bandwidth");

  auto* analyze_cmd = app.add_subcommand("analyze", "convergence factors for a preset on a random equation");
  add_common(analyze_cmd, analyze_c);
  std::string preset_name = "TERK-both";
  analyze_cmd->add_option("--preset", preset_name, "preset name");

  std::string config_path;  // consumed by expand_config before parsing
  app.add_option("--config", config_path, "flat key=value file mirroring the flags; command-line flags take precedence");

  try {
    app.name(argv[0]);
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }

  try {
    if (*solve_cmd) {
      auto& c = solve_c;
      Problem p = gen_random_equation(c.dims[0], c.dims[1], c.dims[2], c.dims[3], c.dims[4], c.seed);
      MethodSpec ms = parse_method(solve_method);
      MethodPreset preset = build_preset(ms.rule == Rule::stream ? Preset::terk_both : ms.preset, p.a, p.b);
      auto res = solve(p, preset, config_for(ms, c));
      if (!c.out.empty()) write_trace_csv(res.trace, c.out);
      std::cout << summary(solve_method, res.trace).dump() << '\n';
    } else if (*bench_cmd) {
      auto& c = bench_c;
      ExperimentSpec spec;
      spec.m = c.dims[0], spec.r = c.dims[1], spec.s = c.dims[2], spec.n = c.dims[3], spec.tubes = c.dims[4];
      spec.methods = bench_methods;
      spec.trials = trials;
      spec.seed = c.seed;
      spec.tol = c.tol;
      spec.max_iters = c.max_iters;
      spec.max_seconds = c.max_seconds;
      spec.theta = c.theta;
      spec.trace_stride = stride;
      spec.parallel_trials = parallel_trials;
      auto res = run_experiment(spec);
      if (!c.out.empty()) {
        write_results(res.rows, c.out);
        write_timings(res.rows, c.out + ".timing.jsonl");
      }
      if (!trace_dir.empty()) {
        std::filesystem::create_directories(trace_dir);
        for (std::size_t q = 0; q < res.rows.size(); ++q)
          for (std::size_t t = 0; t < res.traces[q].size(); ++t)
            write_trace_csv(res.traces[q][t],
                            trace_dir + "/" + res.rows[q].method + "_trial" + std::to_string(t) + ".csv");
      }
      for (const auto& row : res.rows) std::cout << result_json(row) << "  cpu_s=" << row.mean_cpu_s << '\n';
    } else if (*deblur_cmd) {
      auto& c = deblur_c;
      TubalMatrix img = image_path.empty() ? image::synthetic(image_size[0], image_size[1])
                                           : image::load(image_path, image_size[0], image_size[1]);
      DeblurSpec ds;
      ds.sigma = sigma;
      ds.bandwidth = bandwidth;
      DeblurProblem db = build_deblur_problem(img, ds);
      MethodSpec ms = parse_method(deblur_method);
      MethodPreset preset = build_preset(ms.rule == Rule::stream ? Preset::terk_both : ms.preset,
                                         db.problem.a, db.problem.b);
      auto res = solve(db.problem, preset, config_for(ms, c));
      nlohmann::ordered_json j = summary(deblur_method, res.trace);
      if (db.problem.c.same_shape(img)) j["psnr_blurred"] = psnr_value(psnr(db.problem.c, img));
      j["psnr_restored"] = psnr_value(psnr(res.x, img));
      if (!c.out.empty()) image::write_png(c.out, res.x);
      std::cout << j.dump() << '\n';
    } else if (*analyze_cmd) {
      auto& c = analyze_c;
      Problem p = gen_random_equation(c.dims[0], c.dims[1], c.dims[2], c.dims[3], c.dims[4], c.seed);
      Preset name = parse_preset(preset_name);
      MethodPreset preset = build_preset(name, p.a, p.b);
      auto rep = expected_projector_spectrum(p, preset.left, preset.right, preset.weights);
      nlohmann::ordered_json j;
      j["preset"] = preset_name;
      j["delta_p_sq"] = rep.delta_p_sq;
      j["delta_p_sq_fourier"] = rep.delta_p_sq_fourier;
      j["delta_inf_sq"] = rep.delta_inf_sq;
      j["delta_inf_sq_upper"] = rep.delta_inf_sq_upper;
      j["delta_inf_approximate"] = rep.delta_inf_approximate;
      j["rho_ntesp"] = rep.rho;
      j["rho_cs"] = rep.rho_cs(c.theta);
      j["rho_md"] = rep.rho_md();
      j["rho_closed_form"] = special_case_rho(name, p.a, p.b);
      j["assumption_holds"] = rep.assumption_holds;
      if (!c.out.empty()) std::ofstream(c.out) << j.dump(2) << '\n';
      std::cout << j.dump() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
