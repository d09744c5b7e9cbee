// Command-line front end for the crackpath shared library. Every subcommand is
// deterministic for fixed flags and seed: all randomness flows from --seed
// through the library's documented seed-splitting function. Data outputs are
// byte-stable; the manifest sidecar records the invocation (including wall
// time, which is the one field that varies between runs).

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "crackpath.h"

namespace {

using nlohmann::json;

struct CliError {
  cp_status status;
  std::string message;
};

void check(cp_status status, const std::string& context) {
  if (status != CP_OK) {
    throw CliError{status, context + ": " + cp_last_error()};
  }
}

const char* status_name(cp_status s) {
  switch (s) {
    case CP_OK:
      return "ok";
    case CP_ERROR_INVALID_ARGUMENT:
      return "invalid_argument";
    case CP_ERROR_IO:
      return "io";
    case CP_ERROR_PARSE:
      return "parse";
    case CP_ERROR_GEOMETRY:
      return "geometry";
    case CP_ERROR_ESTIMATION:
      return "estimation";
    case CP_ERROR_SIMULATION:
      return "simulation";
    case CP_ERROR_INTERNAL:
      return "internal";
  }
  return "internal";
}

std::string take_string(char* owned) {
  std::string out = owned != nullptr ? owned : "";
  cp_string_free(owned);
  return out;
}

struct Common {
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
};

std::string resolve(const Common& common, const std::string& path) {
  if (path.empty() || path.front() == '/' || common.out_dir.empty() || common.out_dir == ".") {
    return path;
  }
  return common.out_dir + "/" + path;
}

void write_text(const std::string& path, const std::string& content) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) {
    throw CliError{CP_ERROR_IO, "cannot open for writing: " + path};
  }
  std::fwrite(content.data(), 1, content.size(), f);
  std::fclose(f);
}

class Manifest {
public:
  Manifest(std::string command, std::uint64_t seed)
      : command_(std::move(command)), seed_(seed), begin_(std::chrono::steady_clock::now()) {}

  void input(const std::string& path) { inputs_.push_back(path); }
  void output(const std::string& path) { outputs_.push_back(path); }
  void params_fingerprint(const std::string& fp) { params_fp_ = fp; }

  void write() const {
    if (outputs_.empty()) return;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - begin_).count();
    const json j{{"schema_version", 1},
                 {"command", command_},
                 {"inputs", inputs_},
                 {"outputs", outputs_},
                 {"seed", seed_},
                 {"params_fingerprint", params_fp_},
                 {"tool_version", cp_version()},
                 {"wall_time_seconds", wall}};
    write_text(outputs_.front() + ".manifest.json", j.dump(2) + "\n");
  }

private:
  std::string command_;
  std::uint64_t seed_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::string params_fp_ = "";
  std::chrono::steady_clock::time_point begin_;
};

struct GenerateFlags {
  double width = 0.600;
  double height = 0.225;
  double vf = 0.25;
  std::string shape = "square";
  double rmin = 0.015;
  double rmax = 0.015;
  double min_gap = 0.002;
  long long max_attempts = 200000;
  double tolerance = 0.01;
};

void add_generate_flags(CLI::App* cmd, GenerateFlags& f) {
  cmd->add_option("--width", f.width, "Domain width in m (crack direction)");
  cmd->add_option("--height", f.height, "Domain height in m (loading direction)");
  cmd->add_option("--vf", f.vf, "Target aggregate volume fraction");
  cmd->add_option("--shape", f.shape, "square, mixed, or a side count 3..8");
  cmd->add_option("--circumradius", f.rmin, "Aggregate circumradius in m")
      ->each([&f](const std::string& v) { f.rmax = std::stod(v); });
  cmd->add_option("--rmin", f.rmin, "Minimum circumradius in m");
  cmd->add_option("--rmax", f.rmax, "Maximum circumradius in m");
  cmd->add_option("--min-gap", f.min_gap, "Minimum clearance between aggregates in m");
  cmd->add_option("--max-attempts", f.max_attempts, "Placement attempt budget");
  cmd->add_option("--tolerance", f.tolerance, "Volume-fraction tolerance");
}

std::string generate_config_json(const GenerateFlags& f, std::uint64_t seed) {
  int n_min = 4, n_max = 4;
  if (f.shape == "square") {
    n_min = n_max = 4;
  } else if (f.shape == "mixed") {
    n_min = 3;
    n_max = 8;
  } else {
    const int n = std::atoi(f.shape.c_str());
    if (n < 3 || n > 12) {
      throw CliError{CP_ERROR_INVALID_ARGUMENT,
                     "--shape must be square, mixed, or a side count (3..12)"};
    }
    n_min = n_max = n;
  }
  const json j{{"width", f.width},
               {"height", f.height},
               {"target_volume_fraction", f.vf},
               {"n_min", n_min},
               {"n_max", n_max},
               {"circumradius_min", f.rmin},
               {"circumradius_max", f.rmax},
               {"min_gap", f.min_gap},
               {"seed", seed},
               {"max_attempts", f.max_attempts},
               {"tolerance", f.tolerance}};
  return j.dump();
}

std::vector<double> parse_lags(const std::string& spec) {
  std::vector<double> lags;
  if (spec.find(':') != std::string::npos) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0) {
      throw CliError{CP_ERROR_INVALID_ARGUMENT, "--lags range must be start:end:step"};
    }
    for (double v = lo; v <= hi + 0.5 * step; v += step) lags.push_back(v);
  } else {
    std::size_t pos = 0;
    while (pos < spec.size()) {
      std::size_t next = spec.find(',', pos);
      if (next == std::string::npos) next = spec.size();
      lags.push_back(std::stod(spec.substr(pos, next - pos)));
      pos = next + 1;
    }
  }
  if (lags.empty()) {
    throw CliError{CP_ERROR_INVALID_ARGUMENT, "--lags produced an empty list"};
  }
  return lags;
}

std::vector<std::uint32_t> parse_sizes(const std::string& spec) {
  std::vector<std::uint32_t> sizes;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t next = spec.find(',', pos);
    if (next == std::string::npos) next = spec.size();
    sizes.push_back(static_cast<std::uint32_t>(std::stoul(spec.substr(pos, next - pos))));
    pos = next + 1;
  }
  return sizes;
}

// RAII wrappers for the C handles.
template <typename T, void (*Free)(T*)>
class Handle {
public:
  Handle() = default;
  ~Handle() { reset(); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;

  T** out() {
    reset();
    return &ptr_;
  }
  T* get() const { return ptr_; }
  void reset() {
    if (ptr_ != nullptr) Free(ptr_);
    ptr_ = nullptr;
  }

private:
  T* ptr_ = nullptr;
};

using MicroHandle = Handle<cp_microstructure, cp_microstructure_free>;
using ParamsHandle = Handle<cp_params, cp_params_free>;
using TrainingHandle = Handle<cp_training_set, cp_training_free>;
using EnsembleHandle = Handle<cp_ensemble, cp_ensemble_free>;

void load_params_or_default(const std::string& path, ParamsHandle& params) {
  if (path.empty() || path == "default") {
    check(cp_params_default(params.out()), "default parameters");
  } else {
    check(cp_params_load(path.c_str(), params.out()), "load parameters");
  }
}

std::string fingerprint_of(const ParamsHandle& params) {
  char* fp = nullptr;
  check(cp_params_fingerprint(params.get(), &fp), "parameter fingerprint");
  return take_string(fp);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic crack-path surrogate for aggregate microstructures"};
  app.require_subcommand(1);

  Common common;
  const char* env_dir = std::getenv("CRACKPATH_OUT_DIR");
  common.out_dir = env_dir != nullptr ? env_dir : ".";
  app.add_option("--out-dir", common.out_dir,
                 "Directory for relative output paths (env CRACKPATH_OUT_DIR)")
      ->envname("CRACKPATH_OUT_DIR");
  app.add_option("--seed", common.seed, "Master seed; all randomness derives from it");
  app.add_option("--threads", common.threads, "Worker count (results are independent of it)");

  // generate
  auto* cmd_generate = app.add_subcommand("generate", "Generate a random microstructure");
  GenerateFlags gen_flags;
  add_generate_flags(cmd_generate, gen_flags);
  std::string generate_out = "microstructure.json";
  cmd_generate->add_option("-o,--output", generate_out, "Microstructure JSON path");

  // discretize
  auto* cmd_discretize = app.add_subcommand("discretize", "Write the boundary discretization");
  std::string discretize_in;
  int points_per_side = 5;
  std::string discretize_out = "points.json";
  cmd_discretize->add_option("--input", discretize_in, "Microstructure JSON")->required();
  cmd_discretize->add_option("--points-per-side", points_per_side, "Points per polygon side");
  cmd_discretize->add_option("-o,--output", discretize_out, "Discretization JSON path");

  // synthesize-training
  auto* cmd_synth = app.add_subcommand(
      "synthesize-training", "Generate microstructures, simulate one crack each, extract records");
  GenerateFlags synth_gen_flags;
  add_generate_flags(cmd_synth, synth_gen_flags);
  std::uint32_t synth_n = 35;
  std::string synth_params = "default";
  int synth_pps = 5;
  std::string synth_out = "training.json";
  cmd_synth->add_option("--n", synth_n, "Number of training microstructures");
  cmd_synth->add_option("--params", synth_params, "Parameter JSON, or 'default'");
  cmd_synth->add_option("--points-per-side", synth_pps, "Points per polygon side");
  cmd_synth->add_option("-o,--output", synth_out, "Training-set JSON path");

  // fit
  auto* cmd_fit = app.add_subcommand("fit", "Maximum-likelihood fit of the kernel parameters");
  std::string fit_training;
  std::string fit_out = "fitted_params.json";
  std::string fit_report;
  std::string fit_which = "both";
  int fit_starts = 10;
  int fit_max_iters = 500;
  double fit_tol = 1e-9;
  std::string fit_sizes;
  std::string fit_stability_out;
  cmd_fit->add_option("--training", fit_training, "Training-set JSON")->required();
  cmd_fit->add_option("-o,--output", fit_out, "Fitted parameter JSON path");
  cmd_fit->add_option("--report", fit_report, "Fit report JSON path (default <output>.report.json)");
  cmd_fit->add_option("--which", fit_which, "F1, F2 or both");
  cmd_fit->add_option("--starts", fit_starts, "Multi-start count");
  cmd_fit->add_option("--max-iters", fit_max_iters, "Iteration cap per start");
  cmd_fit->add_option("--tol", fit_tol, "Convergence tolerance on the log-likelihood");
  cmd_fit->add_option("--sizes", fit_sizes, "Comma list of training sizes for a stability curve");
  cmd_fit->add_option("--stability-csv", fit_stability_out,
                      "Stability CSV path (default <output>.stability.csv)");

  // predict
  auto* cmd_predict = app.add_subcommand("predict", "Simulate a crack ensemble and analyze it");
  std::string predict_micro;
  std::string predict_params = "default";
  std::uint32_t predict_paths = 100;
  int predict_pps = 5;
  double predict_start_y = -1.0;
  int predict_grid = 200;
  int predict_bins = 20;
  double predict_kde_bandwidth = 0.0;
  bool predict_csv = false;
  std::string predict_out = "prediction";
  cmd_predict->add_option("--microstructure", predict_micro, "Microstructure JSON")->required();
  cmd_predict->add_option("--params", predict_params, "Parameter JSON, or 'default'");
  cmd_predict->add_option("--paths,-M", predict_paths, "Ensemble size");
  cmd_predict->add_option("--points-per-side", predict_pps, "Points per polygon side");
  cmd_predict->add_option("--start-y", predict_start_y,
                          "Start ordinate on the left boundary (default height/2)");
  cmd_predict->add_option("--grid", predict_grid, "Confidence-region grid size");
  cmd_predict->add_option("--bins", predict_bins, "Tortuosity histogram bins");
  cmd_predict->add_option("--kde-bandwidth", predict_kde_bandwidth,
                          "Explicit KDE bandwidth (0 = Silverman)");
  cmd_predict->add_flag("--csv", predict_csv, "Also write the region CSV");
  cmd_predict->add_option("-o,--output", predict_out, "Output prefix");

  // analyze
  auto* cmd_analyze = app.add_subcommand("analyze", "Statistics for an existing ensemble");
  std::string analyze_ensemble;
  std::string analyze_micro;
  int analyze_grid = 200;
  int analyze_bins = 20;
  double analyze_kde_bandwidth = 0.0;
  bool analyze_csv = false;
  std::string analyze_out = "analysis";
  cmd_analyze->add_option("--ensemble", analyze_ensemble, "Ensemble JSON")->required();
  cmd_analyze->add_option("--microstructure", analyze_micro,
                          "Microstructure JSON (enables the SVG overlay)");
  cmd_analyze->add_option("--grid", analyze_grid, "Confidence-region grid size");
  cmd_analyze->add_option("--bins", analyze_bins, "Tortuosity histogram bins");
  cmd_analyze->add_option("--kde-bandwidth", analyze_kde_bandwidth,
                          "Explicit KDE bandwidth (0 = Silverman)");
  cmd_analyze->add_flag("--csv", analyze_csv, "Also write the region CSV");
  cmd_analyze->add_option("-o,--output", analyze_out, "Output prefix");

  // covariogram
  auto* cmd_cov = app.add_subcommand("covariogram", "Monte Carlo covariogram of a microstructure");
  std::string cov_micro;
  std::string cov_lags = "0:0.09:0.0025";
  long long cov_samples = 200000;
  std::string cov_out = "covariogram.csv";
  cmd_cov->add_option("--microstructure", cov_micro, "Microstructure JSON")->required();
  cmd_cov->add_option("--lags", cov_lags, "start:end:step range or comma list, in m");
  cmd_cov->add_option("--samples", cov_samples, "Samples per lag");
  cmd_cov->add_option("-o,--output", cov_out, "CSV path");

  // selftest
  auto* cmd_selftest = app.add_subcommand("selftest", "Run the built-in verification suites");
  bool selftest_quick = false;
  bool selftest_inject = false;
  cmd_selftest->add_flag("--quick", selftest_quick, "Reduced instance counts");
  cmd_selftest
      ->add_flag("--inject-kernel-sign-flip", selftest_inject,
                 "Test fixture: corrupt a kernel sign; the run must fail")
      ->group("");  // hidden

  // Global flags remain usable after the subcommand name.
  for (CLI::App* sub : {cmd_generate, cmd_discretize, cmd_synth, cmd_fit, cmd_predict,
                        cmd_analyze, cmd_cov, cmd_selftest}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_generate->parsed()) {
      Manifest manifest("generate", common.seed);
      const std::string out = resolve(common, generate_out);
      MicroHandle micro;
      check(cp_generate(generate_config_json(gen_flags, common.seed).c_str(), micro.out()),
            "generate");
      check(cp_microstructure_save(micro.get(), out.c_str()), "save microstructure");
      double vf = 0.0;
      check(cp_microstructure_volume_fraction(micro.get(), &vf), "volume fraction");
      size_t count = 0;
      cp_microstructure_aggregate_count(micro.get(), &count);
      manifest.output(out);
      manifest.write();
      std::printf("wrote %s (%zu aggregates, volume fraction %.4f)\n", out.c_str(), count, vf);
    } else if (cmd_discretize->parsed()) {
      Manifest manifest("discretize", common.seed);
      const std::string out = resolve(common, discretize_out);
      MicroHandle micro;
      check(cp_microstructure_load(discretize_in.c_str(), micro.out()), "load microstructure");
      check(cp_discretize_save(micro.get(), points_per_side, out.c_str()), "discretize");
      manifest.input(discretize_in);
      manifest.output(out);
      manifest.write();
      std::printf("wrote %s\n", out.c_str());
    } else if (cmd_synth->parsed()) {
      Manifest manifest("synthesize-training", common.seed);
      const std::string out = resolve(common, synth_out);
      ParamsHandle params;
      load_params_or_default(synth_params, params);
      manifest.params_fingerprint(fingerprint_of(params));
      TrainingHandle training;
      check(cp_synthesize_training(generate_config_json(synth_gen_flags, 0).c_str(), synth_n,
                                   params.get(), common.seed, synth_pps, training.out()),
            "synthesize training");
      check(cp_training_save(training.get(), out.c_str()), "save training set");
      size_t n_f1 = 0, n_f2 = 0;
      cp_training_counts(training.get(), &n_f1, &n_f2);
      if (synth_params != "default" && !synth_params.empty()) manifest.input(synth_params);
      manifest.output(out);
      manifest.write();
      std::printf("wrote %s (%zu F1 records, %zu F2 records)\n", out.c_str(), n_f1, n_f2);
    } else if (cmd_fit->parsed()) {
      Manifest manifest("fit", common.seed);
      const std::string out = resolve(common, fit_out);
      const std::string report_path =
          resolve(common, fit_report.empty() ? fit_out + ".report.json" : fit_report);
      TrainingHandle training;
      check(cp_training_load(fit_training.c_str(), training.out()), "load training set");
      const json opts{{"which", fit_which}, {"n_starts", fit_starts},
                      {"max_iterations", fit_max_iters}, {"tol", fit_tol},
                      {"seed", common.seed},  {"threads", common.threads}};
      ParamsHandle fitted;
      char* report = nullptr;
      check(cp_fit(training.get(), opts.dump().c_str(), fitted.out(), &report), "fit");
      const std::string report_text = take_string(report);
      check(cp_params_save(fitted.get(), out.c_str()), "save fitted parameters");
      write_text(report_path, report_text);
      manifest.input(fit_training);
      manifest.output(out);
      manifest.output(report_path);
      manifest.params_fingerprint(fingerprint_of(fitted));

      if (!fit_sizes.empty()) {
        const std::string stability_path = resolve(
            common, fit_stability_out.empty() ? fit_out + ".stability.csv" : fit_stability_out);
        const auto sizes = parse_sizes(fit_sizes);
        check(cp_stability_csv(training.get(), sizes.data(), sizes.size(), opts.dump().c_str(),
                               stability_path.c_str()),
              "stability curve");
        manifest.output(stability_path);
        std::printf("wrote %s\n", stability_path.c_str());
      }
      manifest.write();
      std::printf("wrote %s and %s\n", out.c_str(), report_path.c_str());
    } else if (cmd_predict->parsed()) {
      Manifest manifest("predict", common.seed);
      MicroHandle micro;
      check(cp_microstructure_load(predict_micro.c_str(), micro.out()), "load microstructure");
      ParamsHandle params;
      load_params_or_default(predict_params, params);
      manifest.params_fingerprint(fingerprint_of(params));

      json predict_opts{{"points_per_side", predict_pps}};
      if (predict_start_y >= 0.0) {
        predict_opts["start"] = json::array({0.0, predict_start_y});
      }
      EnsembleHandle ensemble;
      check(cp_predict(micro.get(), params.get(), predict_paths, common.seed,
                       predict_opts.dump().c_str(), common.threads, ensemble.out()),
            "predict");

      json stats_opts{{"grid_size", predict_grid}, {"bins", predict_bins}};
      if (predict_kde_bandwidth > 0.0) stats_opts["kde_bandwidth"] = predict_kde_bandwidth;

      const std::string ensemble_path = resolve(common, predict_out + ".ensemble.json");
      const std::string stats_path = resolve(common, predict_out + ".stats.json");
      const std::string svg_path = resolve(common, predict_out + ".svg");
      check(cp_ensemble_save(ensemble.get(), params.get(), ensemble_path.c_str()),
            "save ensemble");
      char* stats_json = nullptr;
      check(cp_ensemble_statistics_json(ensemble.get(), stats_opts.dump().c_str(), &stats_json),
            "statistics");
      write_text(stats_path, take_string(stats_json));
      check(cp_ensemble_svg(ensemble.get(), micro.get(), stats_opts.dump().c_str(),
                            svg_path.c_str()),
            "svg overlay");
      manifest.input(predict_micro);
      if (predict_params != "default" && !predict_params.empty()) manifest.input(predict_params);
      manifest.output(ensemble_path);
      manifest.output(stats_path);
      manifest.output(svg_path);
      if (predict_csv) {
        const std::string csv_path = resolve(common, predict_out + ".region.csv");
        check(cp_ensemble_region_csv(ensemble.get(), stats_opts.dump().c_str(), csv_path.c_str()),
              "region CSV");
        manifest.output(csv_path);
        std::printf("wrote %s\n", csv_path.c_str());
      }
      manifest.write();
      std::printf("wrote %s, %s, %s\n", ensemble_path.c_str(), stats_path.c_str(),
                  svg_path.c_str());
    } else if (cmd_analyze->parsed()) {
      Manifest manifest("analyze", common.seed);
      EnsembleHandle ensemble;
      check(cp_ensemble_load(analyze_ensemble.c_str(), ensemble.out()), "load ensemble");
      json stats_opts{{"grid_size", analyze_grid}, {"bins", analyze_bins}};
      if (analyze_kde_bandwidth > 0.0) stats_opts["kde_bandwidth"] = analyze_kde_bandwidth;

      const std::string stats_path = resolve(common, analyze_out + ".stats.json");
      char* stats_json = nullptr;
      check(cp_ensemble_statistics_json(ensemble.get(), stats_opts.dump().c_str(), &stats_json),
            "statistics");
      write_text(stats_path, take_string(stats_json));
      manifest.input(analyze_ensemble);
      manifest.output(stats_path);
      if (!analyze_micro.empty()) {
        MicroHandle micro;
        check(cp_microstructure_load(analyze_micro.c_str(), micro.out()), "load microstructure");
        const std::string svg_path = resolve(common, analyze_out + ".svg");
        check(cp_ensemble_svg(ensemble.get(), micro.get(), stats_opts.dump().c_str(),
                              svg_path.c_str()),
              "svg overlay");
        manifest.input(analyze_micro);
        manifest.output(svg_path);
        std::printf("wrote %s\n", svg_path.c_str());
      }
      if (analyze_csv) {
        const std::string csv_path = resolve(common, analyze_out + ".region.csv");
        check(cp_ensemble_region_csv(ensemble.get(), stats_opts.dump().c_str(), csv_path.c_str()),
              "region CSV");
        manifest.output(csv_path);
        std::printf("wrote %s\n", csv_path.c_str());
      }
      manifest.write();
      std::printf("wrote %s\n", stats_path.c_str());
    } else if (cmd_cov->parsed()) {
      Manifest manifest("covariogram", common.seed);
      const std::string out = resolve(common, cov_out);
      MicroHandle micro;
      check(cp_microstructure_load(cov_micro.c_str(), micro.out()), "load microstructure");
      const auto lags = parse_lags(cov_lags);
      check(cp_covariogram_csv(micro.get(), lags.data(), lags.size(), cov_samples, common.seed,
                               common.threads, out.c_str()),
            "covariogram");
      manifest.input(cov_micro);
      manifest.output(out);
      manifest.write();
      std::printf("wrote %s\n", out.c_str());
    } else if (cmd_selftest->parsed()) {
      uint32_t flags = 0;
      if (selftest_quick) flags |= CP_SELFTEST_QUICK;
      if (selftest_inject) flags |= CP_SELFTEST_INJECT_KERNEL_SIGN_FLIP;
      int failures = 0;
      char* report = nullptr;
      check(cp_selftest(flags, common.seed, &failures, &report), "selftest");
      std::fputs(take_string(report).c_str(), stdout);
      return failures == 0 ? 0 : 1;
    }
  } catch (const CliError& e) {
    const json err{{"error",
                    {{"category", static_cast<int>(e.status)},
                     {"name", status_name(e.status)},
                     {"message", e.message}}}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return static_cast<int>(e.status);
  }
  return 0;
}
