#include "crackpath.h"

#include <cstring>
#include <exception>
#include <string>

#include "crackpath/analysis.hpp"
#include "crackpath/estimation.hpp"
#include "crackpath/geometry.hpp"
#include "crackpath/io.hpp"
#include "crackpath/model.hpp"
#include "crackpath/morphology.hpp"
#include "crackpath/prediction.hpp"
#include "crackpath/selftest.hpp"
#include "crackpath/svg.hpp"

#include "json.hpp"

struct cp_microstructure {
  crackpath::geometry::Microstructure m;
};
struct cp_params {
  crackpath::model::ModelParams p;
};
struct cp_training_set {
  crackpath::estimation::TrainingSet ts;
};
struct cp_ensemble {
  crackpath::prediction::Ensemble e;
};

namespace {

using crackpath::Error;
using crackpath::ErrorCategory;
using nlohmann::json;

thread_local std::string tl_error;

cp_status map_category(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::invalid_argument:
      return CP_ERROR_INVALID_ARGUMENT;
    case ErrorCategory::io:
      return CP_ERROR_IO;
    case ErrorCategory::parse:
      return CP_ERROR_PARSE;
    case ErrorCategory::geometry:
      return CP_ERROR_GEOMETRY;
    case ErrorCategory::estimation:
      return CP_ERROR_ESTIMATION;
    case ErrorCategory::simulation:
      return CP_ERROR_SIMULATION;
    case ErrorCategory::internal:
      return CP_ERROR_INTERNAL;
  }
  return CP_ERROR_INTERNAL;
}

template <typename Fn>
cp_status guarded(Fn&& fn) {
  try {
    fn();
    return CP_OK;
  } catch (const Error& e) {
    tl_error = e.what();
    return map_category(e.category());
  } catch (const std::exception& e) {
    tl_error = e.what();
    return CP_ERROR_INTERNAL;
  } catch (...) {
    tl_error = "unknown error";
    return CP_ERROR_INTERNAL;
  }
}

cp_status bad_argument(const char* message) {
  tl_error = message;
  return CP_ERROR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_opts(const char* opts_json, const char* what) {
  if (opts_json == nullptr || *opts_json == '\0') return json::object();
  json j = json::parse(opts_json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCategory::parse, std::string(what) + ": options must be a JSON object");
  }
  return j;
}

crackpath::estimation::FitOptions fit_options_from_json(const json& j) {
  crackpath::estimation::FitOptions opts;
  if (j.contains("which")) {
    const std::string which = j.at("which").get<std::string>();
    if (which == "F1") {
      opts.which = crackpath::estimation::Which::F1;
    } else if (which == "F2") {
      opts.which = crackpath::estimation::Which::F2;
    } else if (which == "both") {
      opts.which = crackpath::estimation::Which::Both;
    } else {
      throw Error(ErrorCategory::invalid_argument, "fit: which must be F1, F2 or both");
    }
  }
  if (j.contains("n_starts")) opts.n_starts = j.at("n_starts").get<int>();
  if (j.contains("max_iterations")) opts.max_iterations = j.at("max_iterations").get<int>();
  if (j.contains("tol")) opts.tol = j.at("tol").get<double>();
  if (j.contains("seed")) opts.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("threads")) opts.threads = j.at("threads").get<int>();
  return opts;
}

crackpath::analysis::StatisticsOptions stats_options_from_json(const json& j) {
  crackpath::analysis::StatisticsOptions opts;
  if (j.contains("grid_size")) opts.grid_size = j.at("grid_size").get<int>();
  if (j.contains("bins")) opts.bins = j.at("bins").get<int>();
  if (j.contains("kde")) opts.with_kde = j.at("kde").get<bool>();
  if (j.contains("kde_bandwidth")) opts.kde_bandwidth = j.at("kde_bandwidth").get<double>();
  return opts;
}

}  // namespace

extern "C" {

const char* cp_version(void) { return "0.1.0"; }

const char* cp_last_error(void) { return tl_error.c_str(); }

void cp_string_free(char* s) { std::free(s); }

/* --- microstructures ------------------------------------------------- */

cp_status cp_generate(const char* config_json, cp_microstructure** out) {
  if (out == nullptr) return bad_argument("cp_generate: out is null");
  return guarded([&] {
    const auto config = crackpath::io::morphology_config_from_json(
        config_json == nullptr || *config_json == '\0' ? "{}" : config_json);
    *out = new cp_microstructure{crackpath::morphology::generate(config)};
  });
}

cp_status cp_microstructure_load(const char* path, cp_microstructure** out) {
  if (path == nullptr || out == nullptr) return bad_argument("cp_microstructure_load: null argument");
  return guarded([&] { *out = new cp_microstructure{crackpath::io::load_microstructure(path)}; });
}

cp_status cp_microstructure_save(const cp_microstructure* m, const char* path) {
  if (m == nullptr || path == nullptr) return bad_argument("cp_microstructure_save: null argument");
  return guarded([&] { crackpath::io::save_microstructure(m->m, path); });
}

cp_status cp_microstructure_volume_fraction(const cp_microstructure* m, double* out) {
  if (m == nullptr || out == nullptr) {
    return bad_argument("cp_microstructure_volume_fraction: null argument");
  }
  return guarded([&] { *out = crackpath::morphology::volume_fraction(m->m); });
}

cp_status cp_microstructure_aggregate_count(const cp_microstructure* m, size_t* out) {
  if (m == nullptr || out == nullptr) {
    return bad_argument("cp_microstructure_aggregate_count: null argument");
  }
  *out = m->m.aggregates.size();
  return CP_OK;
}

cp_status cp_microstructure_id(const cp_microstructure* m, char** out) {
  if (m == nullptr || out == nullptr) return bad_argument("cp_microstructure_id: null argument");
  return guarded([&] { *out = dup_string(crackpath::io::microstructure_id(m->m)); });
}

cp_status cp_discretize_save(const cp_microstructure* m, int points_per_side, const char* path) {
  if (m == nullptr || path == nullptr) return bad_argument("cp_discretize_save: null argument");
  return guarded([&] {
    const auto dm = crackpath::geometry::discretize(m->m, points_per_side);
    crackpath::io::write_file(path, crackpath::io::discretized_to_json(dm));
  });
}

cp_status cp_covariogram_csv(const cp_microstructure* m, const double* lags, size_t n_lags,
                             long long n_samples, uint64_t seed, int threads,
                             const char* csv_path) {
  if (m == nullptr || lags == nullptr || csv_path == nullptr) {
    return bad_argument("cp_covariogram_csv: null argument");
  }
  return guarded([&] {
    const std::vector<double> lag_list(lags, lags + n_lags);
    const auto est = crackpath::morphology::covariogram(m->m, lag_list, n_samples, seed, threads);
    crackpath::io::write_file(csv_path, crackpath::io::covariogram_csv(est));
  });
}

void cp_microstructure_free(cp_microstructure* m) { delete m; }

/* --- kernel parameters ------------------------------------------------ */

cp_status cp_params_default(cp_params** out) {
  if (out == nullptr) return bad_argument("cp_params_default: out is null");
  *out = new cp_params{};
  return CP_OK;
}

cp_status cp_params_load(const char* path, cp_params** out) {
  if (path == nullptr || out == nullptr) return bad_argument("cp_params_load: null argument");
  return guarded([&] { *out = new cp_params{crackpath::io::load_params(path)}; });
}

cp_status cp_params_save(const cp_params* p, const char* path) {
  if (p == nullptr || path == nullptr) return bad_argument("cp_params_save: null argument");
  return guarded([&] { crackpath::io::save_params(p->p, path); });
}

cp_status cp_params_values(const cp_params* p, double f1[6], double f2[6]) {
  if (p == nullptr || f1 == nullptr || f2 == nullptr) {
    return bad_argument("cp_params_values: null argument");
  }
  const auto a1 = p->p.f1.as_array();
  const auto a2 = p->p.f2.as_array();
  for (int i = 0; i < 6; ++i) {
    f1[i] = a1[static_cast<std::size_t>(i)];
    f2[i] = a2[static_cast<std::size_t>(i)];
  }
  return CP_OK;
}

cp_status cp_params_fingerprint(const cp_params* p, char** out) {
  if (p == nullptr || out == nullptr) return bad_argument("cp_params_fingerprint: null argument");
  return guarded([&] { *out = dup_string(crackpath::io::params_fingerprint(p->p)); });
}

void cp_params_free(cp_params* p) { delete p; }

/* --- training --------------------------------------------------------- */

cp_status cp_synthesize_training(const char* config_json, uint32_t n_microstructures,
                                 const cp_params* params, uint64_t seed, int points_per_side,
                                 cp_training_set** out) {
  if (params == nullptr || out == nullptr) {
    return bad_argument("cp_synthesize_training: null argument");
  }
  if (n_microstructures == 0) {
    return bad_argument("cp_synthesize_training: need at least one microstructure");
  }
  return guarded([&] {
    auto config = crackpath::io::morphology_config_from_json(
        config_json == nullptr || *config_json == '\0' ? "{}" : config_json);
    crackpath::estimation::TrainingSet ts;
    for (uint32_t i = 0; i < n_microstructures; ++i) {
      config.seed = crackpath::derive_seed(seed, i);
      const auto m = crackpath::morphology::generate(config);
      const auto dm = crackpath::geometry::discretize(m, points_per_side);
      const auto path = crackpath::prediction::simulate_crack(
          dm, {0.0, m.height / 2.0}, {1.0, 0.0}, params->p,
          crackpath::derive_seed(seed, 0x10000u + i));
      auto records = crackpath::estimation::extract_steps(dm, path, {1.0, 0.0});
      for (auto& r : records) {
        r.source = static_cast<int>(i);
        (r.configuration == crackpath::geometry::Configuration::F1 ? ts.records_f1
                                                                   : ts.records_f2)
            .push_back(std::move(r));
      }
      ts.provenance.push_back(crackpath::io::microstructure_id(m));
    }
    *out = new cp_training_set{std::move(ts)};
  });
}

cp_status cp_training_load(const char* path, cp_training_set** out) {
  if (path == nullptr || out == nullptr) return bad_argument("cp_training_load: null argument");
  return guarded([&] { *out = new cp_training_set{crackpath::io::load_training(path)}; });
}

cp_status cp_training_save(const cp_training_set* ts, const char* path) {
  if (ts == nullptr || path == nullptr) return bad_argument("cp_training_save: null argument");
  return guarded([&] { crackpath::io::save_training(ts->ts, path); });
}

cp_status cp_training_counts(const cp_training_set* ts, size_t* n_f1, size_t* n_f2) {
  if (ts == nullptr || n_f1 == nullptr || n_f2 == nullptr) {
    return bad_argument("cp_training_counts: null argument");
  }
  *n_f1 = ts->ts.records_f1.size();
  *n_f2 = ts->ts.records_f2.size();
  return CP_OK;
}

void cp_training_free(cp_training_set* ts) { delete ts; }

cp_status cp_fit(const cp_training_set* ts, const char* opts_json, cp_params** out_params,
                 char** report_json) {
  if (ts == nullptr || out_params == nullptr) return bad_argument("cp_fit: null argument");
  return guarded([&] {
    const auto opts = fit_options_from_json(parse_opts(opts_json, "cp_fit"));
    const auto result = crackpath::estimation::fit(ts->ts, opts);
    *out_params = new cp_params{result.params};
    if (report_json != nullptr) {
      *report_json = dup_string(crackpath::io::fit_report_json(result));
    }
  });
}

cp_status cp_stability_csv(const cp_training_set* ts, const uint32_t* sizes, size_t n_sizes,
                           const char* opts_json, const char* csv_path) {
  if (ts == nullptr || sizes == nullptr || csv_path == nullptr) {
    return bad_argument("cp_stability_csv: null argument");
  }
  return guarded([&] {
    crackpath::estimation::StabilityOptions opts;
    opts.fit = fit_options_from_json(parse_opts(opts_json, "cp_stability_csv"));
    std::vector<int> size_list;
    for (size_t i = 0; i < n_sizes; ++i) size_list.push_back(static_cast<int>(sizes[i]));
    const auto rows = crackpath::estimation::stability_curve(ts->ts, size_list, opts);
    crackpath::io::write_file(csv_path, crackpath::io::stability_csv(rows));
  });
}

/* --- prediction and analysis ------------------------------------------ */

cp_status cp_predict(const cp_microstructure* m, const cp_params* params, uint32_t n_paths,
                     uint64_t master_seed, const char* opts_json, int threads,
                     cp_ensemble** out) {
  if (m == nullptr || params == nullptr || out == nullptr) {
    return bad_argument("cp_predict: null argument");
  }
  return guarded([&] {
    const json j = parse_opts(opts_json, "cp_predict");
    const int points_per_side = j.value("points_per_side", 5);
    crackpath::geometry::Point2 start{0.0, m->m.height / 2.0};
    if (j.contains("start")) {
      const auto s = j.at("start");
      start = {s.at(0).get<double>(), s.at(1).get<double>()};
    }
    crackpath::geometry::Point2 direction{1.0, 0.0};
    if (j.contains("direction")) {
      const auto d = j.at("direction");
      direction = {d.at(0).get<double>(), d.at(1).get<double>()};
    }
    crackpath::prediction::SimulateOptions sim;
    if (j.contains("max_steps")) sim.max_steps = j.at("max_steps").get<long long>();

    const auto dm = crackpath::geometry::discretize(m->m, points_per_side);
    auto ensemble = crackpath::prediction::simulate_ensemble(
        dm, start, direction, params->p, static_cast<int>(n_paths), master_seed, threads, sim);
    ensemble.microstructure_id = crackpath::io::microstructure_id(m->m);
    *out = new cp_ensemble{std::move(ensemble)};
  });
}

cp_status cp_ensemble_load(const char* path, cp_ensemble** out) {
  if (path == nullptr || out == nullptr) return bad_argument("cp_ensemble_load: null argument");
  return guarded([&] { *out = new cp_ensemble{crackpath::io::load_ensemble(path)}; });
}

cp_status cp_ensemble_save(const cp_ensemble* e, const cp_params* params_or_null,
                           const char* path) {
  if (e == nullptr || path == nullptr) return bad_argument("cp_ensemble_save: null argument");
  return guarded([&] {
    const std::string fingerprint =
        params_or_null != nullptr ? crackpath::io::params_fingerprint(params_or_null->p) : "";
    crackpath::io::save_ensemble(e->e, fingerprint, path);
  });
}

cp_status cp_ensemble_path_count(const cp_ensemble* e, size_t* out) {
  if (e == nullptr || out == nullptr) return bad_argument("cp_ensemble_path_count: null argument");
  *out = e->e.paths.size();
  return CP_OK;
}

cp_status cp_ensemble_statistics_json(const cp_ensemble* e, const char* opts_json,
                                      char** out_json) {
  if (e == nullptr || out_json == nullptr) {
    return bad_argument("cp_ensemble_statistics_json: null argument");
  }
  return guarded([&] {
    const auto opts = stats_options_from_json(parse_opts(opts_json, "statistics"));
    const auto stats = crackpath::analysis::compute_statistics(e->e, opts);
    *out_json = dup_string(crackpath::io::statistics_to_json(e->e, stats));
  });
}

cp_status cp_ensemble_region_csv(const cp_ensemble* e, const char* opts_json,
                                 const char* csv_path) {
  if (e == nullptr || csv_path == nullptr) {
    return bad_argument("cp_ensemble_region_csv: null argument");
  }
  return guarded([&] {
    const auto opts = stats_options_from_json(parse_opts(opts_json, "statistics"));
    const auto stats = crackpath::analysis::compute_statistics(e->e, opts);
    if (!stats.region) {
      throw Error(ErrorCategory::invalid_argument,
                  "region CSV requires an ensemble with at least two paths");
    }
    const auto median_fn = crackpath::analysis::path_function(e->e.paths[stats.median_index]);
    crackpath::io::write_file(
        csv_path, crackpath::io::region_csv(*stats.region, median_fn.eval_grid(stats.region->grid)));
  });
}

cp_status cp_ensemble_svg(const cp_ensemble* e, const cp_microstructure* m,
                          const char* opts_json, const char* svg_path) {
  if (e == nullptr || m == nullptr || svg_path == nullptr) {
    return bad_argument("cp_ensemble_svg: null argument");
  }
  return guarded([&] {
    const auto opts = stats_options_from_json(parse_opts(opts_json, "statistics"));
    const auto stats = crackpath::analysis::compute_statistics(e->e, opts);
    crackpath::io::write_file(svg_path, crackpath::svg::render_overlay(m->m, &e->e, &stats));
  });
}

void cp_ensemble_free(cp_ensemble* e) { delete e; }

/* --- selftest ----------------------------------------------------------- */

cp_status cp_selftest(uint32_t flags, uint64_t seed, int* failures, char** report) {
  return guarded([&] {
    crackpath::selftest::Options opts;
    opts.quick = (flags & CP_SELFTEST_QUICK) != 0;
    opts.inject_kernel_sign_flip = (flags & CP_SELFTEST_INJECT_KERNEL_SIGN_FLIP) != 0;
    if (seed != 0) opts.seed = seed;
    const auto result = crackpath::selftest::run(opts);
    if (failures != nullptr) *failures = result.failures();
    if (report != nullptr) *report = dup_string(result.to_string());
  });
}

}  // extern "C"
