/*
 * crackpath — stochastic surrogate for 2D crack paths in two-phase
 * (matrix + convex polygonal aggregate) microstructures.
 *
 * C API of the shared library. All objects are opaque handles created and
 * destroyed here; every function returns a cp_status and leaves a thread-local
 * message retrievable with cp_last_error(). Strings returned through char**
 * are heap-allocated and must be released with cp_string_free().
 */

#ifndef CRACKPATH_H
#define CRACKPATH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CRACKPATH_API __declspec(dllexport)
#else
#define CRACKPATH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_ERROR_INVALID_ARGUMENT = 1,
  CP_ERROR_IO = 2,
  CP_ERROR_PARSE = 3,
  CP_ERROR_GEOMETRY = 4,
  CP_ERROR_ESTIMATION = 5,
  CP_ERROR_SIMULATION = 6,
  CP_ERROR_INTERNAL = 7
} cp_status;

typedef struct cp_microstructure cp_microstructure;
typedef struct cp_params cp_params;
typedef struct cp_training_set cp_training_set;
typedef struct cp_ensemble cp_ensemble;

CRACKPATH_API const char* cp_version(void);
/* Thread-local message describing the most recent failure in this thread. */
CRACKPATH_API const char* cp_last_error(void);
CRACKPATH_API void cp_string_free(char* s);

/* --- microstructures ------------------------------------------------- */

/* config_json fields (all optional): width, height, target_volume_fraction,
 * n_min, n_max, circumradius_min, circumradius_max, min_gap, seed,
 * max_attempts, tolerance. */
CRACKPATH_API cp_status cp_generate(const char* config_json, cp_microstructure** out);
CRACKPATH_API cp_status cp_microstructure_load(const char* path, cp_microstructure** out);
CRACKPATH_API cp_status cp_microstructure_save(const cp_microstructure* m, const char* path);
CRACKPATH_API cp_status cp_microstructure_volume_fraction(const cp_microstructure* m,
                                                          double* out);
CRACKPATH_API cp_status cp_microstructure_aggregate_count(const cp_microstructure* m,
                                                          size_t* out);
/* Content hash of the canonical serialized form. */
CRACKPATH_API cp_status cp_microstructure_id(const cp_microstructure* m, char** out);
/* Boundary discretization written as JSON. */
CRACKPATH_API cp_status cp_discretize_save(const cp_microstructure* m, int points_per_side,
                                           const char* path);
CRACKPATH_API cp_status cp_covariogram_csv(const cp_microstructure* m, const double* lags,
                                           size_t n_lags, long long n_samples, uint64_t seed,
                                           int threads, const char* csv_path);
CRACKPATH_API void cp_microstructure_free(cp_microstructure* m);

/* --- kernel parameters ------------------------------------------------ */

CRACKPATH_API cp_status cp_params_default(cp_params** out);
CRACKPATH_API cp_status cp_params_load(const char* path, cp_params** out);
CRACKPATH_API cp_status cp_params_save(const cp_params* p, const char* path);
/* f1 receives mu1..mu6, f2 receives lambda1..lambda6. */
CRACKPATH_API cp_status cp_params_values(const cp_params* p, double f1[6], double f2[6]);
CRACKPATH_API cp_status cp_params_fingerprint(const cp_params* p, char** out);
CRACKPATH_API void cp_params_free(cp_params* p);

/* --- training --------------------------------------------------------- */

/* Generates n microstructures from config_json (seed derived per index),
 * simulates one crack each with `params`, and extracts the per-step records. */
CRACKPATH_API cp_status cp_synthesize_training(const char* config_json,
                                               uint32_t n_microstructures,
                                               const cp_params* params, uint64_t seed,
                                               int points_per_side, cp_training_set** out);
CRACKPATH_API cp_status cp_training_load(const char* path, cp_training_set** out);
CRACKPATH_API cp_status cp_training_save(const cp_training_set* ts, const char* path);
CRACKPATH_API cp_status cp_training_counts(const cp_training_set* ts, size_t* n_f1,
                                           size_t* n_f2);
CRACKPATH_API void cp_training_free(cp_training_set* ts);

/* opts_json fields (all optional): which ("F1"|"F2"|"both"), n_starts,
 * max_iterations, tol, seed, threads. report_json (optional out) receives the
 * fit diagnostics. */
CRACKPATH_API cp_status cp_fit(const cp_training_set* ts, const char* opts_json,
                               cp_params** out_params, char** report_json);
/* Nested-prefix refits; one CSV row per size. */
CRACKPATH_API cp_status cp_stability_csv(const cp_training_set* ts, const uint32_t* sizes,
                                         size_t n_sizes, const char* opts_json,
                                         const char* csv_path);

/* --- prediction and analysis ------------------------------------------ */

/* opts_json fields (all optional): points_per_side, start ([x, y]),
 * direction ([x, y], unit), max_steps. Default start is (0, height/2),
 * default direction (1, 0). */
CRACKPATH_API cp_status cp_predict(const cp_microstructure* m, const cp_params* params,
                                   uint32_t n_paths, uint64_t master_seed,
                                   const char* opts_json, int threads, cp_ensemble** out);
CRACKPATH_API cp_status cp_ensemble_load(const char* path, cp_ensemble** out);
CRACKPATH_API cp_status cp_ensemble_save(const cp_ensemble* e, const cp_params* params_or_null,
                                         const char* path);
CRACKPATH_API cp_status cp_ensemble_path_count(const cp_ensemble* e, size_t* out);

/* opts_json fields (all optional): grid_size, bins, kde (bool),
 * kde_bandwidth. */
CRACKPATH_API cp_status cp_ensemble_statistics_json(const cp_ensemble* e, const char* opts_json,
                                                    char** out_json);
CRACKPATH_API cp_status cp_ensemble_region_csv(const cp_ensemble* e, const char* opts_json,
                                               const char* csv_path);
CRACKPATH_API cp_status cp_ensemble_svg(const cp_ensemble* e, const cp_microstructure* m,
                                        const char* opts_json, const char* svg_path);
CRACKPATH_API void cp_ensemble_free(cp_ensemble* e);

/* --- selftest ----------------------------------------------------------- */

#define CP_SELFTEST_QUICK 1u
/* Test fixture: corrupt a kernel sign inside the normalization suite; the
 * suite must then fail. */
#define CP_SELFTEST_INJECT_KERNEL_SIGN_FLIP 2u

/* report receives the deterministic pass/fail report text; failures receives
 * the number of failing suites. Returns CP_OK even when suites fail. */
CRACKPATH_API cp_status cp_selftest(uint32_t flags, uint64_t seed, int* failures,
                                    char** report);

#ifdef __cplusplus
}
#endif

#endif /* CRACKPATH_H */
