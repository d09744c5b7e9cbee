// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Every tolerance is pinned in code. Criterion 5's stability-drift
// clause is known to be statistically marginal on self-generated training
// data; it runs exactly as specified at a fixed neutral seed and reports the
// per-factor drifts either way.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "crackpath/analysis.hpp"
#include "crackpath/estimation.hpp"
#include "crackpath/geometry.hpp"
#include "crackpath/io.hpp"
#include "crackpath/model.hpp"
#include "crackpath/morphology.hpp"
#include "crackpath/oracles.hpp"
#include "crackpath/prediction.hpp"
#include "crackpath/rng.hpp"

using namespace crackpath;
using geometry::Microstructure;
using geometry::Point2;

namespace {

constexpr std::uint64_t kAcceptanceSeed = 2025;

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point begin = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  }
};

void report(int index, const std::string& name, bool pass, double seconds,
            const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), seconds, detail.empty() ? "" : " — ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run_criterion(int index, const std::string& name,
                   const std::function<bool(std::string&)>& body) {
  Timer timer;
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(index, name, pass, timer.seconds(), detail);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool files_equal(const std::string& a, const std::string& b) {
  const std::string ca = slurp(a);
  const std::string cb = slurp(b);
  return !ca.empty() && ca == cb;
}

Microstructure random_instance(Rng& rng, int n_polys) {
  Microstructure m{1.0, 0.6, {}};
  int guard = 0;
  while (static_cast<int>(m.aggregates.size()) < n_polys && guard++ < 20000) {
    const double r = rng.uniform(0.02, 0.06);
    const int n = 3 + rng.uniform_int(6);
    geometry::Aggregate cand{static_cast<int>(m.aggregates.size()), {}};
    const Point2 c{rng.uniform(r, m.width - r), rng.uniform(r, m.height - r)};
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int k = 0; k < n; ++k) {
      const double ang = phase + 2.0 * std::numbers::pi * k / n;
      cand.vertices.push_back({c.x + r * std::cos(ang), c.y + r * std::sin(ang)});
    }
    bool ok = true;
    for (const auto& other : m.aggregates) {
      if (geometry::convex_distance(cand, other) < 1e-3) {
        ok = false;
        break;
      }
    }
    if (ok) m.aggregates.push_back(std::move(cand));
  }
  return m;
}

Point2 random_free_point(Rng& rng, const Microstructure& m) {
  for (;;) {
    const Point2 p{rng.uniform(0.0, m.width), rng.uniform(0.0, m.height)};
    bool clear = true;
    for (const auto& a : m.aggregates) {
      if (geometry::point_in_aggregate(p, a)) {
        clear = false;
        break;
      }
    }
    if (clear) return p;
  }
}

// --- criteria ----------------------------------------------------------

bool criterion_1_defaults(std::string& detail) {
  const model::ModelParams p;
  const bool values_ok = p.f1.mu1 == 7.06 && p.f1.mu2 == 4.1 && p.f1.mu3 == 30.2 &&
                         p.f1.mu4 == 8.9 && p.f1.mu5 == 0.2 && p.f1.mu6 == 0.85 &&
                         p.f2.lambda1 == 34.2 && p.f2.lambda2 == 9.2 &&
                         p.f2.lambda3 == 13.16 && p.f2.lambda4 == 1.79 &&
                         p.f2.lambda5 == 1.08 && p.f2.lambda6 == 0.42;
  const std::string shipped = std::string(ACCEPT_SOURCE_DIR) + "/data/default_params.json";
  const bool bytes_ok = io::to_json(p) == slurp(shipped);
  if (!values_ok) detail = "default values differ from the shipped estimates";
  if (!bytes_ok) detail += std::string(detail.empty() ? "" : "; ") + "byte mismatch vs " + shipped;
  return values_ok && bytes_ok;
}

bool criterion_2_normalization(std::string& detail) {
  Timer timer;
  Rng rng(derive_seed(kAcceptanceSeed, 2));
  const model::ModelParams params;
  for (int trial = 0; trial < 10000; ++trial) {
    const bool f1 = rng.uniform01() < 0.5;
    geometry::CandidateSet cs;
    cs.configuration = f1 ? geometry::Configuration::F1 : geometry::Configuration::F2;
    const int n = 1 + rng.uniform_int(40);
    for (int i = 0; i < n; ++i) {
      geometry::Candidate c;
      c.d_norm = rng.uniform01();
      c.theta_norm = rng.uniform01();
      c.same_aggregate = f1 && (i == 0 || rng.uniform01() < 0.3);
      cs.candidates.push_back(c);
    }
    const auto probs = model::transition_probabilities(cs, params);
    double sum = 0.0;
    for (const double p : probs) {
      if (!(p > 0.0)) {
        detail = "non-positive probability at trial " + std::to_string(trial);
        return false;
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      detail = "sum deviates by " + io::format_double(std::abs(sum - 1.0));
      return false;
    }
  }
  if (timer.seconds() >= 5.0) {
    detail = "runtime budget (5 s) exceeded";
    return false;
  }
  detail = "10000 candidate sets";
  return true;
}

bool criterion_3_shadow_oracle(std::string& detail) {
  Timer timer;
  Rng rng(derive_seed(kAcceptanceSeed, 3));
  for (int trial = 0; trial < 1000; ++trial) {
    const Microstructure m = random_instance(rng, 3 + rng.uniform_int(8));
    const auto dm = geometry::discretize(m, 5);
    const Point2 tip = random_free_point(rng, m);
    const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Point2 dir{std::cos(ang), std::sin(ang)};
    const auto fov = geometry::field_of_view(tip, dir, dm, {});
    const auto surviving = geometry::shadow_filter(tip, fov, dm);
    std::vector<int> expected;
    for (const int idx : fov) {
      if (oracles::visible(tip, dm.points[static_cast<std::size_t>(idx)].position, m)) {
        expected.push_back(idx);
      }
    }
    if (surviving != expected) {
      detail = "mismatch at instance " + std::to_string(trial);
      return false;
    }
  }
  if (timer.seconds() >= 30.0) {
    detail = "runtime budget (30 s) exceeded";
    return false;
  }
  detail = "1000 randomized instances, exact agreement";
  return true;
}

bool criterion_4_frechet_oracle(std::string& detail) {
  Timer timer;
  Rng rng(derive_seed(kAcceptanceSeed, 4));
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Point2> a, b;
    const int na = 1 + rng.uniform_int(8);
    const int nb = 1 + rng.uniform_int(8);
    for (int i = 0; i < na; ++i) a.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    for (int i = 0; i < nb; ++i) b.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    const double dp = analysis::discrete_frechet(a, b);
    const double brute = oracles::frechet_enumeration(a, b);
    if (std::abs(dp - brute) > 1e-12) {
      detail = "pair " + std::to_string(trial) + " differs by " +
               io::format_double(std::abs(dp - brute));
      return false;
    }
  }
  if (timer.seconds() >= 60.0) {
    detail = "runtime budget (60 s) exceeded";
    return false;
  }
  detail = "500 path pairs within 1e-12";
  return true;
}

bool criterion_5_parameter_recovery(std::string& detail) {
  Timer timer;
  const model::ModelParams generating;  // shipped defaults
  morphology::MorphologyConfig config;  // 0.600 x 0.225, squares, VF 0.25

  estimation::TrainingSet ts;
  for (int i = 0; i < 35; ++i) {
    config.seed = derive_seed(kAcceptanceSeed, static_cast<std::uint64_t>(i));
    const Microstructure m = morphology::generate(config);
    const auto dm = geometry::discretize(m, 5);
    const auto path = prediction::simulate_crack(
        dm, {0.0, m.height / 2.0}, {1.0, 0.0}, generating,
        derive_seed(kAcceptanceSeed, 0x10000u + static_cast<std::uint64_t>(i)));
    auto records = estimation::extract_steps(dm, path, {1.0, 0.0});
    for (auto& r : records) {
      r.source = i;
      (r.configuration == geometry::Configuration::F1 ? ts.records_f1 : ts.records_f2)
          .push_back(std::move(r));
    }
    ts.provenance.push_back(io::microstructure_id(m));
  }

  estimation::StabilityOptions stability;
  stability.fit.seed = kAcceptanceSeed;
  const auto rows = estimation::stability_curve(ts, {5, 10, 15, 20, 25, 30, 35}, stability);
  const auto& fit35 = rows.back();
  const double ll_fitted = fit35.log_likelihood_f1 + fit35.log_likelihood_f2;
  const double ll_generating = estimation::log_likelihood(generating, ts);
  const bool likelihood_ok = ll_fitted >= ll_generating - 1e-6;

  const auto& row25 = rows[4];
  const auto factors = [](const model::ModelParams& p) {
    return std::array<double, 6>{p.f1.mu1, p.f1.mu3, p.f1.mu4,
                                 p.f2.lambda1, p.f2.lambda2, p.f2.lambda3};
  };
  const char* names[6] = {"mu1", "mu3", "mu4", "lambda1", "lambda2", "lambda3"};
  const auto at25 = factors(row25.params);
  const auto at35 = factors(fit35.params);
  bool drift_ok = true;
  std::string drift_table;
  for (int j = 0; j < 6; ++j) {
    const double drift = std::abs(at35[j] - at25[j]) / std::abs(at25[j]);
    drift_ok &= drift < 0.10;
    drift_table += std::string(j == 0 ? "" : ", ") + names[j] + " " +
                   io::format_double(std::round(drift * 1000.0) / 10.0) + "%";
  }
  // The spec's own stability example restricts the claim to well-identified
  // parameters; report that subset for context (mu1, mu4, lambda2).
  const bool identified_ok =
      std::abs(at35[0] - at25[0]) / std::abs(at25[0]) < 0.10 &&
      std::abs(at35[2] - at25[2]) / std::abs(at25[2]) < 0.10 &&
      std::abs(at35[4] - at25[4]) / std::abs(at25[4]) < 0.10;

  const double elapsed = timer.seconds();
  const bool runtime_ok = elapsed < 600.0;
  detail = "fitted ll " + io::format_double(ll_fitted) + (likelihood_ok ? " >= " : " < ") +
           "generating ll " + io::format_double(ll_generating) + " - 1e-6; drift 25->35: " +
           drift_table +
           (drift_ok ? "" : " (>= 10% in weakly identified factors; see notes)") +
           "; identified subset (mu1, mu4, lambda2) " +
           (identified_ok ? "stable" : "UNSTABLE");
  if (!runtime_ok) detail += "; runtime budget (600 s) exceeded";
  return likelihood_ok && drift_ok && runtime_ok;
}

struct PipelineArtifacts {
  Microstructure microstructure;
  prediction::Ensemble ensemble;
};

PipelineArtifacts g_pipeline;  // built by criterion 9, reused by 6 and 7

bool criterion_9_performance(std::string& detail) {
  Timer total;
  morphology::MorphologyConfig config;
  config.seed = derive_seed(kAcceptanceSeed, 9);
  g_pipeline.microstructure = morphology::generate(config);
  const auto dm = geometry::discretize(g_pipeline.microstructure, 5);

  // One local prediction step at the crack start (largest candidate set).
  const model::ModelParams params;
  Rng rng(derive_seed(kAcceptanceSeed, 99));
  Timer step_timer;
  const std::vector<char> no_visits(dm.points.size(), 0);
  const auto first = prediction::local_step({{0.0, config.height / 2.0}, -1}, {1.0, 0.0}, dm,
                                            params, no_visits, rng);
  const double step_seconds = step_timer.seconds();
  if (!first) {
    detail = "no candidates at the crack start";
    return false;
  }

  g_pipeline.ensemble = prediction::simulate_ensemble(
      dm, {0.0, config.height / 2.0}, {1.0, 0.0}, params, 100,
      derive_seed(kAcceptanceSeed, 10), 1);
  g_pipeline.ensemble.microstructure_id = io::microstructure_id(g_pipeline.microstructure);
  const auto stats = analysis::compute_statistics(g_pipeline.ensemble);
  (void)stats;
  const double pipeline_seconds = total.seconds();

  detail = "local step " + io::format_double(std::round(step_seconds * 1e6) / 1e3) +
           " ms (<= 0.13 s); M=100 pipeline " +
           io::format_double(std::round(pipeline_seconds * 100.0) / 100.0) +
           " s (< 60 s target, <= 1375 s bound)";
  return step_seconds <= 0.13 && pipeline_seconds < 60.0;
}

bool criterion_6_hypotheses(std::string& detail) {
  Timer timer;
  const auto& m = g_pipeline.microstructure;
  const auto& e = g_pipeline.ensemble;
  if (e.paths.size() != 100) {
    detail = "pipeline ensemble missing";
    return false;
  }
  long long segments = 0;
  for (const auto& path : e.paths) {
    for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
      ++segments;
      const Point2 a = path.points[i];
      const Point2 b = path.points[i + 1];
      if (geometry::dot(b - a, {1.0, 0.0}) < 0.0) {
        detail = "H4 violated: backward step";
        return false;
      }
      for (const auto& agg : m.aggregates) {
        if (oracles::segment_crosses_interior(a, b, agg)) {
          detail = "H2 violated: segment crosses an aggregate interior";
          return false;
        }
      }
    }
  }
  if (timer.seconds() >= 120.0) {
    detail = "runtime budget (120 s) exceeded";
    return false;
  }
  detail = std::to_string(segments) + " segments over 100 paths, zero violations";
  return true;
}

bool criterion_7_tortuosity(std::string& detail) {
  Timer timer;
  // Zero-aggregate microstructure: exactly straight, tau == 1.
  const Microstructure empty{0.6, 0.225, {}};
  const auto dm_empty = geometry::discretize(empty, 5);
  const auto straight =
      prediction::simulate_crack(dm_empty, {0.0, 0.1125}, {1.0, 0.0}, {}, 1);
  if (analysis::tortuosity(straight) != 1.0) {
    detail = "zero-aggregate path has tau != 1";
    return false;
  }

  // Main ensemble plus two smaller independent ones.
  std::vector<prediction::Ensemble> ensembles{g_pipeline.ensemble};
  for (const std::uint64_t seed : {71ull, 72ull}) {
    morphology::MorphologyConfig config;
    config.seed = derive_seed(kAcceptanceSeed, seed);
    const Microstructure m = morphology::generate(config);
    const auto dm = geometry::discretize(m, 5);
    ensembles.push_back(prediction::simulate_ensemble(
        dm, {0.0, m.height / 2.0}, {1.0, 0.0}, {}, 30, derive_seed(kAcceptanceSeed, seed + 100)));
  }
  for (const auto& e : ensembles) {
    const auto stats = analysis::tortuosity_stats(e);
    for (const double tau : stats.values) {
      if (tau < 1.0 - 1e-12) {
        detail = "tau below 1: " + io::format_double(tau);
        return false;
      }
    }
    if (!(stats.median >= stats.p05 && stats.median <= stats.p95)) {
      detail = "median outside the (5%, 95%) interval";
      return false;
    }
  }
  if (timer.seconds() >= 120.0) {
    detail = "runtime budget (120 s) exceeded";
    return false;
  }
  detail = "3 ensembles checked";
  return true;
}

bool criterion_8_region_indices(std::string& detail) {
  prediction::Ensemble e;
  e.width = 1.0;
  e.height = 1.0;
  for (int k = 0; k < 100; ++k) {
    prediction::CrackPath p;
    const double y = 0.005 * (k + 1);
    p.points = {{0.0, y}, {1.0, y}};
    p.point_indices = {-1, -1};
    p.start = p.points.front();
    p.steps = 1;
    e.paths.push_back(std::move(p));
  }
  const auto region = analysis::confidence_region(e, 20);
  if (region.lower_order_index != 5 || region.upper_order_index != 95) {
    detail = "ordered indices are not (5, 95) for M=100";
    return false;
  }
  for (std::size_t j = 0; j < region.grid.size(); ++j) {
    if (region.lower[j] != 0.005 * 5 || region.upper[j] != 0.005 * 95) {
      detail = "order statistics select the wrong sample values";
      return false;
    }
  }

  prediction::Ensemble degenerate;
  degenerate.width = 1.0;
  degenerate.height = 1.0;
  degenerate.paths.assign(100, e.paths.front());
  if (analysis::confidence_region(degenerate, 20).diameter != 0.0) {
    detail = "identical paths should give diameter 0";
    return false;
  }
  detail = "indices 5/95 and zero-diameter degenerate case";
  return true;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ACCEPT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

bool criterion_10_determinism(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::current_path() / "acceptance_scratch";
  fs::remove_all(dir);
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  const std::string a = (dir / "a").string();
  const std::string b = (dir / "b").string();

  struct Step {
    std::string name;
    std::string args_a;
    std::string args_b;
    std::vector<std::string> outputs;  // relative to the out dir
  };
  const std::string micro = " --microstructure " + a + "/micro.json";
  std::vector<Step> steps;
  steps.push_back({"generate",
                   "generate --seed 7 --vf 0.25 --shape square -o micro.json --out-dir " + a,
                   "generate --seed 7 --vf 0.25 --shape square -o micro.json --out-dir " + b,
                   {"micro.json"}});
  steps.push_back({"discretize",
                   "discretize --input " + a + "/micro.json -o points.json --out-dir " + a,
                   "discretize --input " + a + "/micro.json -o points.json --out-dir " + b,
                   {"points.json"}});
  steps.push_back({"covariogram",
                   "covariogram" + micro + " --lags 0:0.02:0.005 --samples 40000 --seed 5 "
                   "--threads 1 -o cov.csv --out-dir " + a,
                   "covariogram" + micro + " --lags 0:0.02:0.005 --samples 40000 --seed 5 "
                   "--threads 3 -o cov.csv --out-dir " + b,
                   {"cov.csv"}});
  steps.push_back({"synthesize-training",
                   "synthesize-training --n 3 --width 0.3 --height 0.15 --seed 5 -o train.json "
                   "--out-dir " + a,
                   "synthesize-training --n 3 --width 0.3 --height 0.15 --seed 5 -o train.json "
                   "--out-dir " + b,
                   {"train.json"}});
  steps.push_back({"fit",
                   "fit --training " + a + "/train.json --seed 6 --starts 2 --max-iters 60 "
                   "--sizes 2,3 -o fitted.json --out-dir " + a,
                   "fit --training " + a + "/train.json --seed 6 --starts 2 --max-iters 60 "
                   "--sizes 2,3 -o fitted.json --out-dir " + b + " --threads 3",
                   {"fitted.json", "fitted.json.report.json", "fitted.json.stability.csv"}});
  steps.push_back({"predict",
                   "predict" + micro + " --paths 8 --seed 3 --threads 1 --csv -o pred --out-dir " + a,
                   "predict" + micro + " --paths 8 --seed 3 --threads 4 --csv -o pred --out-dir " + b,
                   {"pred.ensemble.json", "pred.stats.json", "pred.svg", "pred.region.csv"}});
  steps.push_back({"analyze",
                   "analyze --ensemble " + a + "/pred.ensemble.json" + micro +
                       " --csv -o analysis --out-dir " + a,
                   "analyze --ensemble " + a + "/pred.ensemble.json" + micro +
                       " --csv -o analysis --out-dir " + b,
                   {"analysis.stats.json", "analysis.svg", "analysis.region.csv"}});

  for (const Step& step : steps) {
    if (run_cli(step.args_a) != 0 || run_cli(step.args_b) != 0) {
      detail = step.name + " exited nonzero";
      return false;
    }
    for (const std::string& out : step.outputs) {
      if (!files_equal(a + "/" + out, b + "/" + out)) {
        detail = step.name + ": " + out + " differs between runs";
        return false;
      }
    }
  }

  // selftest report on stdout, twice.
  const std::string report_a = (dir / "selftest_a.txt").string();
  const std::string report_b = (dir / "selftest_b.txt").string();
  const std::string selftest = std::string(ACCEPT_CLI_PATH) + " selftest --quick --seed 4 > ";
  if (std::system((selftest + report_a + " 2>/dev/null").c_str()) != 0 ||
      std::system((selftest + report_b + " 2>/dev/null").c_str()) != 0) {
    detail = "selftest exited nonzero";
    return false;
  }
  if (!files_equal(report_a, report_b)) {
    detail = "selftest reports differ between runs";
    return false;
  }
  detail = "8 commands byte-identical across reruns and thread counts";
  return true;
}

}  // namespace

int main() {
  std::printf("acceptance suite (seed %llu)\n",
              static_cast<unsigned long long>(kAcceptanceSeed));
  run_criterion(1, "kernel defaults match the shipped parameter file byte-exactly",
                criterion_1_defaults);
  run_criterion(2, "transition probabilities normalize to 1 within 1e-12 and stay positive",
                criterion_2_normalization);
  run_criterion(3, "shadow filtering equals brute-force visibility exactly",
                criterion_3_shadow_oracle);
  run_criterion(4, "discrete Frechet equals exhaustive coupling enumeration",
                criterion_4_frechet_oracle);
  run_criterion(5, "parameter recovery and stability drift on 35 synthetic microstructures",
                criterion_5_parameter_recovery);
  run_criterion(9, "performance: local step and full M=100 pipeline", criterion_9_performance);
  run_criterion(6, "simulated paths satisfy the forward and no-crossing hypotheses",
                criterion_6_hypotheses);
  run_criterion(7, "tortuosity bounds and order-statistics consistency", criterion_7_tortuosity);
  run_criterion(8, "confidence-region ordered indices and degenerate diameter",
                criterion_8_region_indices);
  run_criterion(10, "CLI determinism across reruns and thread counts", criterion_10_determinism);

  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  }
  return g_failures;
}
