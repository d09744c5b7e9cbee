#include "crackpath/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crackpath/analysis.hpp"
#include "crackpath/estimation.hpp"
#include "crackpath/io.hpp"
#include "crackpath/model.hpp"
#include "crackpath/morphology.hpp"
#include "crackpath/oracles.hpp"
#include "crackpath/prediction.hpp"
#include "crackpath/rng.hpp"

namespace crackpath::selftest {

using geometry::Microstructure;
using geometry::Point2;

int Report::failures() const {
  int n = 0;
  for (const Line& l : lines) n += l.pass ? 0 : 1;
  return n;
}

std::string Report::to_string() const {
  std::string out;
  for (const Line& l : lines) {
    out += l.pass ? "[PASS] " : "[FAIL] ";
    out += l.name;
    if (!l.detail.empty()) {
      out += " — ";
      out += l.detail;
    }
    out += '\n';
  }
  out += all_pass() ? "selftest: all suites passed\n"
                    : "selftest: " + std::to_string(failures()) + " suite(s) failed\n";
  return out;
}

namespace {

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

Line shadow_vs_visibility(const Options& options) {
  const int n_instances = options.quick ? 40 : 150;
  Rng rng(derive_seed(options.seed, 1));
  int mismatches = 0;
  for (int trial = 0; trial < n_instances; ++trial) {
    const Microstructure m = random_instance(rng, 8);
    const auto dm = geometry::discretize(m, 5);
    Point2 tip;
    for (;;) {
      tip = {rng.uniform(0.0, m.width), rng.uniform(0.0, m.height)};
      bool clear = true;
      for (const auto& a : m.aggregates) {
        if (geometry::point_in_aggregate(tip, a)) {
          clear = false;
          break;
        }
      }
      if (clear) break;
    }
    const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Point2 dir{std::cos(ang), std::sin(ang)};
    const auto fov = geometry::field_of_view(tip, dir, dm, {});
    const auto surv = geometry::shadow_filter(tip, fov, dm);
    std::vector<int> expected;
    for (const int idx : fov) {
      if (oracles::visible(tip, dm.points[static_cast<std::size_t>(idx)].position, m)) {
        expected.push_back(idx);
      }
    }
    if (surv != expected) ++mismatches;
  }
  return {"shadow-vs-visibility (" + std::to_string(n_instances) + " instances)",
          mismatches == 0, mismatches == 0 ? "" : std::to_string(mismatches) + " mismatches"};
}

Line frechet_vs_enumeration(const Options& options) {
  const int n_pairs = options.quick ? 40 : 120;
  Rng rng(derive_seed(options.seed, 2));
  int mismatches = 0;
  for (int trial = 0; trial < n_pairs; ++trial) {
    std::vector<Point2> a, b;
    const int na = 1 + rng.uniform_int(8);
    const int nb = 1 + rng.uniform_int(8);
    for (int i = 0; i < na; ++i) a.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    for (int i = 0; i < nb; ++i) b.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
    const double dp = analysis::discrete_frechet(a, b);
    const double brute = oracles::frechet_enumeration(a, b);
    if (std::abs(dp - brute) > 1e-12) ++mismatches;
  }
  return {"frechet-dp-vs-enumeration (" + std::to_string(n_pairs) + " pairs)", mismatches == 0,
          mismatches == 0 ? "" : std::to_string(mismatches) + " mismatches"};
}

Line kernel_normalization(const Options& options) {
  const int n_sets = options.quick ? 300 : 2000;
  Rng rng(derive_seed(options.seed, 3));
  const model::ModelParams params;
  int failures = 0;
  for (int trial = 0; trial < n_sets; ++trial) {
    const bool f1 = rng.uniform01() < 0.5;
    const int n = 1 + rng.uniform_int(24);
    geometry::CandidateSet cs;
    cs.configuration = f1 ? geometry::Configuration::F1 : geometry::Configuration::F2;
    for (int i = 0; i < n; ++i) {
      geometry::Candidate c;
      c.d_norm = rng.uniform01();
      c.theta_norm = rng.uniform01();
      c.same_aggregate = f1 && (i == 0 || rng.uniform01() < 0.3);
      cs.candidates.push_back(c);
    }
    const auto probs = model::transition_probabilities(cs, params);

    double sum = 0.0;
    bool positive = true;
    for (const double p : probs) {
      sum += p;
      positive &= p > 0.0;
    }
    bool ok = positive && std::abs(sum - 1.0) <= 1e-12;

    // The same probabilities recomputed from direct kernel formulas. The sign
    // flip (when injected) corrupts the implementation-side value here.
    const auto mu = params.f1.as_array();
    const auto lambda = params.f2.as_array();
    double direct_sum = 0.0;
    std::vector<double> direct(probs.size());
    for (std::size_t i = 0; i < cs.candidates.size(); ++i) {
      const auto& c = cs.candidates[i];
      direct[i] = f1 ? oracles::kernel_f1_direct(c.d_norm, c.theta_norm, c.same_aggregate,
                                                 mu.data())
                     : oracles::kernel_f2_direct(c.d_norm, c.theta_norm, lambda.data());
      direct_sum += direct[i];
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
      double impl = probs[i];
      if (options.inject_kernel_sign_flip) {
        const auto& c = cs.candidates[i];
        const double w =
            f1 ? model::kernel_f1(c.d_norm, c.theta_norm, c.same_aggregate, params.f1)
               : model::kernel_f2(c.d_norm, c.theta_norm, params.f2);
        impl = (1.0 / w) / direct_sum;  // exp(+...) instead of exp(-...)
      }
      if (std::abs(impl - direct[i] / direct_sum) > 1e-12) ok = false;
    }
    if (!ok) ++failures;
  }
  return {"kernel-normalization (" + std::to_string(n_sets) + " candidate sets)", failures == 0,
          failures == 0 ? "" : std::to_string(failures) + " sets off"};
}

Line parameter_recovery_smoke(const Options& options) {
  const int n_micro = options.quick ? 4 : 8;
  morphology::MorphologyConfig config;
  config.width = 0.3;
  config.height = 0.15;
  config.max_attempts = 500000;

  const model::ModelParams generating;
  estimation::TrainingSet ts;
  for (int i = 0; i < n_micro; ++i) {
    config.seed = derive_seed(options.seed, 100 + static_cast<std::uint64_t>(i));
    const Microstructure m = morphology::generate(config);
    const auto dm = geometry::discretize(m, 5);
    const auto path = prediction::simulate_crack(dm, {0.0, m.height / 2.0}, {1.0, 0.0},
                                                 generating, derive_seed(options.seed, 200 + i));
    auto records = estimation::extract_steps(dm, path, {1.0, 0.0});
    for (auto& r : records) {
      r.source = i;
      (r.configuration == geometry::Configuration::F1 ? ts.records_f1 : ts.records_f2)
          .push_back(std::move(r));
    }
    ts.provenance.push_back(io::microstructure_id(m));
  }
  if (ts.records_f1.empty() || ts.records_f2.empty()) {
    return {"parameter-recovery-smoke", false, "synthetic data missing a configuration"};
  }

  estimation::FitOptions fit_opts;
  fit_opts.n_starts = options.quick ? 2 : 4;
  fit_opts.seed = derive_seed(options.seed, 4);
  const auto result = estimation::fit(ts, fit_opts);
  const double ll_generating = estimation::log_likelihood(generating, ts);
  const bool ok = result.log_likelihood >= ll_generating - 1e-6;
  return {"parameter-recovery-smoke (" + std::to_string(n_micro) + " microstructures)", ok,
          ok ? "" : "fit " + io::format_double(result.log_likelihood) + " < generating " +
                        io::format_double(ll_generating)};
}

}  // namespace

Report run(const Options& options) {
  Report report;
  report.lines.push_back(shadow_vs_visibility(options));
  report.lines.push_back(frechet_vs_enumeration(options));
  report.lines.push_back(kernel_normalization(options));
  report.lines.push_back(parameter_recovery_smoke(options));
  return report;
}

}  // namespace crackpath::selftest
