#include "crackpath/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "crackpath/rng.hpp"

namespace crackpath::estimation {

using geometry::Configuration;

std::vector<StepRecord> extract_steps(const geometry::DiscretizedMicrostructure& dm,
                                      const prediction::CrackPath& path,
                                      geometry::Point2 direction) {
  if (path.points.empty()) {
    throw Error(ErrorCategory::invalid_argument, "extract_steps: empty path");
  }
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    if (geometry::inside_any_aggregate(dm.source, path.points[k])) {
      throw Error(ErrorCategory::geometry,
                  "extract_steps: path point " + std::to_string(k) +
                      " lies strictly inside an aggregate");
    }
  }

  const auto find_index = [&](geometry::Point2 p) -> int {
    int best = -1;
    double best_d = 1e-9;
    for (const auto& dp : dm.points) {
      const double d = geometry::distance(dp.position, p);
      if (d <= best_d) {
        best_d = d;
        best = dp.index;
      }
    }
    return best;
  };

  std::vector<char> visited(dm.points.size(), 0);
  geometry::TipState tip{path.points[0], find_index(path.points[0])};
  if (tip.point_index >= 0) visited[static_cast<std::size_t>(tip.point_index)] = 1;

  std::vector<StepRecord> records;
  records.reserve(path.points.size());
  for (std::size_t k = 1; k < path.points.size(); ++k) {
    const geometry::Point2 target = path.points[k];
    const auto cs = geometry::build_candidate_set(tip, direction, dm, visited);
    const int target_index = find_index(target);
    if (!cs) {
      // Only a terminal boundary projection may follow an empty candidate set.
      if (k + 1 == path.points.size() && target_index < 0) break;
      throw Error(ErrorCategory::estimation,
                  "extract_steps: step " + std::to_string(k) +
                      " has no candidates but the path continues");
    }
    if (target_index < 0) {
      throw Error(ErrorCategory::estimation,
                  "extract_steps: step " + std::to_string(k) +
                      " target is not a discretization point");
    }
    int chosen = -1;
    for (std::size_t i = 0; i < cs->candidates.size(); ++i) {
      if (cs->candidates[i].point_index == target_index) {
        chosen = static_cast<int>(i);
        break;
      }
    }
    if (chosen < 0) {
      throw Error(ErrorCategory::estimation,
                  "extract_steps: step " + std::to_string(k) +
                      " chose a point outside the rebuilt candidate set");
    }
    StepRecord rec;
    rec.configuration = cs->configuration;
    rec.chosen_index = chosen;
    rec.candidates.reserve(cs->candidates.size());
    for (const auto& c : cs->candidates) {
      rec.candidates.push_back({c.d_norm, c.theta_norm, c.same_aggregate});
    }
    records.push_back(std::move(rec));

    visited[static_cast<std::size_t>(target_index)] = 1;
    tip = geometry::TipState{dm.points[static_cast<std::size_t>(target_index)].position,
                             target_index};
  }
  return records;
}

namespace {

// Record-major flattened view of one configuration's records; logs are
// precomputed once so every likelihood evaluation reduces to exp calls.
struct FlatRecords {
  std::vector<double> d, t, a;     // d_norm, theta_norm, product
  std::vector<double> ld, lt, la;  // logs (entries with value 0 are unused)
  std::vector<unsigned char> same;
  std::vector<int> offset;  // record r spans candidates [offset[r], offset[r+1])
  std::vector<int> chosen;  // global candidate index per record
  bool f1 = true;

  std::size_t n_records() const { return chosen.size(); }
};

FlatRecords flatten(const std::vector<StepRecord>& records, bool f1) {
  FlatRecords fr;
  fr.f1 = f1;
  fr.offset.push_back(0);
  for (const StepRecord& rec : records) {
    if (rec.candidates.empty()) {
      throw Error(ErrorCategory::estimation, "training record without candidates");
    }
    if (rec.chosen_index < 0 ||
        rec.chosen_index >= static_cast<int>(rec.candidates.size())) {
      throw Error(ErrorCategory::estimation, "training record with invalid chosen index");
    }
    fr.chosen.push_back(fr.offset.back() + rec.chosen_index);
    for (const CandidateFeatures& c : rec.candidates) {
      const double prod = c.d_norm * c.theta_norm;
      fr.d.push_back(c.d_norm);
      fr.t.push_back(c.theta_norm);
      fr.a.push_back(prod);
      fr.ld.push_back(c.d_norm > 0.0 ? std::log(c.d_norm) : 0.0);
      fr.lt.push_back(c.theta_norm > 0.0 ? std::log(c.theta_norm) : 0.0);
      fr.la.push_back(prod > 0.0 ? std::log(prod) : 0.0);
      fr.same.push_back(c.same_aggregate ? 1 : 0);
    }
    fr.offset.push_back(static_cast<int>(fr.d.size()));
  }
  return fr;
}

inline double powx(double x, double lx, double e) {
  return x > 0.0 ? std::exp(e * lx) : 0.0;
}

struct EvalResult {
  double value = 0.0;
  std::array<double, 6> grad{};
};

// Log-likelihood (and gradient w.r.t. the actual parameters) of a contiguous
// record range.
EvalResult eval_range(const FlatRecords& fr, const std::array<double, 6>& p, std::size_t r_begin,
                      std::size_t r_end, bool want_grad) {
  thread_local std::vector<double> g, pw1, pw2, pw3;
  EvalResult out;
  for (std::size_t r = r_begin; r < r_end; ++r) {
    const int begin = fr.offset[r];
    const int end = fr.offset[r + 1];
    const int n = end - begin;
    g.resize(static_cast<std::size_t>(n));
    pw1.resize(static_cast<std::size_t>(n));
    pw2.resize(static_cast<std::size_t>(n));
    pw3.resize(static_cast<std::size_t>(n));

    double g_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const int c = begin + i;
      double gi;
      if (fr.f1) {
        if (fr.same[c]) {
          const double T = powx(fr.t[c], fr.lt[c], p[1]);
          pw1[i] = T;
          pw2[i] = 0.0;
          gi = -p[0] * T;
        } else {
          const double A = powx(fr.a[c], fr.la[c], p[5]);
          const double B = powx(fr.d[c], fr.ld[c], p[4]);
          pw1[i] = A;
          pw2[i] = B;
          gi = -p[2] * A - p[3] * B;
        }
        pw3[i] = 0.0;
      } else {
        const double A = powx(fr.a[c], fr.la[c], p[4]);
        const double B = powx(fr.d[c], fr.ld[c], p[5]);
        const double T = powx(fr.t[c], fr.lt[c], p[3]);
        pw1[i] = A;
        pw2[i] = B;
        pw3[i] = T;
        gi = -p[0] * A - p[1] * B - p[2] * T;
      }
      g[static_cast<std::size_t>(i)] = gi;
      g_max = std::max(g_max, gi);
    }

    double sum_exp = 0.0;
    for (int i = 0; i < n; ++i) sum_exp += std::exp(g[static_cast<std::size_t>(i)] - g_max);
    const int chosen_local = fr.chosen[r] - begin;
    out.value += g[static_cast<std::size_t>(chosen_local)] - g_max - std::log(sum_exp);

    if (!want_grad) continue;
    for (int i = 0; i < n; ++i) {
      const int c = begin + i;
      const double w = std::exp(g[static_cast<std::size_t>(i)] - g_max) / sum_exp;
      const double coeff = (i == chosen_local ? 1.0 : 0.0) - w;
      if (coeff == 0.0) continue;
      if (fr.f1) {
        if (fr.same[c]) {
          out.grad[0] += coeff * (-pw1[i]);
          if (fr.t[c] > 0.0) out.grad[1] += coeff * (-p[0] * pw1[i] * fr.lt[c]);
        } else {
          out.grad[2] += coeff * (-pw1[i]);
          if (fr.a[c] > 0.0) out.grad[5] += coeff * (-p[2] * pw1[i] * fr.la[c]);
          out.grad[3] += coeff * (-pw2[i]);
          if (fr.d[c] > 0.0) out.grad[4] += coeff * (-p[3] * pw2[i] * fr.ld[c]);
        }
      } else {
        out.grad[0] += coeff * (-pw1[i]);
        if (fr.a[c] > 0.0) out.grad[4] += coeff * (-p[0] * pw1[i] * fr.la[c]);
        out.grad[1] += coeff * (-pw2[i]);
        if (fr.d[c] > 0.0) out.grad[5] += coeff * (-p[1] * pw2[i] * fr.ld[c]);
        out.grad[2] += coeff * (-pw3[i]);
        if (fr.t[c] > 0.0) out.grad[3] += coeff * (-p[2] * pw3[i] * fr.lt[c]);
      }
    }
  }
  return out;
}

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double get() const { return sum + comp; }
};

constexpr std::size_t kRecordChunk = 256;

// Chunked evaluation: fixed chunk boundaries and an in-order compensated
// combine make the result identical for any worker count.
EvalResult eval_all(const FlatRecords& fr, const std::array<double, 6>& p, bool want_grad,
                    int threads) {
  const std::size_t n = fr.n_records();
  const std::size_t n_chunks = (n + kRecordChunk - 1) / kRecordChunk;
  std::vector<EvalResult> partial(n_chunks);
  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      partial[c] = eval_range(fr, p, c * kRecordChunk, std::min(n, (c + 1) * kRecordChunk),
                              want_grad);
    }
  };
  const int n_workers = std::max(1, threads);
  if (n_workers == 1 || n_chunks <= 1) {
    run_range(0, n_chunks);
  } else {
    std::vector<std::thread> pool;
    const std::size_t per = (n_chunks + n_workers - 1) / n_workers;
    for (int w = 0; w < n_workers; ++w) {
      const std::size_t begin = std::min(n_chunks, static_cast<std::size_t>(w) * per);
      const std::size_t end = std::min(n_chunks, begin + per);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  Neumaier value;
  std::array<Neumaier, 6> grad;
  for (const EvalResult& e : partial) {
    value.add(e.value);
    for (int j = 0; j < 6; ++j) grad[static_cast<std::size_t>(j)].add(e.grad[static_cast<std::size_t>(j)]);
  }
  EvalResult out;
  out.value = value.get();
  for (int j = 0; j < 6; ++j) out.grad[static_cast<std::size_t>(j)] = grad[static_cast<std::size_t>(j)].get();
  return out;
}

const std::vector<StepRecord>& records_for(const TrainingSet& ts, Which which) {
  if (which == Which::F1) return ts.records_f1;
  if (which == Which::F2) return ts.records_f2;
  throw Error(ErrorCategory::invalid_argument, "one configuration expected, not Both");
}

}  // namespace

double log_likelihood(const model::ModelParams& params, const TrainingSet& ts, Which which,
                      int threads) {
  model::validate(params);
  double total = 0.0;
  if (which == Which::F1 || which == Which::Both) {
    const FlatRecords fr = flatten(ts.records_f1, true);
    total += eval_all(fr, params.f1.as_array(), false, threads).value;
  }
  if (which == Which::F2 || which == Which::Both) {
    const FlatRecords fr = flatten(ts.records_f2, false);
    total += eval_all(fr, params.f2.as_array(), false, threads).value;
  }
  return total;
}

double value_and_gradient(const TrainingSet& ts, Which which,
                          const std::array<double, 6>& params, std::array<double, 6>& grad,
                          int threads) {
  const FlatRecords fr = flatten(records_for(ts, which), which == Which::F1);
  const EvalResult e = eval_all(fr, params, true, threads);
  grad = e.grad;
  return e.value;
}

std::array<double, 6> fd_gradient(const TrainingSet& ts, Which which,
                                  const std::array<double, 6>& params, double step) {
  // Central differences in log-parameter space, mapped back to d/d(log p).
  const FlatRecords fr = flatten(records_for(ts, which), which == Which::F1);
  std::array<double, 6> grad{};
  for (int j = 0; j < 6; ++j) {
    std::array<double, 6> hi = params;
    std::array<double, 6> lo = params;
    hi[static_cast<std::size_t>(j)] *= std::exp(step);
    lo[static_cast<std::size_t>(j)] *= std::exp(-step);
    const double f_hi = eval_all(fr, hi, false, 1).value;
    const double f_lo = eval_all(fr, lo, false, 1).value;
    grad[static_cast<std::size_t>(j)] = (f_hi - f_lo) / (2.0 * step);
  }
  return grad;
}

namespace {

using Vec6 = std::array<double, 6>;
using Mat6 = std::array<std::array<double, 6>, 6>;

double dot6(const Vec6& a, const Vec6& b) {
  double s = 0.0;
  for (int i = 0; i < 6; ++i) s += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
  return s;
}

double inf_norm(const Vec6& a) {
  double m = 0.0;
  for (const double v : a) m = std::max(m, std::abs(v));
  return m;
}

Mat6 identity6() {
  Mat6 m{};
  for (int i = 0; i < 6; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  return m;
}

struct BfgsOutcome {
  Vec6 params{};         // actual (positive) parameters
  double value = 0.0;    // log-likelihood
  int iterations = 0;
  bool converged = false;
  bool clamped = false;
};

// Maximizes the log-likelihood over log-parameters with a dense BFGS update
// and Armijo backtracking; steps are clamped to the [param_lo, param_hi] box.
BfgsOutcome bfgs_maximize(const FlatRecords& fr, const Vec6& start, const FitOptions& opts) {
  const double lo = std::log(opts.param_lo);
  const double hi = std::log(opts.param_hi);
  const auto clamp_x = [&](Vec6& x) {
    bool touched = false;
    for (double& v : x) {
      const double c = std::clamp(v, lo, hi);
      touched |= c != v;
      v = c;
    }
    return touched;
  };
  const auto to_params = [](const Vec6& x) {
    Vec6 p;
    for (int i = 0; i < 6; ++i) p[static_cast<std::size_t>(i)] = std::exp(x[static_cast<std::size_t>(i)]);
    return p;
  };
  // f = -log-likelihood as a function of x = log p.
  const auto eval = [&](const Vec6& x, Vec6* grad_x) {
    const Vec6 p = to_params(x);
    const EvalResult e = eval_all(fr, p, grad_x != nullptr, opts.threads);
    if (grad_x != nullptr) {
      for (int i = 0; i < 6; ++i) {
        (*grad_x)[static_cast<std::size_t>(i)] =
            -e.grad[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(i)];
      }
    }
    return -e.value;
  };

  BfgsOutcome out;
  Vec6 x = start;
  for (double& v : x) v = std::log(v);
  out.clamped = clamp_x(x);

  Vec6 grad;
  double f = eval(x, &grad);
  if (!std::isfinite(f)) return out;  // caller skips this start
  Mat6 h = identity6();

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    out.iterations = iter + 1;
    Vec6 dir;
    for (int i = 0; i < 6; ++i) {
      double s = 0.0;
      for (int j = 0; j < 6; ++j) {
        s -= h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * grad[static_cast<std::size_t>(j)];
      }
      dir[static_cast<std::size_t>(i)] = s;
    }
    double slope = dot6(grad, dir);
    if (slope >= 0.0) {  // not a descent direction: restart from steepest descent
      h = identity6();
      for (int i = 0; i < 6; ++i) dir[static_cast<std::size_t>(i)] = -grad[static_cast<std::size_t>(i)];
      slope = dot6(grad, dir);
      if (slope >= 0.0) {
        out.converged = true;
        break;
      }
    }

    double step = 1.0;
    Vec6 x_new;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = x;
      for (int i = 0; i < 6; ++i) x_new[static_cast<std::size_t>(i)] += step * dir[static_cast<std::size_t>(i)];
      const bool touched = clamp_x(x_new);
      f_new = eval(x_new, nullptr);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        out.clamped |= touched;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;  // no measurable progress along the search direction
      break;
    }

    Vec6 grad_new;
    const double f_check = eval(x_new, &grad_new);
    (void)f_check;

    Vec6 s, y;
    for (int i = 0; i < 6; ++i) {
      s[static_cast<std::size_t>(i)] = x_new[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(i)] = grad_new[static_cast<std::size_t>(i)] - grad[static_cast<std::size_t>(i)];
    }
    const double sy = dot6(s, y);
    if (sy > 1e-14) {
      // h <- (I - s y^T / sy) h (I - y s^T / sy) + s s^T / sy
      const double rho = 1.0 / sy;
      Mat6 hy{};
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          double v = h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          for (int k = 0; k < 6; ++k) {
            v -= rho * s[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(k)] *
                 h[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
          }
          hy[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
        }
      }
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          double v = hy[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          for (int k = 0; k < 6; ++k) {
            v -= rho * hy[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                 y[static_cast<std::size_t>(k)] * s[static_cast<std::size_t>(j)];
          }
          h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
              v + rho * s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
        }
      }
    } else {
      h = identity6();
    }

    const double delta = std::abs(f - f_new);
    x = x_new;
    f = f_new;
    grad = grad_new;
    if (delta < opts.tol) {
      out.converged = true;
      break;
    }
  }

  out.params = to_params(x);
  out.value = -f;
  for (const double v : out.params) {
    if (std::abs(v - opts.param_hi) < 1e-9 * opts.param_hi) out.clamped = true;
  }
  return out;
}

ConfigFit fit_config(const std::vector<StepRecord>& records, bool f1, const FitOptions& opts) {
  if (records.empty()) {
    throw Error(ErrorCategory::estimation,
                std::string("fit: no training records for configuration ") + (f1 ? "F1" : "F2"));
  }
  const FlatRecords fr = flatten(records, f1);

  // The multiplicative factors and the exponents get different start ranges.
  const std::array<int, 3> mult_idx = f1 ? std::array<int, 3>{0, 2, 3} : std::array<int, 3>{0, 1, 2};
  const auto is_mult = [&](int j) {
    return std::find(mult_idx.begin(), mult_idx.end(), j) != mult_idx.end();
  };

  std::vector<Vec6> starts;
  if (opts.warm_start) {
    starts.push_back(f1 ? opts.warm_start->f1.as_array() : opts.warm_start->f2.as_array());
  } else {
    const model::ModelParams defaults;
    starts.push_back(f1 ? defaults.f1.as_array() : defaults.f2.as_array());
  }
  Rng rng(derive_seed(opts.seed, f1 ? 1 : 2));
  while (static_cast<int>(starts.size()) < std::max(1, opts.n_starts)) {
    Vec6 s;
    for (int j = 0; j < 6; ++j) {
      const double lo = is_mult(j) ? opts.mult_lo : opts.exp_lo;
      const double hi = is_mult(j) ? opts.mult_hi : opts.exp_hi;
      s[static_cast<std::size_t>(j)] = std::exp(rng.uniform(std::log(lo), std::log(hi)));
    }
    starts.push_back(s);
  }

  // Identifiability probe at the deterministic start.
  const EvalResult at_start = eval_all(fr, starts.front(), true, opts.threads);

  ConfigFit best;
  bool have_best = false;
  int iterations = 0;
  for (const Vec6& s : starts) {
    const BfgsOutcome o = bfgs_maximize(fr, s, opts);
    iterations += o.iterations;
    if (!std::isfinite(o.value)) continue;
    if (!have_best || o.value > best.log_likelihood) {
      have_best = true;
      best.params = o.params;
      best.log_likelihood = o.value;
      best.converged = o.converged;
      best.clamped = o.clamped;
    }
  }
  if (!have_best) {
    throw Error(ErrorCategory::estimation, "fit: likelihood non-finite at every start");
  }
  best.iterations = iterations;
  best.identifiable =
      !(inf_norm(at_start.grad) < 1e-10 && best.log_likelihood <= at_start.value + opts.tol);
  return best;
}

}  // namespace

FitResult fit(const TrainingSet& ts, const FitOptions& options) {
  FitResult result;
  result.n_starts = std::max(1, options.n_starts);
  result.params = options.warm_start.value_or(model::ModelParams{});

  const bool do_f1 = options.which != Which::F2;
  const bool do_f2 = options.which != Which::F1;
  result.converged = true;
  result.identifiable = true;
  if (do_f1) {
    result.f1 = fit_config(ts.records_f1, true, options);
    result.params.f1 = model::KernelParamsF1::from_array(result.f1.params);
    result.log_likelihood += result.f1.log_likelihood;
    result.iterations += result.f1.iterations;
    result.converged &= result.f1.converged;
    result.identifiable &= result.f1.identifiable;
    result.clamped |= result.f1.clamped;
  }
  if (do_f2) {
    result.f2 = fit_config(ts.records_f2, false, options);
    result.params.f2 = model::KernelParamsF2::from_array(result.f2.params);
    result.log_likelihood += result.f2.log_likelihood;
    result.iterations += result.f2.iterations;
    result.converged &= result.f2.converged;
    result.identifiable &= result.f2.identifiable;
    result.clamped |= result.f2.clamped;
  }
  return result;
}

std::vector<StabilityRow> stability_curve(const TrainingSet& ts, const std::vector<int>& sizes,
                                          const StabilityOptions& options) {
  const int available = static_cast<int>(ts.provenance.size());
  if (sizes.empty()) {
    throw Error(ErrorCategory::invalid_argument, "stability_curve: no sizes given");
  }
  for (const int s : sizes) {
    if (s < 1 || s > available) {
      throw Error(ErrorCategory::invalid_argument,
                  "stability_curve: size " + std::to_string(s) + " outside [1, " +
                      std::to_string(available) + "]");
    }
  }

  std::vector<StabilityRow> rows;
  std::optional<model::ModelParams> previous;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const int size = sizes[i];
    TrainingSet subset;
    subset.provenance.assign(ts.provenance.begin(), ts.provenance.begin() + size);
    for (const StepRecord& r : ts.records_f1) {
      if (r.source < size) subset.records_f1.push_back(r);
    }
    for (const StepRecord& r : ts.records_f2) {
      if (r.source < size) subset.records_f2.push_back(r);
    }

    FitOptions opts = options.fit;
    if (i > 0) {
      // Continuation: nested data sets change slowly, so warm-start from the
      // previous estimate and spend fewer random restarts.
      opts.warm_start = previous;
      opts.n_starts = std::max(1, std::min(options.continuation_starts, options.fit.n_starts));
    }
    const FitResult r = fit(subset, opts);
    rows.push_back({size, r.params, r.f1.log_likelihood, r.f2.log_likelihood});
    previous = r.params;
  }
  return rows;
}

}  // namespace crackpath::estimation
