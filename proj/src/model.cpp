#include "crackpath/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace crackpath::model {

void validate(const ModelParams& p) {
  const auto check = [](const std::array<double, 6>& a, const char* which) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!(a[i] > 0.0) || !std::isfinite(a[i])) {
        throw Error(ErrorCategory::invalid_argument,
                    std::string("model: ") + which + " parameter " + std::to_string(i + 1) +
                        " must be strictly positive and finite");
      }
    }
  };
  check(p.f1.as_array(), "F1");
  check(p.f2.as_array(), "F2");
}

double log_weight_f1(double d_norm, double theta_norm, bool same_aggregate,
                     const KernelParamsF1& p) {
  if (same_aggregate) {
    return -p.mu1 * std::pow(theta_norm, p.mu2);
  }
  return -p.mu3 * std::pow(d_norm * theta_norm, p.mu6) - p.mu4 * std::pow(d_norm, p.mu5);
}

double log_weight_f2(double d_norm, double theta_norm, const KernelParamsF2& p) {
  return -p.lambda1 * std::pow(d_norm * theta_norm, p.lambda5) -
         p.lambda2 * std::pow(d_norm, p.lambda6) - p.lambda3 * std::pow(theta_norm, p.lambda4);
}

std::vector<double> probabilities_from_log_weights(const std::vector<double>& log_weights) {
  if (log_weights.empty()) {
    throw Error(ErrorCategory::invalid_argument, "transition probabilities: empty weight list");
  }
  const double shift = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> out(log_weights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    out[i] = std::exp(log_weights[i] - shift);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> transition_probabilities(const geometry::CandidateSet& cs,
                                             const ModelParams& p) {
  if (cs.candidates.empty()) {
    throw Error(ErrorCategory::invalid_argument, "transition probabilities: empty candidate set");
  }
  std::vector<double> logw(cs.candidates.size());
  for (std::size_t i = 0; i < cs.candidates.size(); ++i) {
    const auto& c = cs.candidates[i];
    logw[i] = cs.configuration == geometry::Configuration::F1
                  ? log_weight_f1(c.d_norm, c.theta_norm, c.same_aggregate, p.f1)
                  : log_weight_f2(c.d_norm, c.theta_norm, p.f2);
  }
  return probabilities_from_log_weights(logw);
}

}  // namespace crackpath::model
