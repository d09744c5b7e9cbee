#pragma once

// Transition kernel of the crack Markov chain. Weights are decreasing
// exponentials of the normalized indicators; the F1 form distinguishes
// same-aggregate candidates (interface following) from matrix crossings,
// the F2 form applies when no interface option exists.

#include <array>
#include <vector>

#include "crackpath/geometry.hpp"

namespace crackpath::model {

struct KernelParamsF1 {
  double mu1 = 7.06;   // weight of the same-aggregate angle term
  double mu2 = 4.1;    // its exponent
  double mu3 = 30.2;   // weight of the interaction term (matrix crossing)
  double mu4 = 8.9;    // weight of the distance term (matrix crossing)
  double mu5 = 0.2;    // exponent of the distance term
  double mu6 = 0.85;   // exponent of the interaction term

  std::array<double, 6> as_array() const { return {mu1, mu2, mu3, mu4, mu5, mu6}; }
  static KernelParamsF1 from_array(const std::array<double, 6>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
};

struct KernelParamsF2 {
  double lambda1 = 34.2;   // weight of the interaction term
  double lambda2 = 9.2;    // weight of the distance term
  double lambda3 = 13.16;  // weight of the angle term
  double lambda4 = 1.79;   // exponent of the angle term
  double lambda5 = 1.08;   // exponent of the interaction term
  double lambda6 = 0.42;   // exponent of the distance term

  std::array<double, 6> as_array() const {
    return {lambda1, lambda2, lambda3, lambda4, lambda5, lambda6};
  }
  static KernelParamsF2 from_array(const std::array<double, 6>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
};

struct ModelParams {
  KernelParamsF1 f1;
  KernelParamsF2 f2;
};

// Throws Error{invalid_argument} unless every parameter is strictly positive
// and finite.
void validate(const ModelParams& p);

// Unnormalized log-weights; inputs in [0, 1].
double log_weight_f1(double d_norm, double theta_norm, bool same_aggregate,
                     const KernelParamsF1& p);
double log_weight_f2(double d_norm, double theta_norm, const KernelParamsF2& p);

inline double kernel_f1(double d_norm, double theta_norm, bool same_aggregate,
                        const KernelParamsF1& p);
inline double kernel_f2(double d_norm, double theta_norm, const KernelParamsF2& p);

// Max-shifted exponentiation and normalization; sums to 1 within 1e-12 and
// every entry stays strictly positive.
std::vector<double> probabilities_from_log_weights(const std::vector<double>& log_weights);

// Probability vector over the candidates of one tip. Throws on an empty set.
std::vector<double> transition_probabilities(const geometry::CandidateSet& cs,
                                             const ModelParams& p);

}  // namespace crackpath::model

#include <cmath>

namespace crackpath::model {

inline double kernel_f1(double d_norm, double theta_norm, bool same_aggregate,
                        const KernelParamsF1& p) {
  return std::exp(log_weight_f1(d_norm, theta_norm, same_aggregate, p));
}

inline double kernel_f2(double d_norm, double theta_norm, const KernelParamsF2& p) {
  return std::exp(log_weight_f2(d_norm, theta_norm, p));
}

}  // namespace crackpath::model
