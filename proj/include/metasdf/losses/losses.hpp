#pragma once

#include "metasdf/autodiff/ops.hpp"

namespace metasdf::losses {

// Learnable log-variances of the uncertainty-weighted composite loss.
// Both start at 0 and are stepped by the outer optimizer only.
struct CompositeLossState {
  double log_var_sdf = 0.0;
  double log_var_sign = 0.0;
};

// Mean absolute error. pred and target must have equal element counts.
ad::Tensor l1_loss(const ad::Tensor& pred, const ad::Tensor& target);

// Mean |clamp(pred, +-delta) - clamp(target, +-delta)|. Baseline outer losses
// only; never used inside the adaptation loop.
ad::Tensor clamped_l1(const ad::Tensor& pred, const ad::Tensor& target, double delta = 0.1);

// Composite distance + sign loss with uncertainty weighting:
//   exp(-a) * l1(d, s) + a + exp(-b) * bce(logit, 1[s >= 0]) + b.
// pred is (n, 2) rows of (distance, sign logit); target holds signed
// distances. Sign target 1 means outside; s == 0 counts as outside.
// a and b are scalar tensors so the loss is differentiable in them.
ad::Tensor composite_loss(const ad::Tensor& pred, const ad::Tensor& target,
                          const ad::Tensor& log_var_sdf, const ad::Tensor& log_var_sign);

// Unweighted terms, for logging.
struct CompositeTerms {
  double l1 = 0.0;
  double bce = 0.0;
};
CompositeTerms composite_terms(const ad::Tensor& pred, const ad::Tensor& target);

// Test-time combination of the two heads: |distance| signed by the logit.
double combine_outputs(double distance, double sign_logit);

// Numerically stable binary cross entropy on logits; targets in {0, 1}.
ad::Tensor bce_with_logits(const ad::Tensor& logits, const ad::Tensor& targets);

// Sign targets from signed distances (1 outside, 0 inside; 0 -> outside).
ad::Tensor sign_targets(const ad::Tensor& signed_distances);

}  // namespace metasdf::losses
