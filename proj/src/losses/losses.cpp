#include "metasdf/losses/losses.hpp"

#include <cmath>

#include "metasdf/common/error.hpp"

namespace metasdf::losses {

namespace {

void require_matching(const char* op, const ad::Tensor& pred, const ad::Tensor& target) {
  if (pred.numel() == 0) throw ShapeError(std::string(op) + ": empty batch");
  if (pred.numel() != target.numel()) {
    throw ShapeError(std::string(op) + ": pred " + ad::shape_str(pred.shape()) + " vs target " +
                     ad::shape_str(target.shape()));
  }
}

ad::Tensor flat(const ad::Tensor& t) {
  return ad::reshape(t, {static_cast<int>(t.numel())});
}

// clamp(x, +-d) = min(max(x, -d), d), built from relu so it stays on the graph.
ad::Tensor clamp_sym(const ad::Tensor& x, double d) {
  ad::Tensor lo = ad::sub(ad::relu(ad::add_scalar(x, d)), ad::Tensor::scalar(d));
  return ad::sub(ad::Tensor::scalar(d), ad::relu(ad::sub(ad::Tensor::scalar(d), lo)));
}

}  // namespace

ad::Tensor l1_loss(const ad::Tensor& pred, const ad::Tensor& target) {
  require_matching("l1_loss", pred, target);
  return ad::mean(ad::abs(ad::sub(flat(pred), flat(target))));
}

ad::Tensor clamped_l1(const ad::Tensor& pred, const ad::Tensor& target, double delta) {
  require_matching("clamped_l1", pred, target);
  if (delta <= 0.0) throw NumericError("clamped_l1: delta must be positive");
  return ad::mean(ad::abs(ad::sub(clamp_sym(flat(pred), delta), clamp_sym(flat(target), delta))));
}

ad::Tensor bce_with_logits(const ad::Tensor& logits, const ad::Tensor& targets) {
  require_matching("bce_with_logits", logits, targets);
  // relu(x) - x*t + log(1 + exp(-|x|))
  ad::Tensor x = flat(logits);
  ad::Tensor t = flat(targets);
  ad::Tensor softplus = ad::log(ad::add_scalar(ad::exp(ad::neg(ad::abs(x))), 1.0));
  return ad::mean(ad::add(ad::sub(ad::relu(x), ad::mul(x, t)), softplus));
}

ad::Tensor sign_targets(const ad::Tensor& signed_distances) {
  std::vector<double> t(signed_distances.vec());
  for (auto& v : t) v = v >= 0.0 ? 1.0 : 0.0;
  const int n = static_cast<int>(t.size());
  return ad::Tensor({n}, std::move(t));
}

ad::Tensor composite_loss(const ad::Tensor& pred, const ad::Tensor& target,
                          const ad::Tensor& log_var_sdf, const ad::Tensor& log_var_sign) {
  if (pred.shape().size() != 2 || pred.shape()[1] != 2) {
    throw ShapeError("composite_loss: pred must be (n, 2), got " + ad::shape_str(pred.shape()));
  }
  if (pred.shape()[0] != static_cast<int>(target.numel()) || target.numel() == 0) {
    throw ShapeError("composite_loss: target count does not match pred rows");
  }
  ad::Tensor dist = ad::slice_last(pred, 0, 1);
  ad::Tensor logit = ad::slice_last(pred, 1, 1);
  ad::Tensor dist_term = l1_loss(dist, target);
  ad::Tensor sign_term = bce_with_logits(logit, sign_targets(target));
  ad::Tensor weighted_dist =
      ad::add(ad::mul(ad::exp(ad::neg(log_var_sdf)), dist_term), log_var_sdf);
  ad::Tensor weighted_sign =
      ad::add(ad::mul(ad::exp(ad::neg(log_var_sign)), sign_term), log_var_sign);
  return ad::add(weighted_dist, weighted_sign);
}

CompositeTerms composite_terms(const ad::Tensor& pred, const ad::Tensor& target) {
  ad::Tensor dist = ad::slice_last(pred.detached(), 0, 1);
  ad::Tensor logit = ad::slice_last(pred.detached(), 1, 1);
  CompositeTerms terms;
  terms.l1 = l1_loss(dist, target.detached()).item();
  terms.bce = bce_with_logits(logit, sign_targets(target)).item();
  return terms;
}

double combine_outputs(double distance, double sign_logit) {
  const double magnitude = std::fabs(distance);
  return sign_logit >= 0.0 ? magnitude : -magnitude;
}

}  // namespace metasdf::losses
