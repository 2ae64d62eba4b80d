#include "metasdf/nets/set_encoder.hpp"

#include "metasdf/common/error.hpp"

namespace metasdf::nets {

namespace {

MlpConfig as_mlp(const SetEncoderConfig& c) {
  return MlpConfig{.in_dim = c.point_dim,
                   .hidden_dim = c.hidden_dim,
                   .num_layers = c.num_layers,
                   .out_dim = c.latent_dim};
}

}  // namespace

ParameterVector set_encoder_layout(const SetEncoderConfig& config) {
  return mlp_layout(as_mlp(config));
}

ParameterVector init_set_encoder(const SetEncoderConfig& config, std::uint64_t seed) {
  return init_mlp(as_mlp(config), seed);
}

ad::Tensor set_encode(const ad::Tensor& eparams, const SetEncoderConfig& config,
                      const ad::Tensor& points, Pooling pooling) {
  if (points.shape().size() != 2 || points.shape()[0] < 1) {
    throw ShapeError("set_encode: context must be a nonempty (n, d) batch, got " +
                     ad::shape_str(points.shape()));
  }
  ad::Tensor features = mlp_forward(eparams, as_mlp(config), points);
  if (pooling == Pooling::Max) return ad::max_rows(features);
  const double inv_n = 1.0 / static_cast<double>(points.shape()[0]);
  return ad::mul_scalar(ad::sum_rows(features), inv_n);
}

}  // namespace metasdf::nets
