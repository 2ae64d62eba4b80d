#pragma once

#include "metasdf/nets/mlp.hpp"

namespace metasdf::nets {

enum class Pooling { Mean, Max };

// Permutation-invariant set encoder: a shared per-point relu MLP followed by
// mean or max pooling over the point axis.
struct SetEncoderConfig {
  int point_dim = 3;  // coordinate dim + 1 sdf channel
  int hidden_dim = 256;
  int num_layers = 4;
  int latent_dim = 256;
  bool operator==(const SetEncoderConfig&) const = default;
};

ParameterVector set_encoder_layout(const SetEncoderConfig& config);
ParameterVector init_set_encoder(const SetEncoderConfig& config, std::uint64_t seed);

// points (n, point_dim), n >= 1 -> z {latent_dim}.
ad::Tensor set_encode(const ad::Tensor& eparams, const SetEncoderConfig& config,
                      const ad::Tensor& points, Pooling pooling);

}  // namespace metasdf::nets
