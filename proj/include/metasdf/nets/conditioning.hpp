#pragma once

#include "metasdf/nets/mlp.hpp"

namespace metasdf::nets {

// Concatenation-conditioned MLP: the latent code is appended to the input
// and re-injected at the third linear layer.
struct ConcatConfig {
  MlpConfig mlp;  // base topology; in_dim is the coordinate dimension
  int latent_dim = 256;

  // 0-indexed linear layers whose input is widened by the latent code.
  std::vector<int> inject_layers() const;
  bool operator==(const ConcatConfig&) const = default;
};

ParameterVector concat_layout(const ConcatConfig& config);
ParameterVector init_concat(const ConcatConfig& config, std::uint64_t seed);

// z {latent_dim}, coords (n, in_dim) -> (n, out_dim).
ad::Tensor concat_forward(const ad::Tensor& params, const ConcatConfig& config,
                          const ad::Tensor& z, const ad::Tensor& coords);

// MLP mapping a latent code to the full parameter vector of a target MLP.
// num_layers == 1 degenerates to a single affine map.
struct HypernetConfig {
  MlpConfig target;
  int latent_dim = 256;
  int hidden_dim = 256;
  int num_layers = 3;
  double head_scale = 1e-2;  // final-layer init scale; keeps generated nets small
  bool operator==(const HypernetConfig&) const = default;
};

ParameterVector hypernet_layout(const HypernetConfig& config);
ParameterVector init_hypernet(const HypernetConfig& config, std::uint64_t seed);

// z {latent_dim} -> generated target parameters {mlp_param_count(target)}.
ad::Tensor hypernet_forward(const ad::Tensor& hparams, const HypernetConfig& config,
                            const ad::Tensor& z);

// Single linear layer writing only the bias segments of the target, built so
// that decoding z reproduces concat_forward(params, z, x) exactly.
struct BiasOnlyHypernet {
  ParameterVector hparams;
  HypernetConfig config;
};
BiasOnlyHypernet build_bias_only_hypernet(const ParameterVector& concat_params,
                                          const ConcatConfig& config);

}  // namespace metasdf::nets
