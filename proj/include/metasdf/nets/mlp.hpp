#pragma once

#include <cstdint>

#include "metasdf/autodiff/ops.hpp"
#include "metasdf/nets/params.hpp"

namespace metasdf::nets {

// Fully connected relu MLP; num_layers counts linear maps, so 4 layers means
// in -> h -> h -> h -> out with relu between. No normalization layers.
struct MlpConfig {
  int in_dim = 2;
  int hidden_dim = 256;
  int num_layers = 4;
  int out_dim = 1;

  void validate() const;
  bool operator==(const MlpConfig&) const = default;
};

// Zeroed parameters with the layer segment layout for the given config.
ParameterVector mlp_layout(const MlpConfig& config);
std::int64_t mlp_param_count(const MlpConfig& config);

// He-uniform weights (bound sqrt(6/fan_in)), zero biases; deterministic.
ParameterVector init_mlp(const MlpConfig& config, std::uint64_t seed);

// coords (n, in_dim) -> (n, out_dim); differentiable w.r.t. params and coords.
ad::Tensor mlp_forward(const ad::Tensor& params, const MlpConfig& config, const ad::Tensor& coords);

namespace detail {
// Shared feed-forward: consumes weight/bias pairs sequentially from `params`
// for the given layer dimensions, relu between layers, linear output.
ad::Tensor feed_forward(const ad::Tensor& params,
                        const std::vector<std::pair<int, int>>& layer_dims,
                        const ad::Tensor& x);
std::vector<std::pair<int, int>> layer_dims_of(const MlpConfig& config);
void he_uniform_fill(ParameterVector& pv, std::uint64_t seed);
}  // namespace detail

}  // namespace metasdf::nets
