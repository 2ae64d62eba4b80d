#include "metasdf/nets/mlp.hpp"

#include <cmath>

#include "metasdf/common/error.hpp"
#include "metasdf/common/rng.hpp"

namespace metasdf::nets {

void MlpConfig::validate() const {
  if (num_layers < 2) throw Error("mlp config: num_layers must be >= 2");
  if (in_dim < 1 || hidden_dim < 1 || out_dim < 1) {
    throw Error("mlp config: all dims must be >= 1");
  }
}

namespace detail {

std::vector<std::pair<int, int>> layer_dims_of(const MlpConfig& config) {
  config.validate();
  std::vector<std::pair<int, int>> dims;
  int in = config.in_dim;
  for (int l = 0; l < config.num_layers; ++l) {
    const int out = (l == config.num_layers - 1) ? config.out_dim : config.hidden_dim;
    dims.emplace_back(in, out);
    in = out;
  }
  return dims;
}

ad::Tensor feed_forward(const ad::Tensor& params,
                        const std::vector<std::pair<int, int>>& layer_dims,
                        const ad::Tensor& x) {
  ad::Tensor h = x;
  int offset = 0;
  for (std::size_t l = 0; l < layer_dims.size(); ++l) {
    const auto [in, out] = layer_dims[l];
    ad::Tensor w = ad::reshape(ad::slice_last(params, offset, in * out), {in, out});
    offset += in * out;
    ad::Tensor b = ad::slice_last(params, offset, out);
    offset += out;
    h = ad::add(ad::matmul(h, w), b);
    if (l + 1 < layer_dims.size()) h = ad::relu(h);
  }
  return h;
}

void he_uniform_fill(ParameterVector& pv, std::uint64_t seed) {
  auto rng = Rng::seeded(seed);
  for (const auto& seg : pv.segments()) {
    if (seg.shape.size() != 2) continue;  // biases stay zero
    const double bound = std::sqrt(6.0 / seg.shape[0]);
    auto data = pv.segment_data(seg.name);
    for (auto& v : data) v = rng.uniform(-bound, bound);
  }
}

}  // namespace detail

ParameterVector mlp_layout(const MlpConfig& config) {
  ParameterVector pv;
  const auto dims = detail::layer_dims_of(config);
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const auto tag = "layer" + std::to_string(l);
    pv.add_segment(tag + ".weight", {dims[l].first, dims[l].second});
    pv.add_segment(tag + ".bias", {dims[l].second});
  }
  return pv;
}

std::int64_t mlp_param_count(const MlpConfig& config) { return mlp_layout(config).size(); }

ParameterVector init_mlp(const MlpConfig& config, std::uint64_t seed) {
  auto pv = mlp_layout(config);
  detail::he_uniform_fill(pv, seed);
  return pv;
}

ad::Tensor mlp_forward(const ad::Tensor& params, const MlpConfig& config,
                       const ad::Tensor& coords) {
  if (coords.shape().size() != 2 || coords.shape()[1] != config.in_dim) {
    throw ShapeError("mlp_forward: coords " + ad::shape_str(coords.shape()) + " do not match in_dim " +
                     std::to_string(config.in_dim));
  }
  if (params.numel() != mlp_param_count(config)) {
    throw ShapeError("mlp_forward: params length " + std::to_string(params.numel()) +
                     " does not match config size " + std::to_string(mlp_param_count(config)));
  }
  return detail::feed_forward(params, detail::layer_dims_of(config), coords);
}

}  // namespace metasdf::nets
