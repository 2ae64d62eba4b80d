#include "metasdf/nets/conditioning.hpp"

#include <algorithm>

#include "metasdf/common/error.hpp"

namespace metasdf::nets {

namespace {

std::vector<std::pair<int, int>> concat_layer_dims(const ConcatConfig& config) {
  auto dims = detail::layer_dims_of(config.mlp);
  for (int l : config.inject_layers()) dims[l].first += config.latent_dim;
  return dims;
}

std::vector<std::pair<int, int>> hypernet_layer_dims(const HypernetConfig& config) {
  const int target_size = static_cast<int>(mlp_param_count(config.target));
  std::vector<std::pair<int, int>> dims;
  int in = config.latent_dim;
  for (int l = 0; l < config.num_layers; ++l) {
    const int out = (l == config.num_layers - 1) ? target_size : config.hidden_dim;
    dims.emplace_back(in, out);
    in = out;
  }
  return dims;
}

ParameterVector layout_from_dims(const std::vector<std::pair<int, int>>& dims) {
  ParameterVector pv;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const auto tag = "layer" + std::to_string(l);
    pv.add_segment(tag + ".weight", {dims[l].first, dims[l].second});
    pv.add_segment(tag + ".bias", {dims[l].second});
  }
  return pv;
}

}  // namespace

std::vector<int> ConcatConfig::inject_layers() const {
  std::vector<int> layers;
  for (int l : {0, 2}) {
    if (l < mlp.num_layers) layers.push_back(l);
  }
  return layers;
}

ParameterVector concat_layout(const ConcatConfig& config) {
  return layout_from_dims(concat_layer_dims(config));
}

ParameterVector init_concat(const ConcatConfig& config, std::uint64_t seed) {
  auto pv = concat_layout(config);
  detail::he_uniform_fill(pv, seed);
  return pv;
}

ad::Tensor concat_forward(const ad::Tensor& params, const ConcatConfig& config,
                          const ad::Tensor& z, const ad::Tensor& coords) {
  if (z.shape().size() != 1 || z.shape()[0] != config.latent_dim) {
    throw ShapeError("concat_forward: latent " + ad::shape_str(z.shape()) + " does not match dim " +
                     std::to_string(config.latent_dim));
  }
  const auto dims = concat_layer_dims(config);
  if (params.numel() != [&] {
        std::int64_t n = 0;
        for (auto [i, o] : dims) n += static_cast<std::int64_t>(i) * o + o;
        return n;
      }()) {
    throw ShapeError("concat_forward: params do not match widened layout");
  }
  const auto inject = config.inject_layers();
  const int n = coords.shape()[0];

  ad::Tensor h = coords;
  int offset = 0;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    if (std::find(inject.begin(), inject.end(), static_cast<int>(l)) != inject.end()) {
      ad::Tensor zrow = ad::add(ad::Tensor::zeros({n, config.latent_dim}), z);
      h = ad::concat_last({h, zrow});
    }
    const auto [in, out] = dims[l];
    ad::Tensor w = ad::reshape(ad::slice_last(params, offset, in * out), {in, out});
    offset += in * out;
    ad::Tensor b = ad::slice_last(params, offset, out);
    offset += out;
    h = ad::add(ad::matmul(h, w), b);
    if (l + 1 < dims.size()) h = ad::relu(h);
  }
  return h;
}

ParameterVector hypernet_layout(const HypernetConfig& config) {
  return layout_from_dims(hypernet_layer_dims(config));
}

ParameterVector init_hypernet(const HypernetConfig& config, std::uint64_t seed) {
  auto pv = hypernet_layout(config);
  detail::he_uniform_fill(pv, seed);
  const auto head = "layer" + std::to_string(config.num_layers - 1) + ".weight";
  for (auto& v : pv.segment_data(head)) v *= config.head_scale;
  return pv;
}

ad::Tensor hypernet_forward(const ad::Tensor& hparams, const HypernetConfig& config,
                            const ad::Tensor& z) {
  if (z.shape().size() != 1 || z.shape()[0] != config.latent_dim) {
    throw ShapeError("hypernet_forward: latent " + ad::shape_str(z.shape()) +
                     " does not match dim " + std::to_string(config.latent_dim));
  }
  const auto dims = hypernet_layer_dims(config);
  ad::Tensor zrow = ad::reshape(z, {1, config.latent_dim});
  ad::Tensor out = detail::feed_forward(hparams, dims, zrow);
  return ad::reshape(out, {static_cast<int>(mlp_param_count(config.target))});
}

BiasOnlyHypernet build_bias_only_hypernet(const ParameterVector& concat_params,
                                          const ConcatConfig& config) {
  const int zd = config.latent_dim;
  const auto plain = mlp_layout(config.mlp);
  const auto target_size = plain.size();

  BiasOnlyHypernet result;
  result.config = HypernetConfig{.target = config.mlp,
                                 .latent_dim = zd,
                                 .hidden_dim = 0,
                                 .num_layers = 1,
                                 .head_scale = 1.0};
  result.config.hidden_dim = 1;  // unused for a single affine layer
  result.hparams = hypernet_layout(result.config);

  auto hw = result.hparams.segment_data("layer0.weight");  // (zd, target_size)
  auto hb = result.hparams.segment_data("layer0.bias");    // phi0
  const auto inject = config.inject_layers();
  const auto base_dims = detail::layer_dims_of(config.mlp);

  std::int64_t concat_offset = 0;
  for (std::size_t l = 0; l < base_dims.size(); ++l) {
    const auto [in, out] = base_dims[l];
    const bool injected =
        std::find(inject.begin(), inject.end(), static_cast<int>(l)) != inject.end();
    const int wide_in = injected ? in + zd : in;

    const auto tag = "layer" + std::to_string(l);
    const auto& wseg = plain.segment(tag + ".weight");
    const auto& bseg = plain.segment(tag + ".bias");
    const auto cw = concat_params.data().subspan(concat_offset,
                                                 static_cast<std::size_t>(wide_in) * out);
    concat_offset += static_cast<std::int64_t>(wide_in) * out;
    const auto cb = concat_params.data().subspan(concat_offset, out);
    concat_offset += out;

    // Coordinate rows of the widened weight become the plain weight.
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j)
        hb[wseg.offset + static_cast<std::int64_t>(i) * out + j] =
            cw[static_cast<std::size_t>(i) * out + j];
    // Plain bias is the concat bias; the latent rows become the z -> bias map.
    for (int j = 0; j < out; ++j) hb[bseg.offset + j] = cb[j];
    if (injected) {
      for (int zi = 0; zi < zd; ++zi)
        for (int j = 0; j < out; ++j)
          hw[static_cast<std::size_t>(zi) * target_size + bseg.offset + j] =
              cw[static_cast<std::size_t>(in + zi) * out + j];
    }
  }
  if (concat_offset != concat_params.size()) {
    throw ShapeError("build_bias_only_hypernet: concat params do not match layout");
  }
  return result;
}

}  // namespace metasdf::nets
