#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "metasdf/autodiff/gradcheck.hpp"
#include "metasdf/common/rng.hpp"
#include "metasdf/nets/conditioning.hpp"
#include "metasdf/nets/mlp.hpp"
#include "metasdf/nets/set_encoder.hpp"

using namespace metasdf;
using namespace metasdf::nets;

namespace {

ad::Tensor coords_batch(Rng& rng, int n, int d, double scale = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(n) * d);
  for (auto& x : v) x = scale * rng.uniform(-1.0, 1.0);
  return ad::Tensor({n, d}, std::move(v));
}

ad::Tensor latent(Rng& rng, int d, double scale = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(d));
  for (auto& x : v) x = scale * rng.normal();
  return ad::Tensor({d}, std::move(v));
}

}  // namespace

TEST_CASE("parameter vector segments tile the buffer and round trip") {
  MlpConfig cfg{.in_dim = 3, .hidden_dim = 5, .num_layers = 3, .out_dim = 2};
  auto pv = init_mlp(cfg, 1);
  std::int64_t expect = 0;
  for (const auto& s : pv.segments()) {
    CHECK(s.offset == expect);
    expect += s.size;
  }
  CHECK(expect == pv.size());

  auto t = pv.to_tensor();
  auto pv2 = mlp_layout(cfg);
  pv2.assign(t.vec());
  CHECK(std::equal(pv.data().begin(), pv.data().end(), pv2.data().begin()));
  CHECK(pv.congruent(pv2));
}

TEST_CASE("init_mlp is deterministic with zero biases") {
  MlpConfig cfg{.in_dim = 2, .hidden_dim = 256, .num_layers = 4, .out_dim = 1};
  auto a = init_mlp(cfg, 0);
  auto b = init_mlp(cfg, 0);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));

  for (const auto& seg : a.segments()) {
    if (seg.shape.size() == 1) {
      for (double v : a.segment_data(seg.name)) CHECK(v == 0.0);
    }
  }

  auto c = init_mlp(cfg, 1);
  bool differs = false;
  for (std::size_t i = 0; i < static_cast<std::size_t>(a.size()); ++i) {
    if (a.data()[i] != c.data()[i]) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("init_mlp weight variance approximates 2/fan_in") {
  MlpConfig cfg{.in_dim = 256, .hidden_dim = 256, .num_layers = 3, .out_dim = 1};
  auto pv = init_mlp(cfg, 42);
  auto w = pv.segment_data("layer1.weight");  // fan_in 256
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= static_cast<double>(w.size());
  double var = 0.0;
  for (double v : w) var += (v - mean) * (v - mean);
  var /= static_cast<double>(w.size());
  const double expected = 2.0 / 256.0;
  CHECK(var == doctest::Approx(expected).epsilon(0.2));
}

TEST_CASE("mlp_forward collapses to the output bias for zero weights") {
  MlpConfig cfg{.in_dim = 2, .hidden_dim = 8, .num_layers = 4, .out_dim = 2};
  auto pv = mlp_layout(cfg);
  auto bias = pv.segment_data("layer3.bias");
  bias[0] = 1.5;
  bias[1] = -0.25;
  auto rng = Rng::seeded(3);
  auto out = mlp_forward(pv.to_tensor(), cfg, coords_batch(rng, 5, 2));
  for (int i = 0; i < 5; ++i) {
    CHECK(out.at(i * 2 + 0) == 1.5);
    CHECK(out.at(i * 2 + 1) == -0.25);
  }
}

TEST_CASE("single input equals batch of one") {
  MlpConfig cfg{.in_dim = 3, .hidden_dim = 16, .num_layers = 4, .out_dim = 1};
  auto pv = init_mlp(cfg, 9);
  auto rng = Rng::seeded(10);
  auto batch = coords_batch(rng, 7, 3);
  auto full = mlp_forward(pv.to_tensor(), cfg, batch);
  for (int i = 0; i < 7; ++i) {
    std::vector<double> row(3);
    for (int j = 0; j < 3; ++j) row[j] = batch.at(i * 3 + j);
    auto single = mlp_forward(pv.to_tensor(), cfg, ad::Tensor({1, 3}, row));
    CHECK(single.item() == doctest::Approx(full.at(i)).epsilon(1e-12));
  }
}

TEST_CASE("mlp_forward gradient w.r.t. params matches finite differences") {
  MlpConfig cfg{.in_dim = 2, .hidden_dim = 6, .num_layers = 3, .out_dim = 1};
  auto pv = init_mlp(cfg, 17);
  auto rng = Rng::seeded(18);
  auto coords = coords_batch(rng, 12, 2);
  auto objective = [&](const ad::Tensor& p) {
    auto out = mlp_forward(p, cfg, coords);
    return ad::mean(ad::mul(out, out));
  };
  auto res = ad::check_gradient(objective, pv.data(), 1e-5);
  CHECK(res.max_rel_error <= 1e-5);
}

TEST_CASE("concat with zero latent and zero cross-weights equals the plain mlp") {
  ConcatConfig cc{.mlp = {.in_dim = 2, .hidden_dim = 8, .num_layers = 4, .out_dim = 1},
                  .latent_dim = 4};
  auto plain = init_mlp(cc.mlp, 21);
  auto widened = concat_layout(cc);
  // Copy plain weights into the coordinate rows; latent rows stay zero.
  for (int l = 0; l < cc.mlp.num_layers; ++l) {
    const auto tag = "layer" + std::to_string(l);
    const auto& pseg = plain.segment(tag + ".weight");
    const int out = pseg.shape[1], in = pseg.shape[0];
    auto src = plain.segment_data(tag + ".weight");
    auto dst = widened.segment_data(tag + ".weight");
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j) dst[i * out + j] = src[i * out + j];
    auto bsrc = plain.segment_data(tag + ".bias");
    auto bdst = widened.segment_data(tag + ".bias");
    std::copy(bsrc.begin(), bsrc.end(), bdst.begin());
  }
  auto rng = Rng::seeded(22);
  auto coords = coords_batch(rng, 9, 2);
  auto z0 = ad::Tensor::zeros({4});
  auto a = concat_forward(widened.to_tensor(), cc, z0, coords);
  auto b = mlp_forward(plain.to_tensor(), cc.mlp, coords);
  for (int i = 0; i < 9; ++i) CHECK(a.at(i) == doctest::Approx(b.at(i)).epsilon(1e-14));
}

TEST_CASE("distinct latents give distinct outputs") {
  ConcatConfig cc{.mlp = {.in_dim = 2, .hidden_dim = 8, .num_layers = 4, .out_dim = 1},
                  .latent_dim = 4};
  auto params = init_concat(cc, 31);
  auto rng = Rng::seeded(32);
  auto coords = coords_batch(rng, 6, 2);
  auto za = latent(rng, 4);
  auto zb = latent(rng, 4);
  auto a = concat_forward(params.to_tensor(), cc, za, coords);
  auto b = concat_forward(params.to_tensor(), cc, zb, coords);
  bool differs = false;
  for (int i = 0; i < 6; ++i) {
    if (a.at(i) != b.at(i)) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("concat conditioning is a bias-only hypernetwork") {
  ConcatConfig cc{.mlp = {.in_dim = 2, .hidden_dim = 12, .num_layers = 4, .out_dim = 1},
                  .latent_dim = 6};
  auto params = init_concat(cc, 77);
  auto equiv = build_bias_only_hypernet(params, cc);
  auto rng = Rng::seeded(78);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto z = latent(rng, 6);
    auto x = coords_batch(rng, 3, 2);
    auto direct = concat_forward(params.to_tensor(), cc, z, x);
    auto generated = hypernet_forward(equiv.hparams.to_tensor(), equiv.config, z);
    auto via_hyper = mlp_forward(generated, cc.mlp, x);
    for (int i = 0; i < 3; ++i) {
      worst = std::max(worst, std::fabs(direct.at(i) - via_hyper.at(i)));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("hypernet with zero head emits a constant network for all z") {
  HypernetConfig hc{.target = {.in_dim = 2, .hidden_dim = 6, .num_layers = 3, .out_dim = 1},
                    .latent_dim = 4,
                    .hidden_dim = 8,
                    .num_layers = 3};
  auto hp = hypernet_layout(hc);
  detail::he_uniform_fill(hp, 5);
  auto phi0 = init_mlp(hc.target, 6);
  {
    auto head_w = hp.segment_data("layer2.weight");
    std::fill(head_w.begin(), head_w.end(), 0.0);
    auto head_b = hp.segment_data("layer2.bias");
    std::copy(phi0.data().begin(), phi0.data().end(), head_b.begin());
  }
  auto rng = Rng::seeded(51);
  auto za = latent(rng, 4);
  auto zb = latent(rng, 4);
  auto pa = hypernet_forward(hp.to_tensor(), hc, za);
  auto pb = hypernet_forward(hp.to_tensor(), hc, zb);
  for (std::int64_t i = 0; i < pa.numel(); ++i) {
    CHECK(pa.at(i) == pb.at(i));
    CHECK(pa.at(i) == phi0.data()[i]);
  }
}

TEST_CASE("hypernet gradient w.r.t. z matches finite differences") {
  HypernetConfig hc{.target = {.in_dim = 2, .hidden_dim = 4, .num_layers = 3, .out_dim = 1},
                    .latent_dim = 3,
                    .hidden_dim = 6,
                    .num_layers = 3};
  auto hp = init_hypernet(hc, 8);
  auto rng = Rng::seeded(9);
  auto coords = coords_batch(rng, 5, 2);
  auto hpt = hp.to_tensor();
  auto objective = [&](const ad::Tensor& z) {
    auto generated = hypernet_forward(hpt, hc, z);
    auto out = mlp_forward(generated, hc.target, coords);
    return ad::mean(ad::mul(out, out));
  };
  std::vector<double> z0 = {0.3, -0.7, 1.1};
  auto res = ad::check_gradient(objective, z0, 1e-5);
  CHECK(res.max_rel_error <= 1e-5);
}

TEST_CASE("set encoder is permutation invariant") {
  SetEncoderConfig sc{.point_dim = 3, .hidden_dim = 16, .num_layers = 4, .latent_dim = 8};
  auto ep = init_set_encoder(sc, 61);
  auto rng = Rng::seeded(62);
  const int n = 20;
  std::vector<double> pts(static_cast<std::size_t>(n) * 3);
  for (auto& v : pts) v = rng.uniform(-1, 1);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> shuffled = perm;
  Rng prng = Rng::seeded(63);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[prng.uniform_int(i)]);
  }
  std::vector<double> pts_shuffled(pts.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) pts_shuffled[i * 3 + j] = pts[shuffled[i] * 3 + j];

  for (auto pooling : {Pooling::Mean, Pooling::Max}) {
    auto za = set_encode(ep.to_tensor(), sc, ad::Tensor({n, 3}, pts), pooling);
    auto zb = set_encode(ep.to_tensor(), sc, ad::Tensor({n, 3}, pts_shuffled), pooling);
    for (int i = 0; i < 8; ++i) CHECK(za.at(i) == doctest::Approx(zb.at(i)).epsilon(1e-12));
  }
}

TEST_CASE("single point context pools to that point's feature") {
  SetEncoderConfig sc{.point_dim = 3, .hidden_dim = 8, .num_layers = 3, .latent_dim = 5};
  auto ep = init_set_encoder(sc, 71);
  ad::Tensor pt({1, 3}, {0.2, -0.4, 0.9});
  auto feature = mlp_forward(ep.to_tensor(),
                             MlpConfig{.in_dim = 3, .hidden_dim = 8, .num_layers = 3, .out_dim = 5},
                             pt);
  for (auto pooling : {Pooling::Mean, Pooling::Max}) {
    auto z = set_encode(ep.to_tensor(), sc, pt, pooling);
    for (int i = 0; i < 5; ++i) CHECK(z.at(i) == feature.at(i));
  }
}

TEST_CASE("duplicated context leaves mean pooling unchanged") {
  SetEncoderConfig sc{.point_dim = 3, .hidden_dim = 8, .num_layers = 4, .latent_dim = 6};
  auto ep = init_set_encoder(sc, 81);
  auto rng = Rng::seeded(82);
  const int n = 10;
  std::vector<double> pts(static_cast<std::size_t>(n) * 3);
  for (auto& v : pts) v = rng.uniform(-1, 1);
  std::vector<double> doubled(pts);
  doubled.insert(doubled.end(), pts.begin(), pts.end());

  auto za = set_encode(ep.to_tensor(), sc, ad::Tensor({n, 3}, pts), Pooling::Mean);
  auto zb = set_encode(ep.to_tensor(), sc, ad::Tensor({2 * n, 3}, doubled), Pooling::Mean);
  for (int i = 0; i < 6; ++i) CHECK(za.at(i) == doctest::Approx(zb.at(i)).epsilon(1e-12));
}

TEST_CASE("empty context is rejected") {
  SetEncoderConfig sc{.point_dim = 3, .hidden_dim = 8, .num_layers = 3, .latent_dim = 4};
  auto ep = init_set_encoder(sc, 91);
  CHECK_THROWS_AS(
      (void)set_encode(ep.to_tensor(), sc, ad::Tensor({0, 3}, std::vector<double>{}), Pooling::Mean),
      metasdf::ShapeError);
}
