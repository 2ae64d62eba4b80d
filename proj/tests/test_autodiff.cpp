#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "metasdf/autodiff/gradcheck.hpp"
#include "metasdf/autodiff/graph.hpp"
#include "metasdf/autodiff/ops.hpp"
#include "metasdf/common/rng.hpp"

using namespace metasdf;
using namespace metasdf::ad;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

// Two-layer relu MLP with flat parameters, built from raw ops:
// weights [in*h | h | h*out | out], inputs (n, in).
Tensor tiny_mlp(const Tensor& params, const Tensor& coords, int in, int h, int out) {
  Tensor w1 = reshape(slice_last(params, 0, in * h), {in, h});
  Tensor b1 = slice_last(params, in * h, h);
  Tensor w2 = reshape(slice_last(params, in * h + h, h * out), {h, out});
  Tensor b2 = slice_last(params, in * h + h + h * out, out);
  Tensor a1 = relu(add(matmul(coords, w1), b1));
  return add(matmul(a1, w2), b2);
}

constexpr int tiny_mlp_size(int in, int h, int out) { return in * h + h + h * out + out; }

}  // namespace

TEST_CASE("op values match definitions") {
  Tensor r = relu(Tensor({3}, {-1.0, 0.0, 2.0}));
  CHECK(r.vec() == std::vector<double>{0.0, 0.0, 2.0});

  Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor a({3, 2}, {1, 2, 3, 4, 5, 6});
  Tensor prod = matmul(eye, a);
  for (int i = 0; i < 6; ++i) CHECK(prod.at(i) == a.at(i));

  CHECK(mean(abs(Tensor({2}, {1.0, -3.0}))).item() == doctest::Approx(2.0));

  CHECK(sum(Tensor({3}, {1, 2, 3})).item() == 6.0);
  Tensor cat = concat_last({Tensor({2, 1}, {1, 2}), Tensor({2, 2}, {3, 4, 5, 6})});
  CHECK(cat.shape() == Shape{2, 3});
  CHECK(cat.vec() == std::vector<double>{1, 3, 4, 2, 5, 6});
}

TEST_CASE("shape mismatch raises a structured error") {
  Tensor a({2, 3}, std::vector<double>(6, 1.0));
  Tensor b({4, 5}, std::vector<double>(20, 1.0));
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("matmul"), ShapeError);
  CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("(2,3)"), ShapeError);
}

TEST_CASE("grad of x^2 at x=3 is 6") {
  auto g = Graph::create();
  Tensor x = g->leaf(Tensor::scalar(3.0));
  Tensor loss = mul(x, x);
  const Tensor wrt[] = {x};
  auto r = grad(loss, wrt);
  CHECK(r.grads[0].item() == doctest::Approx(6.0));
  CHECK(r.reached[0]);
}

TEST_CASE("second derivative of x^3 at x=2 is 12") {
  auto g = Graph::create();
  Tensor x = g->leaf(Tensor::scalar(2.0));
  Tensor loss = mul(mul(x, x), x);
  const Tensor wrt[] = {x};
  auto first = grad(loss, wrt, {.create_graph = true});
  CHECK(first.grads[0].item() == doctest::Approx(12.0));  // 3x^2
  auto second = grad(first.grads[0], wrt);
  CHECK(second.grads[0].item() == doctest::Approx(12.0));  // 6x
}

TEST_CASE("non-scalar loss rejected; detached wrt yields zero with flag") {
  auto g = Graph::create();
  Tensor x = g->leaf(Tensor({2}, {1.0, 2.0}));
  CHECK_THROWS_AS((void)grad(mul(x, x), std::span<const Tensor>{&x, 1}), ShapeError);

  Tensor unused = g->leaf(Tensor::scalar(5.0));
  Tensor loss = sum(x);
  const Tensor wrt[] = {unused};
  auto r = grad(loss, wrt);
  CHECK_FALSE(r.reached[0]);
  CHECK(r.grads[0].item() == 0.0);
}

TEST_CASE("two-layer mlp l1 loss gradient matches finite differences") {
  const int in = 2, h = 8, out = 1, n = 16;
  const int p = tiny_mlp_size(in, h, out);
  auto rng = Rng::seeded(7);
  const auto coords = random_vec(rng, n * in);
  const auto targets = random_vec(rng, n * out);
  const auto params0 = random_vec(rng, p, 0.5);

  auto objective = [&](const Tensor& x) {
    Tensor pred = tiny_mlp(x, Tensor({n, in}, coords), in, h, out);
    return mean(abs(sub(pred, Tensor({n, out}, targets))));
  };
  auto res = check_gradient(objective, params0, 1e-5);
  CAPTURE(res.worst_index);
  CHECK(res.max_rel_error <= 1e-5);
}

TEST_CASE("per-op gradients match finite differences") {
  auto rng = Rng::seeded(11);
  auto check = [&](const char* name, const Objective& f, std::vector<double> x0,
                   double tol = 2e-6) {
    auto res = check_gradient(f, x0, 1e-6);
    INFO(name << " worst index " << res.worst_index);
    CHECK(res.max_rel_error <= tol);
  };

  check("sigmoid-exp-log-recip", [](const Tensor& x) {
    return mean(log(add_scalar(exp(sigmoid(recip(add_scalar(x, 3.0)))), 1.0)));
  }, random_vec(rng, 6));

  check("matmul-transpose", [](const Tensor& x) {
    Tensor m = reshape(x, {3, 4});
    return sum(mul(matmul(m, transpose(m)), Tensor::full({3, 3}, 0.3)));
  }, random_vec(rng, 12));

  check("sum-rows-broadcast", [](const Tensor& x) {
    Tensor m = reshape(slice_last(x, 0, 6), {2, 3});
    Tensor v = slice_last(x, 6, 3);
    return mean(mul(add(m, v), add(m, v)));
  }, random_vec(rng, 9));

  check("max-rows", [](const Tensor& x) {
    return sum(max_rows(reshape(x, {4, 2})));
  }, random_vec(rng, 8));

  check("concat-slice", [](const Tensor& x) {
    Tensor a = slice_last(x, 0, 2);
    Tensor b = slice_last(x, 2, 3);
    Tensor c = concat_last({a, mul_scalar(b, 2.0)});
    return mean(mul(c, c));
  }, random_vec(rng, 5));
}

TEST_CASE("check_gradient on linear f is exact") {
  auto res = check_gradient([](const Tensor& x) { return sum(x); },
                            std::vector<double>{0.3, -1.2, 4.0}, 1e-5);
  CHECK(res.max_rel_error <= 1e-9);
  CHECK(res.kink_count == 0);
}

TEST_CASE("check_gradient flags a relu kink placed exactly at a sample") {
  // f(x) = relu(x0): one-sided slopes 0 and 1 at the kink.
  auto res = check_gradient([](const Tensor& x) { return sum(relu(x)); },
                            std::vector<double>{0.0, 1.0}, 1e-5);
  CHECK(res.kink_count == 1);
  CHECK(res.max_rel_error <= 1e-9);  // the smooth coordinate still checked
}

TEST_CASE("gradient linearity on random small graphs") {
  auto rng = Rng::seeded(23);
  for (int trial = 0; trial < 10; ++trial) {
    const double ca = rng.uniform(-2, 2), cb = rng.uniform(-2, 2);
    const auto xv = random_vec(rng, 8);

    auto make_losses = [&](const Tensor& x) {
      Tensor m = reshape(x, {2, 4});
      Tensor l1 = mean(mul(x, x));
      Tensor l2 = sum(sigmoid(matmul(m, transpose(m))));
      return std::pair{l1, l2};
    };

    auto g = Graph::create();
    Tensor x = g->leaf(Tensor({8}, xv));
    auto [l1, l2] = make_losses(x);
    Tensor combined = add(mul_scalar(l1, ca), mul_scalar(l2, cb));
    const Tensor wrt[] = {x};
    auto gc = grad(combined, wrt).grads[0];
    auto g1 = grad(l1, wrt).grads[0];
    auto g2 = grad(l2, wrt).grads[0];
    for (int i = 0; i < 8; ++i) {
      CHECK(gc.at(i) == doctest::Approx(ca * g1.at(i) + cb * g2.at(i)).epsilon(1e-12));
    }
  }
}

// Unrolled k-step adaptation on a tiny net; the outer gradient w.r.t. the
// initialization must agree with finite differences. This is the full
// second-order path: d/dtheta of a loss evaluated at theta - a*grad(theta).
TEST_CASE("unrolled inner loop outer gradient matches finite differences") {
  const int in = 1, h = 4, out = 1;  // 13 params
  const int p = tiny_mlp_size(in, h, out);
  auto rng = Rng::seeded(41);
  const int n_ctx = 8, n_tgt = 8;
  const auto ctx_x = random_vec(rng, n_ctx * in);
  const auto ctx_y = random_vec(rng, n_ctx);
  const auto tgt_x = random_vec(rng, n_tgt * in);
  const auto tgt_y = random_vec(rng, n_tgt);
  const double alpha = 0.05;

  for (int k = 1; k <= 3; ++k) {
    auto objective = [&](const Tensor& x) {
      Tensor theta = x;
      if (!theta.on_graph()) theta = Graph::create()->leaf(x);
      Tensor phi = theta;
      for (int j = 0; j < k; ++j) {
        Tensor pred = tiny_mlp(phi, Tensor({n_ctx, in}, ctx_x), in, h, out);
        // Smooth inner loss keeps the finite-difference oracle clean.
        Tensor diff = sub(pred, Tensor({n_ctx, out}, ctx_y));
        Tensor inner = mean(mul(diff, diff));
        const Tensor wrt[] = {phi};
        Tensor g = grad(inner, wrt, {.create_graph = true}).grads[0];
        phi = sub(phi, mul_scalar(g, alpha));
      }
      Tensor pred = tiny_mlp(phi, Tensor({n_tgt, in}, tgt_x), in, h, out);
      Tensor diff = sub(pred, Tensor({n_tgt, out}, tgt_y));
      return mean(mul(diff, diff));
    };
    auto res = check_gradient(objective, random_vec(rng, p, 0.7), 1e-5);
    CAPTURE(k);
    CAPTURE(res.worst_index);
    CHECK(res.max_rel_error <= 1e-4);
  }
}

TEST_CASE("tape replay determinism") {
  auto run = [] {
    auto rng = Rng::seeded(99);
    auto g = Graph::create();
    Tensor x = g->leaf(Tensor({16}, random_vec(rng, 16)));
    Tensor m = reshape(x, {4, 4});
    Tensor loss = mean(abs(matmul(sigmoid(m), transpose(m))));
    const Tensor wrt[] = {x};
    auto gr = grad(loss, wrt).grads[0];
    std::vector<double> out(gr.vec());
    out.push_back(loss.item());
    return out;
  };
  auto a = run();
  auto b = run();
  CHECK(a == b);  // bit-identical
}

TEST_CASE("first-order mode changes the gradient but not the loss value") {
  const int in = 1, h = 3, out = 1;
  const int p = tiny_mlp_size(in, h, out);
  auto rng = Rng::seeded(5);
  const auto ctx_x = random_vec(rng, 4);
  const auto ctx_y = random_vec(rng, 4);
  const auto theta0 = random_vec(rng, p, 0.8);

  auto run = [&](bool first_order) {
    auto g = Graph::create();
    Tensor theta = g->leaf(Tensor({p}, theta0));
    Tensor pred = tiny_mlp(theta, Tensor({4, in}, ctx_x), in, h, out);
    Tensor diff = sub(pred, Tensor({4, out}, ctx_y));
    Tensor inner = mean(mul(diff, diff));
    const Tensor wrt[] = {theta};
    Tensor gi = grad(inner, wrt, {.create_graph = true}).grads[0];
    if (first_order) gi = stop_gradient(gi);
    Tensor phi = sub(theta, mul_scalar(gi, 0.1));
    Tensor pred2 = tiny_mlp(phi, Tensor({4, in}, ctx_x), in, h, out);
    Tensor outer = mean(mul(pred2, pred2));
    auto og = grad(outer, wrt).grads[0];
    return std::pair{outer.item(), std::vector<double>(og.vec().begin(), og.vec().end())};
  };

  auto [loss_full, grad_full] = run(false);
  auto [loss_fo, grad_fo] = run(true);
  CHECK(loss_full == loss_fo);
  bool any_diff = false;
  for (std::size_t i = 0; i < grad_full.size(); ++i) {
    if (grad_full[i] != grad_fo[i]) any_diff = true;
  }
  CHECK(any_diff);
}
