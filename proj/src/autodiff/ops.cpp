#include "metasdf/autodiff/ops.hpp"

#include <Eigen/Core>

#include <cmath>
#include <utility>

namespace metasdf::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<const RowMat>;
using MapMatMut = Eigen::Map<RowMat>;

std::shared_ptr<Graph> common_graph(const char* op, std::initializer_list<const Tensor*> ts) {
  std::shared_ptr<Graph> g;
  for (const Tensor* t : ts) {
    if (!t->on_graph()) continue;
    if (!g) {
      g = t->graph();
    } else if (g != t->graph()) {
      throw Error(std::string(op) + ": operands belong to different graphs");
    }
  }
  return g;
}

Tensor finish(const char* op, const std::shared_ptr<Graph>& g, const std::vector<Tensor>& inputs,
              TensorData out, BackwardFn bw) {
  if (!g) return Tensor(std::move(out.shape), std::move(out.values));
  return g->emit(op, inputs, std::move(out), std::move(bw));
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                   shape_str(b.shape()));
}

bool is_scalar(const Tensor& t) { return t.numel() == 1; }

// a is (n, m), b is (m): broadcast b across rows of a.
bool is_rowvec_broadcast(const Tensor& a, const Tensor& b) {
  return a.shape().size() == 2 && b.shape().size() == 1 && a.shape()[1] == b.shape()[0];
}

enum class AddMode { Same, ScalarRhs, ScalarLhs, RowvecRhs, RowvecLhs };

Tensor add_like(const char* op, const Tensor& a, const Tensor& b, double sign_b) {
  AddMode mode;
  if (a.shape() == b.shape()) {
    mode = AddMode::Same;
  } else if (is_scalar(b)) {
    mode = AddMode::ScalarRhs;
  } else if (is_scalar(a)) {
    mode = AddMode::ScalarLhs;
  } else if (is_rowvec_broadcast(a, b)) {
    mode = AddMode::RowvecRhs;
  } else if (is_rowvec_broadcast(b, a)) {
    mode = AddMode::RowvecLhs;
  } else {
    shape_fail(op, a, b);
  }

  const Tensor& big = (mode == AddMode::ScalarLhs || mode == AddMode::RowvecLhs) ? b : a;
  std::vector<double> out(big.vec());
  switch (mode) {
    case AddMode::Same: {
      const auto& bv = b.vec();
      if (sign_b > 0) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
      } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
      }
      break;
    }
    case AddMode::ScalarRhs: {
      const double c = sign_b * b.at(0);
      for (double& v : out) v += c;
      break;
    }
    case AddMode::ScalarLhs: {
      // out currently holds b; result is a + sign*b.
      const double c = a.at(0);
      for (double& v : out) v = c + sign_b * v;
      break;
    }
    case AddMode::RowvecRhs: {
      const int n = a.shape()[0], m = a.shape()[1];
      const auto& bv = b.vec();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out[static_cast<std::size_t>(i) * m + j] += sign_b * bv[j];
      break;
    }
    case AddMode::RowvecLhs: {
      const int n = b.shape()[0], m = b.shape()[1];
      const auto& av = a.vec();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
          auto& v = out[static_cast<std::size_t>(i) * m + j];
          v = av[j] + sign_b * v;
        }
      break;
    }
  }

  auto g = common_graph(op, {&a, &b});
  auto backward = [mode, sign_b](const Tensor& gout, const std::vector<Tensor>& in,
                                 const Tensor&) -> std::vector<Tensor> {
    auto reduce_to = [&](const Tensor& target) -> Tensor {
      if (gout.shape() == target.shape()) return gout;
      if (is_scalar(target)) return reshape(sum(gout), target.shape());
      return sum_rows(gout);  // rowvec case
    };
    Tensor ga = reduce_to(in[0]);
    Tensor gb = reduce_to(in[1]);
    if (sign_b < 0) gb = neg(gb);
    return {ga, gb};
  };
  return finish(op, g, {a, b}, TensorData{big.shape(), std::move(out)}, std::move(backward));
}

template <typename F>
Tensor unary(const char* op, const Tensor& a, F&& f, BackwardFn bw) {
  std::vector<double> out(a.vec());
  for (double& v : out) v = f(v);
  auto g = common_graph(op, {&a});
  return finish(op, g, {a}, TensorData{a.shape(), std::move(out)}, std::move(bw));
}

// Internal inverse of slice_last: writes g into a zero tensor of the original
// last-axis extent, at the slice offset.
Tensor embed_last(const Tensor& g, int start, int total);

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_like("add", a, b, +1.0); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_like("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool sb = !same && is_scalar(b);
  const bool sa = !same && !sb && is_scalar(a);
  if (!same && !sb && !sa) shape_fail("mul", a, b);

  const Tensor& big = sa ? b : a;
  std::vector<double> out(big.vec());
  if (same) {
    const auto& bv = b.vec();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  } else {
    const double c = sa ? a.at(0) : b.at(0);
    for (double& v : out) v *= c;
  }

  auto g = common_graph("mul", {&a, &b});
  auto backward = [](const Tensor& gout, const std::vector<Tensor>& in,
                     const Tensor&) -> std::vector<Tensor> {
    auto side = [&](const Tensor& self, const Tensor& other) -> Tensor {
      Tensor raw = mul(gout, other);
      if (raw.shape() == self.shape()) return raw;
      return reshape(sum(raw), self.shape());  // self was the broadcast scalar
    };
    return {side(in[0], in[1]), side(in[1], in[0])};
  };
  return finish("mul", g, {a, b}, TensorData{big.shape(), std::move(out)}, std::move(backward));
}

Tensor add_scalar(const Tensor& a, double c) {
  return unary("add_scalar", a, [c](double v) { return v + c; },
               [](const Tensor& g, const std::vector<Tensor>&, const Tensor&) {
                 return std::vector<Tensor>{g};
               });
}

Tensor mul_scalar(const Tensor& a, double c) {
  return unary("mul_scalar", a, [c](double v) { return v * c; },
               [c](const Tensor& g, const std::vector<Tensor>&, const Tensor&) {
                 return std::vector<Tensor>{mul_scalar(g, c)};
               });
}

Tensor neg(const Tensor& a) { return mul_scalar(a, -1.0); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0]) {
    shape_fail("matmul", a, b);
  }
  const int n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  std::vector<double> out(static_cast<std::size_t>(n) * m);
  {
    MapMat ma(a.vec().data(), n, k);
    MapMat mb(b.vec().data(), k, m);
    MapMatMut mo(out.data(), n, m);
    mo.noalias() = ma * mb;
  }
  auto g = common_graph("matmul", {&a, &b});
  auto backward = [](const Tensor& gout, const std::vector<Tensor>& in,
                     const Tensor&) -> std::vector<Tensor> {
    Tensor ga = matmul(gout, transpose(in[1]));
    Tensor gb = matmul(transpose(in[0]), gout);
    return {ga, gb};
  };
  return finish("matmul", g, {a, b}, TensorData{{n, m}, std::move(out)}, std::move(backward));
}

Tensor transpose(const Tensor& a) {
  if (a.shape().size() != 2) {
    throw ShapeError("transpose: expected rank 2, got " + shape_str(a.shape()));
  }
  const int n = a.shape()[0], m = a.shape()[1];
  std::vector<double> out(static_cast<std::size_t>(n) * m);
  const auto& av = a.vec();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      out[static_cast<std::size_t>(j) * n + i] = av[static_cast<std::size_t>(i) * m + j];
  auto g = common_graph("transpose", {&a});
  auto backward = [](const Tensor& gout, const std::vector<Tensor>&,
                     const Tensor&) -> std::vector<Tensor> { return {transpose(gout)}; };
  return finish("transpose", g, {a}, TensorData{{m, n}, std::move(out)}, std::move(backward));
}

Tensor relu(const Tensor& a) {
  return unary("relu", a, [](double v) { return v > 0.0 ? v : 0.0; },
               [](const Tensor& g, const std::vector<Tensor>& in, const Tensor&) {
                 std::vector<double> mask(in[0].vec());
                 for (double& v : mask) v = v > 0.0 ? 1.0 : 0.0;
                 return std::vector<Tensor>{mul(g, Tensor(in[0].shape(), std::move(mask)))};
               });
}

Tensor abs(const Tensor& a) {
  return unary("abs", a, [](double v) { return std::fabs(v); },
               [](const Tensor& g, const std::vector<Tensor>& in, const Tensor&) {
                 std::vector<double> mask(in[0].vec());
                 for (double& v : mask) v = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
                 return std::vector<Tensor>{mul(g, Tensor(in[0].shape(), std::move(mask)))};
               });
}

Tensor sigmoid(const Tensor& a) {
  return unary("sigmoid", a,
               [](double v) {
                 // Branch keeps exp argument nonpositive for stability.
                 if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
                 const double e = std::exp(v);
                 return e / (1.0 + e);
               },
               [](const Tensor& g, const std::vector<Tensor>&, const Tensor& out) {
                 Tensor one_minus = add_scalar(neg(out), 1.0);
                 return std::vector<Tensor>{mul(g, mul(out, one_minus))};
               });
}

Tensor exp(const Tensor& a) {
  return unary("exp", a, [](double v) { return std::exp(v); },
               [](const Tensor& g, const std::vector<Tensor>&, const Tensor& out) {
                 return std::vector<Tensor>{mul(g, out)};
               });
}

Tensor log(const Tensor& a) {
  return unary("log", a, [](double v) { return std::log(v); },
               [](const Tensor& g, const std::vector<Tensor>& in, const Tensor&) {
                 return std::vector<Tensor>{mul(g, recip(in[0]))};
               });
}

Tensor recip(const Tensor& a) {
  return unary("recip", a, [](double v) { return 1.0 / v; },
               [](const Tensor& g, const std::vector<Tensor>&, const Tensor& out) {
                 return std::vector<Tensor>{neg(mul(g, mul(out, out)))};
               });
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.vec()) acc += v;
  auto g = common_graph("sum", {&a});
  auto backward = [](const Tensor& gout, const std::vector<Tensor>& in,
                     const Tensor&) -> std::vector<Tensor> {
    return {mul(Tensor::full(in[0].shape(), 1.0), gout)};
  };
  return finish("sum", g, {a}, TensorData{{1}, {acc}}, std::move(backward));
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ShapeError("mean: empty tensor");
  double acc = 0.0;
  for (double v : a.vec()) acc += v;
  const double inv_n = 1.0 / static_cast<double>(a.numel());
  auto g = common_graph("mean", {&a});
  auto backward = [inv_n](const Tensor& gout, const std::vector<Tensor>& in,
                          const Tensor&) -> std::vector<Tensor> {
    return {mul(Tensor::full(in[0].shape(), inv_n), gout)};
  };
  return finish("mean", g, {a}, TensorData{{1}, {acc * inv_n}}, std::move(backward));
}

Tensor sum_rows(const Tensor& a) {
  if (a.shape().size() != 2) {
    throw ShapeError("sum_rows: expected rank 2, got " + shape_str(a.shape()));
  }
  const int n = a.shape()[0], m = a.shape()[1];
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  const auto& av = a.vec();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out[j] += av[static_cast<std::size_t>(i) * m + j];
  auto g = common_graph("sum_rows", {&a});
  auto backward = [](const Tensor& gout, const std::vector<Tensor>& in,
                     const Tensor&) -> std::vector<Tensor> {
    return {add(Tensor::zeros(in[0].shape()), gout)};  // tile across rows
  };
  return finish("sum_rows", g, {a}, TensorData{{m}, std::move(out)}, std::move(backward));
}

Tensor max_rows(const Tensor& a) {
  if (a.shape().size() != 2 || a.shape()[0] < 1) {
    throw ShapeError("max_rows: expected nonempty rank-2 tensor, got " + shape_str(a.shape()));
  }
  const int n = a.shape()[0], m = a.shape()[1];
  const auto& av = a.vec();
  std::vector<double> out(static_cast<std::size_t>(m));
  std::vector<int> arg(static_cast<std::size_t>(m), 0);
  for (int j = 0; j < m; ++j) out[j] = av[j];
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double v = av[static_cast<std::size_t>(i) * m + j];
      if (v > out[j]) {
        out[j] = v;
        arg[j] = i;
      }
    }
  auto g = common_graph("max_rows", {&a});
  auto backward = [arg](const Tensor& gout, const std::vector<Tensor>& in,
                        const Tensor&) -> std::vector<Tensor> {
    const int n2 = in[0].shape()[0], m2 = in[0].shape()[1];
    std::vector<double> mask(static_cast<std::size_t>(n2) * m2, 0.0);
    for (int j = 0; j < m2; ++j) mask[static_cast<std::size_t>(arg[j]) * m2 + j] = 1.0;
    Tensor tiled = add(Tensor::zeros(in[0].shape()), gout);
    return {mul(tiled, Tensor(in[0].shape(), std::move(mask)))};
  };
  return finish("max_rows", g, {a}, TensorData{{m}, std::move(out)}, std::move(backward));
}

Tensor concat_last(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_last: no inputs");
  const auto rank = parts[0].shape().size();
  if (rank != 1 && rank != 2) {
    throw ShapeError("concat_last: expected rank 1 or 2, got " + shape_str(parts[0].shape()));
  }
  const int n = rank == 2 ? parts[0].shape()[0] : 1;
  int total = 0;
  std::vector<int> widths;
  for (const auto& p : parts) {
    if (p.shape().size() != rank || (rank == 2 && p.shape()[0] != n)) {
      shape_fail("concat_last", parts[0], p);
    }
    widths.push_back(p.shape()[rank - 1]);
    total += widths.back();
  }
  std::vector<double> out(static_cast<std::size_t>(n) * total);
  int off = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& pv = parts[p].vec();
    const int w = widths[p];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < w; ++j)
        out[static_cast<std::size_t>(i) * total + off + j] = pv[static_cast<std::size_t>(i) * w + j];
    off += w;
  }
  std::shared_ptr<Graph> g;
  for (const auto& p : parts) {
    if (p.on_graph()) {
      if (!g) g = p.graph();
      else if (g != p.graph()) throw Error("concat_last: operands belong to different graphs");
    }
  }
  Shape out_shape = rank == 2 ? Shape{n, total} : Shape{total};
  auto backward = [widths](const Tensor& gout, const std::vector<Tensor>&,
                           const Tensor&) -> std::vector<Tensor> {
    std::vector<Tensor> grads;
    int off2 = 0;
    for (int w : widths) {
      grads.push_back(slice_last(gout, off2, w));
      off2 += w;
    }
    return grads;
  };
  return finish("concat_last", g, parts, TensorData{std::move(out_shape), std::move(out)},
                std::move(backward));
}

Tensor slice_last(const Tensor& a, int start, int len) {
  const auto rank = a.shape().size();
  if (rank != 1 && rank != 2) {
    throw ShapeError("slice_last: expected rank 1 or 2, got " + shape_str(a.shape()));
  }
  const int n = rank == 2 ? a.shape()[0] : 1;
  const int m = a.shape()[rank - 1];
  if (start < 0 || len < 0 || start + len > m) {
    throw ShapeError("slice_last: range [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of " + shape_str(a.shape()));
  }
  std::vector<double> out(static_cast<std::size_t>(n) * len);
  const auto& av = a.vec();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < len; ++j)
      out[static_cast<std::size_t>(i) * len + j] = av[static_cast<std::size_t>(i) * m + start + j];
  auto g = common_graph("slice_last", {&a});
  Shape out_shape = rank == 2 ? Shape{n, len} : Shape{len};
  auto backward = [start](const Tensor& gout, const std::vector<Tensor>& in,
                          const Tensor&) -> std::vector<Tensor> {
    const int total = in[0].shape()[in[0].shape().size() - 1];
    return {embed_last(gout, start, total)};
  };
  return finish("slice_last", g, {a}, TensorData{std::move(out_shape), std::move(out)},
                std::move(backward));
}

namespace {

Tensor embed_last(const Tensor& a, int start, int total) {
  const auto rank = a.shape().size();
  const int n = rank == 2 ? a.shape()[0] : 1;
  const int len = a.shape()[rank - 1];
  std::vector<double> out(static_cast<std::size_t>(n) * total, 0.0);
  const auto& av = a.vec();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < len; ++j)
      out[static_cast<std::size_t>(i) * total + start + j] = av[static_cast<std::size_t>(i) * len + j];
  auto g = common_graph("embed_last", {&a});
  Shape out_shape = rank == 2 ? Shape{n, total} : Shape{total};
  auto backward = [start, len = a.shape()[rank - 1]](const Tensor& gout, const std::vector<Tensor>&,
                                                     const Tensor&) -> std::vector<Tensor> {
    return {slice_last(gout, start, len)};
  };
  return finish("embed_last", g, {a}, TensorData{std::move(out_shape), std::move(out)},
                std::move(backward));
}

}  // namespace

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel_of(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  }
  auto g = common_graph("reshape", {&a});
  auto backward = [](const Tensor& gout, const std::vector<Tensor>& in,
                     const Tensor&) -> std::vector<Tensor> {
    return {reshape(gout, in[0].shape())};
  };
  std::vector<double> out(a.vec());
  return finish("reshape", g, {a}, TensorData{std::move(shape), std::move(out)},
                std::move(backward));
}

Tensor stop_gradient(const Tensor& a) {
  auto g = common_graph("stop_gradient", {&a});
  if (!g) return a.detached();
  auto backward = [](const Tensor&, const std::vector<Tensor>&,
                     const Tensor&) -> std::vector<Tensor> { return {Tensor()}; };
  std::vector<double> out(a.vec());
  return finish("stop_gradient", g, {a}, TensorData{a.shape(), std::move(out)},
                std::move(backward));
}

}  // namespace metasdf::ad
