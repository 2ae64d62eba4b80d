#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metasdf/common/error.hpp"

namespace metasdf::ad {

using Shape = std::vector<int>;

std::int64_t numel_of(const Shape& s);
std::string shape_str(const Shape& s);

struct TensorData {
  Shape shape;
  std::vector<double> values;
};

class Graph;

// Dense f64 tensor. Optionally carries a (graph, node) provenance handle;
// tensors without one are constants and contribute zero gradient.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double v);

  bool defined() const { return data_ != nullptr; }
  const Shape& shape() const { return data_->shape; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_->values.size()); }
  std::span<const double> values() const { return data_->values; }
  const std::vector<double>& vec() const { return data_->values; }

  // Value of a 1-element tensor.
  double item() const;
  double at(std::int64_t i) const { return data_->values[static_cast<std::size_t>(i)]; }

  bool on_graph() const { return graph_ != nullptr; }
  const std::shared_ptr<Graph>& graph() const { return graph_; }
  int node() const { return node_; }

  // Same values, no graph handle.
  Tensor detached() const;

  bool all_finite() const;

 private:
  friend class Graph;
  Tensor(std::shared_ptr<TensorData> data, std::shared_ptr<Graph> graph, int node)
      : data_(std::move(data)), graph_(std::move(graph)), node_(node) {}

  std::shared_ptr<TensorData> data_;
  std::shared_ptr<Graph> graph_;
  int node_ = -1;
};

}  // namespace metasdf::ad
