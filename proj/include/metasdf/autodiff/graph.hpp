#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "metasdf/autodiff/tensor.hpp"

namespace metasdf::ad {

// Backward closure of one node: given the adjoint of the output plus the
// node's inputs and output (wrapped on-graph when a higher-order gradient is
// requested, detached otherwise), returns the gradient w.r.t. each input.
using BackwardFn = std::function<std::vector<Tensor>(
    const Tensor& grad_out, const std::vector<Tensor>& inputs, const Tensor& output)>;

struct GradOptions {
  bool create_graph = false;  // record backward ops so grads are differentiable
};

struct GradResult {
  std::vector<Tensor> grads;
  // False where a requested tensor was unreachable from the loss; the
  // corresponding grad is a zero tensor.
  std::vector<bool> reached;
};

// Dynamic tape. Nodes are appended in execution order, which is therefore a
// topological order; every edge points from a lower node id to a higher one.
// One graph per adaptation; drop the graph to free all recorded state.
class Graph : public std::enable_shared_from_this<Graph> {
 public:
  static std::shared_ptr<Graph> create();

  // Registers values as a leaf node (a differentiable input).
  Tensor leaf(const Tensor& constant);

  // Appends an interior node. Inputs may be graph tensors (of this graph) or
  // constants; constants are stored by value and receive no gradient.
  Tensor emit(const char* op, const std::vector<Tensor>& inputs, TensorData out,
              BackwardFn backward);

  std::size_t size() const { return nodes_.size(); }
  std::uint64_t generation() const { return generation_; }

  // Reverse-mode sweep from a scalar loss. Visits each reachable node once,
  // in reverse insertion order; adjoints are freed as soon as consumed.
  GradResult backward(const Tensor& loss, std::span<const Tensor> wrt, GradOptions opt = {});

 private:
  struct Node {
    const char* op;
    std::vector<int> input_ids;  // -1 marks a constant input
    std::vector<std::shared_ptr<TensorData>> input_data;
    std::shared_ptr<TensorData> out;
    BackwardFn backward;  // empty for leaves
  };

  Tensor wrap(int id) { return Tensor(nodes_[id].out, shared_from_this(), id); }

  std::vector<Node> nodes_;
  std::uint64_t generation_ = 0;
};

// Convenience wrapper over loss.graph()->backward.
GradResult grad(const Tensor& loss, std::span<const Tensor> wrt, GradOptions opt = {});

}  // namespace metasdf::ad
