#include "metasdf/autodiff/graph.hpp"

#include <optional>

#include "metasdf/autodiff/ops.hpp"

namespace metasdf::ad {

std::shared_ptr<Graph> Graph::create() { return std::shared_ptr<Graph>(new Graph()); }

Tensor Graph::leaf(const Tensor& constant) {
  Node n;
  n.op = "leaf";
  n.out = constant.data_;
  nodes_.push_back(std::move(n));
  ++generation_;
  return wrap(static_cast<int>(nodes_.size()) - 1);
}

Tensor Graph::emit(const char* op, const std::vector<Tensor>& inputs, TensorData out,
                   BackwardFn backward) {
  Node n;
  n.op = op;
  n.input_ids.reserve(inputs.size());
  n.input_data.reserve(inputs.size());
  for (const auto& in : inputs) {
    if (in.on_graph()) {
      if (in.graph().get() != this) {
        throw Error(std::string(op) + ": inputs belong to different graphs");
      }
      n.input_ids.push_back(in.node());
    } else {
      n.input_ids.push_back(-1);
    }
    n.input_data.push_back(in.data_);  // tensors are immutable once built
  }
  n.out = std::make_shared<TensorData>(std::move(out));
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  ++generation_;
  return wrap(static_cast<int>(nodes_.size()) - 1);
}

GradResult Graph::backward(const Tensor& loss, std::span<const Tensor> wrt, GradOptions opt) {
  if (!loss.on_graph() || loss.graph().get() != this) {
    throw Error("grad: loss is not on this graph");
  }
  if (loss.numel() != 1) {
    throw ShapeError("grad: loss has shape " + shape_str(loss.shape()) + ", expected a scalar");
  }

  const int loss_id = loss.node();
  // Adjoints of requested tensors must survive the sweep; all others are
  // dropped as soon as their node is processed.
  std::vector<bool> keep(static_cast<std::size_t>(loss_id) + 1, false);
  for (const auto& t : wrt) {
    if (t.on_graph()) {
      if (t.graph().get() != this) throw Error("grad: wrt tensor is not on this graph");
      if (t.node() <= loss_id) keep[t.node()] = true;
    }
  }

  std::vector<std::optional<Tensor>> adjoint(static_cast<std::size_t>(loss_id) + 1);
  adjoint[loss_id] = Tensor::scalar(1.0);

  for (int id = loss_id; id >= 0; --id) {
    if (!adjoint[id].has_value()) continue;
    if (!nodes_[id].backward || nodes_[id].input_ids.empty()) continue;  // leaf

    Tensor g = keep[id] ? *adjoint[id] : std::move(*adjoint[id]);
    if (!keep[id]) adjoint[id].reset();
    if (!opt.create_graph) g = g.detached();

    // Snapshot ids: the backward closure may append to nodes_.
    const std::vector<int> input_ids = nodes_[id].input_ids;
    std::vector<Tensor> inputs;
    inputs.reserve(input_ids.size());
    for (std::size_t i = 0; i < input_ids.size(); ++i) {
      const int in_id = input_ids[i];
      if (opt.create_graph && in_id >= 0) {
        inputs.push_back(wrap(in_id));
      } else {
        inputs.push_back(Tensor(nodes_[id].input_data[i], nullptr, -1));
      }
    }
    Tensor output = opt.create_graph ? wrap(id) : Tensor(nodes_[id].out, nullptr, -1);

    std::vector<Tensor> input_grads = nodes_[id].backward(g, inputs, output);
    for (std::size_t i = 0; i < input_ids.size(); ++i) {
      const int in_id = input_ids[i];
      if (in_id < 0 || !input_grads[i].defined()) continue;
      if (adjoint[in_id].has_value()) {
        adjoint[in_id] = add(*adjoint[in_id], input_grads[i]);
      } else {
        adjoint[in_id] = input_grads[i];
      }
    }
  }

  GradResult result;
  result.grads.reserve(wrt.size());
  result.reached.reserve(wrt.size());
  for (const auto& t : wrt) {
    const int id = t.on_graph() ? t.node() : -1;
    if (id >= 0 && id <= loss_id && adjoint[id].has_value()) {
      Tensor g = *adjoint[id];
      result.grads.push_back(opt.create_graph ? g : g.detached());
      result.reached.push_back(true);
    } else {
      result.grads.push_back(Tensor::zeros(t.shape()));
      result.reached.push_back(false);
    }
  }
  return result;
}

GradResult grad(const Tensor& loss, std::span<const Tensor> wrt, GradOptions opt) {
  if (!loss.on_graph()) throw Error("grad: loss is a constant (no graph)");
  return loss.graph()->backward(loss, wrt, opt);
}

}  // namespace metasdf::ad
