#include "metasdf/autodiff/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace metasdf::ad {

std::int64_t numel_of(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ',';
    os << s[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> values) {
  if (numel_of(shape) != static_cast<std::int64_t>(values.size())) {
    throw ShapeError("tensor: shape " + shape_str(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  }
  data_ = std::make_shared<TensorData>(TensorData{std::move(shape), std::move(values)});
}

Tensor Tensor::zeros(Shape shape) {
  auto n = numel_of(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

Tensor Tensor::full(Shape shape, double v) {
  auto n = numel_of(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), v));
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item: tensor of shape " + shape_str(shape()) + " is not scalar");
  }
  return data_->values[0];
}

Tensor Tensor::detached() const {
  Tensor t;
  t.data_ = data_;
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data_->values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace metasdf::ad
