#pragma once

#include <vector>

#include "metasdf/autodiff/graph.hpp"
#include "metasdf/autodiff/tensor.hpp"

namespace metasdf::ad {

// Elementwise binary ops accept equal shapes or a 1-element operand
// (broadcast). add/sub additionally broadcast a length-m vector across the
// rows of an (n, m) matrix. Results land on a graph iff any input does.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor add_scalar(const Tensor& a, double c);
Tensor mul_scalar(const Tensor& a, double c);
Tensor neg(const Tensor& a);

// 2D matrix product: (n, k) x (k, m) -> (n, m).
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor relu(const Tensor& a);     // backward uses subgradient 0 at exactly 0
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor abs(const Tensor& a);      // backward uses sign, 0 at exactly 0
Tensor recip(const Tensor& a);

Tensor sum(const Tensor& a);   // -> {1}
Tensor mean(const Tensor& a);  // -> {1}
// Sum over the leading axis of an (n, m) matrix -> {m}.
Tensor sum_rows(const Tensor& a);
// Max over the leading axis of an (n, m) matrix -> {m}; ties go to the
// earliest row.
Tensor max_rows(const Tensor& a);

Tensor concat_last(const std::vector<Tensor>& parts);
Tensor slice_last(const Tensor& a, int start, int len);
Tensor reshape(const Tensor& a, Shape shape);

// Identity with a severed gradient path.
Tensor stop_gradient(const Tensor& a);

}  // namespace metasdf::ad
