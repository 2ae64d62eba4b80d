#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "metasdf/autodiff/graph.hpp"
#include "metasdf/autodiff/ops.hpp"

namespace metasdf::ad {

// Scalar objective built from ops. Receives x either as a graph leaf (for the
// analytic gradient) or as a constant (for finite-difference evaluations);
// must be deterministic and must not capture graph state between calls.
// Objectives that differentiate internally (unrolled adaptation loops) must
// lift a constant x onto a private graph of their own.
using Objective = std::function<Tensor(const Tensor& x)>;

struct GradCheck {
  double max_rel_error = 0.0;
  std::int64_t worst_index = -1;
  int kink_count = 0;  // coordinates excluded because f is non-smooth there
};

// Central-difference check of the reverse-mode gradient of f at x0.
// Relative error uses an absolute floor of 1e-8 in the denominator.
// Coordinates where the one-sided slopes disagree (a relu/abs kink inside
// [x-h, x+h]) are flagged and excluded from the max.
GradCheck check_gradient(const Objective& f, std::span<const double> x0, double h);

}  // namespace metasdf::ad
