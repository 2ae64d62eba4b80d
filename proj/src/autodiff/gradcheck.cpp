#include "metasdf/autodiff/gradcheck.hpp"

#include <cmath>
#include <vector>

namespace metasdf::ad {

namespace {

double eval_constant(const Objective& f, const std::vector<double>& x) {
  Tensor t(Shape{static_cast<int>(x.size())}, x);
  const double v = f(t).item();
  if (!std::isfinite(v)) throw NumericError("check_gradient: objective is not finite");
  return v;
}

}  // namespace

GradCheck check_gradient(const Objective& f, std::span<const double> x0, double h) {
  if (h <= 0.0) throw NumericError("check_gradient: step must be positive");
  std::vector<double> x(x0.begin(), x0.end());
  const auto n = static_cast<std::int64_t>(x.size());

  auto graph = Graph::create();
  Tensor leaf = graph->leaf(Tensor(Shape{static_cast<int>(n)}, x));
  Tensor loss = f(leaf);
  if (!std::isfinite(loss.item())) {
    throw NumericError("check_gradient: objective is not finite");
  }
  const Tensor wrt[] = {leaf};
  const auto analytic = grad(loss, wrt).grads[0];

  const double f0 = eval_constant(f, x);
  GradCheck result;
  for (std::int64_t i = 0; i < n; ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = eval_constant(f, x);
    x[i] = xi - h;
    const double fm = eval_constant(f, x);
    x[i] = xi;

    const double fwd = (fp - f0) / h;
    const double bwd = (f0 - fm) / h;
    if (std::fabs(fwd - bwd) > 0.1 * std::max({std::fabs(fwd), std::fabs(bwd), 1e-8}) &&
        std::fabs(fwd - bwd) > 1e-6) {
      ++result.kink_count;
      continue;
    }

    const double central = (fp - fm) / (2.0 * h);
    const double gi = analytic.at(i);
    const double rel =
        std::fabs(central - gi) / std::max(1e-8, std::fabs(central) + std::fabs(gi));
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace metasdf::ad
