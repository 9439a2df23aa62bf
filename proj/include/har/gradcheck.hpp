#pragma once

#include <functional>
#include <vector>

namespace har {

using LossFn = std::function<double(const std::vector<double>&)>;

// Central difference (f(p + eps*e_i) - f(p - eps*e_i)) / (2*eps) per
// coordinate. Throws NumericError naming the coordinate if the loss is
// non-finite at a perturbed point.
std::vector<double> finite_diff_grad(const LossFn& loss_fn,
                                     const std::vector<double>& params,
                                     double eps);

}  // namespace har
