#include "har/gradcheck.hpp"

#include <cmath>
#include <string>

#include "har/errors.hpp"

namespace har {

std::vector<double> finite_diff_grad(const LossFn& loss_fn,
                                     const std::vector<double>& params,
                                     double eps) {
    if (!(eps > 0.0))
        throw ConfigError("finite_diff_grad: eps must be > 0");
    std::vector<double> p = params;
    std::vector<double> grad(params.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + eps;
        const double up = loss_fn(p);
        p[i] = saved - eps;
        const double down = loss_fn(p);
        p[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down))
            throw NumericError("finite_diff_grad: non-finite loss at coordinate " +
                               std::to_string(i));
        grad[i] = (up - down) / (2.0 * eps);
    }
    return grad;
}

}  // namespace har
