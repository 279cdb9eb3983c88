#pragma once

#include <functional>

#include "sphembed/tensor.hpp"

namespace sphembed {

struct GradCheckReport {
    bool pass = false;
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/// Central-difference check of an analytic gradient against
/// (f(x+h e_i) - f(x-h e_i)) / 2h, per coordinate.
/// Relative error uses denominator max(1, |a|, |n|).
GradCheckReport
finite_difference_check(const std::function<double(const Tensor &)> &f,
                        const Tensor &point, const Tensor &analytic_grad,
                        double step, double tolerance);

} // namespace sphembed
