#include "sphembed/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace sphembed {

GradCheckReport
finite_difference_check(const std::function<double(const Tensor &)> &f,
                        const Tensor &point, const Tensor &analytic_grad,
                        double step, double tolerance) {
    if (!(step > 0.0) || step > 1e-2)
        throw contract_error("finite-difference step must be in (0, 1e-2]");
    if (!(tolerance > 0.0))
        throw contract_error("tolerance must be positive");
    if (!point.same_shape(analytic_grad))
        throw contract_error("analytic gradient shape " +
                             shape_str(analytic_grad.shape()) +
                             " does not match point shape " +
                             shape_str(point.shape()));

    Tensor x = point;
    GradCheckReport report;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + step;
        const double fp = f(x);
        x[i] = saved - step;
        const double fm = f(x);
        x[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw numeric_error("non-finite function value at coordinate " +
                                std::to_string(i));
        const double numeric = (fp - fm) / (2.0 * step);
        const double analytic = analytic_grad[i];
        const double denom =
            std::max({1.0, std::abs(analytic), std::abs(numeric)});
        const double rel = std::abs(analytic - numeric) / denom;
        if (rel > report.max_rel_err) {
            report.max_rel_err = rel;
            report.worst_index = i;
            report.worst_analytic = analytic;
            report.worst_numeric = numeric;
        }
    }
    report.pass = report.max_rel_err <= tolerance;
    return report;
}

} // namespace sphembed
