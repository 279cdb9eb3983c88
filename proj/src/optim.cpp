#include "sphembed/optim.hpp"

#include <cmath>

namespace sphembed {

Adam::Adam(AdamConfig config) : config_(config) {}

void Adam::step(const std::vector<Param *> &params, double lr) {
    if (m_.empty()) {
        for (const Param *p : params) {
            m_.push_back(Tensor::zeros(p->value.shape()));
            v_.push_back(Tensor::zeros(p->value.shape()));
        }
    } else if (m_.size() != params.size()) {
        throw contract_error("adam: parameter list changed between steps");
    }
    ++t_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));

    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Param &p = *params[pi];
        Tensor &m = m_[pi];
        Tensor &v = v_[pi];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            double g = p.grad[i];
            if (!std::isfinite(g))
                throw numeric_error("non-finite gradient in parameter '" +
                                    p.name + "'");
            if (config_.weight_decay > 0.0)
                g += config_.weight_decay * p.value[i];
            if (config_.grad_clip > 0.0) {
                if (g > config_.grad_clip)
                    g = config_.grad_clip;
                else if (g < -config_.grad_clip)
                    g = -config_.grad_clip;
            }
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
        }
    }
}

double learning_rate_at(const LrSchedule &schedule, int epoch) {
    if (epoch < 0)
        throw contract_error("epoch must be non-negative");
    if (epoch < schedule.breakpoint1)
        return schedule.rate1;
    if (epoch < schedule.breakpoint2)
        return schedule.rate2;
    return schedule.rate3;
}

LrSchedule scaled_schedule(int epochs, int reference_epochs) {
    LrSchedule s;
    if (epochs == reference_epochs || epochs <= 0)
        return s;
    const double ratio =
        static_cast<double>(epochs) / static_cast<double>(reference_epochs);
    s.breakpoint1 = static_cast<int>(s.breakpoint1 * ratio);
    s.breakpoint2 = static_cast<int>(s.breakpoint2 * ratio);
    return s;
}

} // namespace sphembed
