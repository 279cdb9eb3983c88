#pragma once

#include <vector>

#include "sphembed/layers.hpp"
#include "sphembed/tensor.hpp"

namespace sphembed {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0; // off by default
    double grad_clip = 0.0;    // 0 disables clipping
};

/// Adam with bias correction. Moment slots are created lazily per
/// parameter, keyed by registration order, so the same optimizer must
/// always be stepped with the same parameter list.
class Adam {
  public:
    explicit Adam(AdamConfig config = {});

    void step(const std::vector<Param *> &params, double lr);

    long step_count() const { return t_; }
    const AdamConfig &config() const { return config_; }

  private:
    AdamConfig config_;
    long t_ = 0;
    std::vector<Tensor> m_, v_;
};

/// Piecewise-constant learning-rate schedule.
struct LrSchedule {
    int breakpoint1 = 125;
    int breakpoint2 = 175;
    double rate1 = 1e-4;
    double rate2 = 1e-5;
    double rate3 = 1e-6;
};

double learning_rate_at(const LrSchedule &schedule, int epoch);

/// Proportionally rescaled breakpoints for runs shorter or longer than
/// the reference 275-epoch recipe.
LrSchedule scaled_schedule(int epochs, int reference_epochs = 275);

} // namespace sphembed
