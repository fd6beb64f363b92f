#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ign/autodiff/tape.hpp"

namespace ign::ad {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Moments are stored per parameter, in the order of the parameter list the
// state was created for.
struct AdamState {
    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<Array> first;
    std::vector<Array> second;
};

AdamState make_adam_state(const AdamConfig& config, std::span<Parameter* const> params);

// One bias-corrected Adam update. Parameters missing from `grads` see a zero
// gradient; non-trainable parameters are left untouched. A non-finite gradient
// rejects the whole update (NumericalError naming the parameter).
void adam_step(AdamState& state, std::span<Parameter* const> params, const Gradients& grads);

// Rescales the gradients of `params` in place so their global L2 norm is at
// most max_norm. Returns the norm before clipping. max_norm <= 0 disables
// clipping. Summation follows the parameter order, so results are reproducible.
double clip_global_norm(Gradients& grads, std::span<Parameter* const> params, double max_norm);

}  // namespace ign::ad
