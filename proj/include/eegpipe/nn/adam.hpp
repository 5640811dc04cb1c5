// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "eegpipe/nn/model.hpp"

namespace eegpipe::nn {

struct AdamState {
    ModelParams m, v;  // first and second moments, zero-initialized
    explicit AdamState(const ModelParams& like) : m(zeros_like(like)), v(zeros_like(like)) {}
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// In-place bias-corrected Adam update at step t (1-based).
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, long t,
               double learning_rate, const AdamConfig& cfg = {});

// Scales gradients so their global L2 norm is at most max_norm; returns the
// pre-clip norm. max_norm <= 0 disables clipping.
double clip_global_norm(ModelParams& grads, double max_norm);

}  // namespace eegpipe::nn
