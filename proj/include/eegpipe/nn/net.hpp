// SPDX-License-Identifier: Apache-2.0
//
// Forward pass, attention pooling, classifier head, and backpropagation
// through time. The loss is categorical cross-entropy with mean reduction
// over the batch.

#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "eegpipe/nn/model.hpp"

namespace eegpipe::nn {

struct Sample {
    Eigen::MatrixXd x;  // time steps x input dim
    int label = 0;
};

// One cell step. Honors the cell's forget-gate form (standard or
// attention-gated). Throws DimensionMismatch on shape disagreement.
std::pair<Eigen::VectorXd, Eigen::VectorXd> lstm_cell_forward(const LstmCellParams& cell,
                                                              const Eigen::VectorXd& x_t,
                                                              const Eigen::VectorXd& h_prev,
                                                              const Eigen::VectorXd& c_prev);

// All hidden states of one direction; row t is h_t. sequence is T x D.
Eigen::MatrixXd lstm_forward(const LstmCellParams& cell, const Eigen::MatrixXd& sequence);

// Row t is [fwd h_t ; bwd h_t] where the backward pass runs T..1.
Eigen::MatrixXd bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                               const Eigen::MatrixXd& sequence);

struct PoolResult {
    Eigen::VectorXd context;  // pooled input dim
    Eigen::VectorXd weights;  // T, sums to 1
};

// e_t = u' tanh(W_a h_t + b_a); weights = softmax(e); context = sum w_t h_t.
PoolResult attention_pool(const AttentionPoolParams& pool, const Eigen::MatrixXd& hiddens);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// dense1 -> ReLU -> dropout -> dense2 -> ReLU -> dropout -> output -> softmax.
// Dropout is inverted (train-time scaling by 1/(1-rate)); eval mode is the
// identity regardless of rate.
Eigen::VectorXd head_forward(const ModelParams& model, const Eigen::VectorXd& context,
                             bool train_mode, double dropout_rate, std::mt19937_64& rng);

// Full-model probabilities for one sample, eval mode.
Eigen::VectorXd predict_probabilities(const ModelParams& model, const Eigen::MatrixXd& sequence);

struct GradOptions {
    double dropout_rate = 0.0;
    bool train_mode = true;
    std::uint64_t dropout_seed = 0;  // masks derive from (seed, sample index)
    int threads = 1;
};

struct GradResult {
    double loss = 0.0;
    ModelParams grads;
};

// Mean cross-entropy over the batch and gradients for every active tensor.
// Deterministic for fixed options; with threads > 1 the per-chunk partial
// sums are reduced in chunk order.
GradResult compute_gradients(const ModelParams& model, const std::vector<Sample>& batch,
                             const GradOptions& opts);

// Forward-only loss with the identical dropout-mask derivation, so a finite
// difference around it is consistent with compute_gradients.
double compute_loss(const ModelParams& model, const std::vector<Sample>& batch,
                    const GradOptions& opts);

}  // namespace eegpipe::nn
