// SPDX-License-Identifier: Apache-2.0
//
// Seeded training with an internal stratified 80/20 split, best-validation
// model selection, and the usual classification metrics.

#pragma once

#include <cstdint>
#include <vector>

#include "eegpipe/features/de.hpp"
#include "eegpipe/nn/net.hpp"

namespace eegpipe::nn {

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 64;
    int epochs = 100;
    double dropout_rate = 0.5;
    std::uint64_t seed = 0;
    double split = 0.8;        // train fraction
    int hidden_size = 128;
    double clip_norm = 5.0;    // <= 0 disables gradient clipping
    int threads = 1;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct Metrics {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    Eigen::MatrixXd confusion;  // rows: true class, cols: predicted
    std::vector<EpochStats> history;
};

struct TrainResult {
    ModelParams model;  // best validation accuracy; ties by lower loss, then earlier epoch
    Metrics metrics;    // computed on the validation split with the best model
    int best_epoch = 0;
};

// Samples with valid labels; at least 2 classes and 2 samples per class.
TrainResult train(const std::vector<Sample>& dataset, Arch arch, const TrainConfig& cfg);

// Convenience overload over feature sequences (labels must be present).
TrainResult train(const std::vector<features::FeatureSequence>& dataset, Arch arch,
                  const TrainConfig& cfg);

Metrics evaluate(const ModelParams& model, const std::vector<Sample>& dataset);

struct SplitIndices {
    std::vector<std::size_t> train, val;
};

// The seeded stratified split used by train(): per class, a shuffled
// split_fraction share goes to training (clamped so both sides keep at
// least one sample). `seed` is the TrainConfig seed, so a stored training
// seed reproduces the exact validation set.
SplitIndices stratified_split(const std::vector<int>& labels, double split_fraction,
                              std::uint64_t seed);

Sample to_sample(const features::FeatureSequence& fs);
std::vector<Sample> to_samples(const std::vector<features::FeatureSequence>& dataset);

// Metrics from a prebuilt confusion matrix; classes with zero predicted
// support contribute zero precision.
Metrics metrics_from_confusion(const Eigen::MatrixXd& confusion);

}  // namespace eegpipe::nn
