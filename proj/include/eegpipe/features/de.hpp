// SPDX-License-Identifier: Apache-2.0
//
// Differential-entropy band features. An EEG segment is treated as
// Gaussian within each band, so its differential entropy reduces to the
// closed form 0.5*ln(2*pi*e*var), in nats.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "eegpipe/core/types.hpp"
#include "eegpipe/features/bands.hpp"

namespace eegpipe::features {

// Variance below this is treated as a dead signal: ln(var) would diverge.
inline constexpr double kVarianceFloor = 1e-12;

// Unbiased sample variance; length >= 2 required.
double sample_variance(std::span<const double> samples);

// 0.5*ln(2*pi*e*var) of the unbiased sample variance, in nats.
// Throws DegenerateSignal when the variance is at or below the floor.
double differential_entropy(std::span<const double> samples);
double differential_entropy_from_variance(double variance);

// Per-band zero-phase filtering of one segment with the shared Butterworth
// stack. A band's upper edge is clipped to 0.45*rate before validation.
std::vector<core::Segment> band_decompose(const core::Segment& seg,
                                          const std::vector<BandDefinition>& bands,
                                          int filter_order = 4);

// DE values over (time step x channel x band), time-major.
struct FeatureSequence {
    std::vector<double> values;  // flat, index = (t*channels + c)*bands + b
    long steps = 0;
    long channels = 0;
    long bands = 0;
    double rate = 0.0;  // steps per second
    std::optional<int> class_label;

    double& at(long t, long c, long b) { return values[(t * channels + c) * bands + b]; }
    double at(long t, long c, long b) const { return values[(t * channels + c) * bands + b]; }

    // One time step flattened to a (channels*bands) row, channel-major.
    Eigen::VectorXd step_vector(long t) const;
    Eigen::MatrixXd as_matrix() const;  // steps x (channels*bands)
};

// values[t, c, b] = DE of band b of channel c of segments[t]. All segments
// must share shape and rate. DegenerateSignal errors are rethrown with the
// (segment, channel, band) coordinates attached.
FeatureSequence extract_de_features(const std::vector<core::Segment>& segments,
                                    const std::vector<BandDefinition>& bands,
                                    int filter_order = 4, int threads = 1);

// Splits a sequence along time into disjoint runs of seq_len steps; the
// trailing partial run is discarded. Labels are inherited.
std::vector<FeatureSequence> slice_sequences(const FeatureSequence& fs, long seq_len);

}  // namespace eegpipe::features
