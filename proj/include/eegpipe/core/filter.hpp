// SPDX-License-Identifier: Apache-2.0
//
// Butterworth filter design (bilinear transform, cascaded biquads) and
// zero-phase application.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "eegpipe/core/types.hpp"

namespace eegpipe::core {

// One second-order recursive section, direct form II transposed.
// y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

struct SosFilter {
    std::vector<Biquad> sections;
    double rate = 0.0;

    int pole_count() const { return static_cast<int>(sections.size()) * 2; }

    // Complex magnitude of the cascade at frequency f (single pass).
    double magnitude_at(double f_hz) const;
};

// Designs a Butterworth cascade for `spec` at sampling rate `rate`.
// `spec.order` follows the usual design-tool convention: a low-pass of
// order N has N poles; a band-pass of order N has 2N poles (N per skirt).
// Pass-band gain is normalized to 1 at DC (low-pass) or at the geometric
// center of the band (band-pass). Throws InvalidCutoff on a bad spec.
SosFilter design_butterworth(const FilterSpec& spec, double rate);

// Single forward pass over one channel, zero initial state.
Eigen::VectorXd sos_filter_forward(const SosFilter& f, const Eigen::VectorXd& x);

// Zero-phase filtering: odd-reflection pad by 3x the realized filter order
// on both ends, run the cascade forward then backward, drop the padding.
// Operates row-wise on (channels x time) matrices.
Eigen::VectorXd filtfilt(const SosFilter& f, const Eigen::VectorXd& x);
Eigen::MatrixXd filtfilt(const SosFilter& f, const Eigen::MatrixXd& x);

}  // namespace eegpipe::core
