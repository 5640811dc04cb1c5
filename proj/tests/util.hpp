// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the test suites.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "eegpipe/core/types.hpp"

namespace testutil {

inline Eigen::VectorXd sine(double freq_hz, double rate, long n, double amplitude = 1.0) {
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i)
        v[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * i / rate);
    return v;
}

inline Eigen::VectorXd gaussian_noise(long n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sd);
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

inline eegpipe::core::Recording single_channel(const Eigen::VectorXd& x, double rate) {
    eegpipe::core::Recording rec;
    rec.rate = rate;
    rec.labels = eegpipe::core::default_labels(1);
    rec.samples = x.transpose();
    return rec;
}

inline eegpipe::core::Recording from_matrix(const Eigen::MatrixXd& samples, double rate) {
    eegpipe::core::Recording rec;
    rec.rate = rate;
    rec.labels = eegpipe::core::default_labels(static_cast<int>(samples.rows()));
    rec.samples = samples;
    return rec;
}

// Largest magnitude over the middle half of the signal, away from filter
// edge transients.
inline double central_max_abs(const Eigen::VectorXd& x) {
    const long n = x.size();
    return x.segment(n / 4, n / 2).cwiseAbs().maxCoeff();
}

}  // namespace testutil
