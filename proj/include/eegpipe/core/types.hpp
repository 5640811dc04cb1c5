// SPDX-License-Identifier: Apache-2.0
//
// Domain types for multi-channel EEG recordings.
//
// Conventions used throughout: sample matrices are (channels x time),
// amplitudes in microvolts, sampling rates in Hz.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "eegpipe/common/errors.hpp"

namespace eegpipe::core {

struct ChannelLabel {
    std::string name;  // 10-20 extended nomenclature, e.g. "FP1"
    int index = 0;     // zero-based position in the recording

    bool operator==(const ChannelLabel&) const = default;
};

struct EventMarker {
    long sample_index = 0;
    std::string label;
};

struct Recording {
    Eigen::MatrixXd samples;  // channels x time
    double rate = 0.0;        // Hz
    std::vector<ChannelLabel> labels;
    std::vector<EventMarker> markers;

    long channels() const { return samples.rows(); }
    long length() const { return samples.cols(); }
    double duration_s() const { return rate > 0 ? length() / rate : 0.0; }

    // Throws InvalidConfig if any type invariant is violated.
    void validate() const;
};

struct SegmentOrigin {
    std::string recording_id;
    long start_sample = 0;
};

struct Segment {
    Eigen::MatrixXd samples;  // channels x window length
    double rate = 0.0;
    std::optional<int> class_label;
    SegmentOrigin origin;

    long channels() const { return samples.rows(); }
    long length() const { return samples.cols(); }
};

enum class FilterKind { LowPass, BandPass };

struct FilterSpec {
    FilterKind kind = FilterKind::BandPass;
    double low_hz = 0.0;   // lower cutoff (band-pass) or the single cutoff (low-pass, stored in high_hz)
    double high_hz = 0.0;  // upper cutoff
    int order = 4;         // positive even; band-pass realizes 2*order poles

    static FilterSpec low_pass(double cutoff_hz, int order = 4) {
        return FilterSpec{FilterKind::LowPass, 0.0, cutoff_hz, order};
    }
    static FilterSpec band_pass(double low_hz, double high_hz, int order = 4) {
        return FilterSpec{FilterKind::BandPass, low_hz, high_hz, order};
    }

    // Throws InvalidCutoff unless the spec is valid against `rate`.
    void validate(double rate) const;
};

inline void FilterSpec::validate(double rate) const {
    if (order <= 0 || order % 2 != 0)
        throw InvalidCutoff("filter order must be a positive even integer, got " +
                            std::to_string(order));
    const double nyquist = rate / 2.0;
    if (kind == FilterKind::LowPass) {
        if (!(high_hz > 0.0 && high_hz < nyquist))
            throw InvalidCutoff("low-pass cutoff " + std::to_string(high_hz) +
                                " Hz outside (0, " + std::to_string(nyquist) + ")");
    } else {
        if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist))
            throw InvalidCutoff("band-pass cutoffs (" + std::to_string(low_hz) + ", " +
                                std::to_string(high_hz) + ") must satisfy 0 < low < high < " +
                                std::to_string(nyquist));
    }
}

inline void Recording::validate() const {
    if (!(rate > 0.0)) throw InvalidConfig("recording rate must be positive");
    if (samples.rows() != static_cast<long>(labels.size()))
        throw InvalidConfig("recording has " + std::to_string(samples.rows()) +
                            " sample rows but " + std::to_string(labels.size()) + " labels");
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            if (labels[i].name == labels[j].name)
                throw InvalidConfig("duplicate channel label " + labels[i].name);
    for (const auto& m : markers)
        if (m.sample_index < 0 || m.sample_index >= length())
            throw InvalidConfig("marker at sample " + std::to_string(m.sample_index) +
                                " outside recording of length " + std::to_string(length()));
}

inline std::vector<ChannelLabel> default_labels(int n) {
    std::vector<ChannelLabel> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back({"CH" + std::to_string(i + 1), i});
    return out;
}

}  // namespace eegpipe::core
