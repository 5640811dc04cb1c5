// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/features/de.hpp"

#include <cmath>
#include <numbers>

#include "eegpipe/common/parallel.hpp"
#include "eegpipe/core/filter.hpp"

namespace eegpipe::features {

double sample_variance(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw DegenerateSignal("variance needs at least 2 samples");
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(n - 1);
}

double differential_entropy_from_variance(double variance) {
    if (!(variance > kVarianceFloor))
        throw DegenerateSignal("variance " + std::to_string(variance) +
                               " at or below floor " + std::to_string(kVarianceFloor));
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * variance);
}

double differential_entropy(std::span<const double> samples) {
    return differential_entropy_from_variance(sample_variance(samples));
}

std::vector<core::Segment> band_decompose(const core::Segment& seg,
                                          const std::vector<BandDefinition>& bands,
                                          int filter_order) {
    validate_bands(bands);
    std::vector<core::Segment> out;
    out.reserve(bands.size());
    for (const BandDefinition& band : bands) {
        const double high = std::min(band.high_hz, 0.45 * seg.rate);
        if (!(band.low_hz < high))
            throw InvalidCutoff("band " + band.name + " collapses at rate " +
                                      std::to_string(seg.rate));
        const auto spec = core::FilterSpec::band_pass(band.low_hz, high, filter_order);
        const core::SosFilter f = core::design_butterworth(spec, seg.rate);
        core::Segment filtered = seg;
        filtered.samples = core::filtfilt(f, seg.samples);
        out.push_back(std::move(filtered));
    }
    return out;
}

Eigen::VectorXd FeatureSequence::step_vector(long t) const {
    Eigen::VectorXd v(channels * bands);
    for (long c = 0; c < channels; ++c)
        for (long b = 0; b < bands; ++b) v[c * bands + b] = at(t, c, b);
    return v;
}

Eigen::MatrixXd FeatureSequence::as_matrix() const {
    Eigen::MatrixXd m(steps, channels * bands);
    for (long t = 0; t < steps; ++t) m.row(t) = step_vector(t).transpose();
    return m;
}

FeatureSequence extract_de_features(const std::vector<core::Segment>& segments,
                                    const std::vector<BandDefinition>& bands,
                                    int filter_order, int threads) {
    if (segments.empty()) throw EmptyDataset("no segments to extract features from");
    const long channels = segments.front().channels();
    const long length = segments.front().length();
    const double rate = segments.front().rate;
    for (const auto& s : segments)
        if (s.channels() != channels || s.length() != length || s.rate != rate)
            throw DimensionMismatch("segments differ in shape or rate");

    // Validate the band stack against the rate once, so the per-segment loop
    // can only fail with DegenerateSignal.
    validate_bands(bands);
    for (const BandDefinition& band : bands) {
        const double high = std::min(band.high_hz, 0.45 * rate);
        if (!(band.low_hz < high))
            throw InvalidCutoff("band " + band.name + " collapses at rate " +
                                      std::to_string(rate));
        core::FilterSpec::band_pass(band.low_hz, high, filter_order).validate(rate);
    }

    FeatureSequence fs;
    fs.steps = static_cast<long>(segments.size());
    fs.channels = channels;
    fs.bands = static_cast<long>(bands.size());
    fs.rate = segments.front().rate / static_cast<double>(length);
    fs.class_label = segments.front().class_label;
    fs.values.assign(static_cast<std::size_t>(fs.steps * channels * fs.bands), 0.0);

    std::vector<std::string> failure(segments.size());
    parallel_for(segments.size(), threads, [&](std::size_t t) {
        try {
            const auto per_band = band_decompose(segments[t], bands, filter_order);
            for (long b = 0; b < fs.bands; ++b) {
                const Eigen::MatrixXd& m = per_band[static_cast<std::size_t>(b)].samples;
                for (long c = 0; c < channels; ++c) {
                    try {
                        const Eigen::RowVectorXd row = m.row(c);
                        fs.at(static_cast<long>(t), c, b) = differential_entropy(
                            std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
                    } catch (const DegenerateSignal& e) {
                        throw DegenerateSignal("segment " + std::to_string(t) + ", channel " +
                                               std::to_string(c) + ", band " +
                                               bands[static_cast<std::size_t>(b)].name + ": " +
                                               e.what());
                    }
                }
            }
        } catch (const Error& e) {
            failure[t] = e.what();
        }
    });
    for (const auto& msg : failure)
        if (!msg.empty()) throw DegenerateSignal(msg);
    return fs;
}

std::vector<FeatureSequence> slice_sequences(const FeatureSequence& fs, long seq_len) {
    if (seq_len < 1) throw InvalidConfig("sequence length must be >= 1");
    std::vector<FeatureSequence> out;
    const long runs = fs.steps / seq_len;
    for (long r = 0; r < runs; ++r) {
        FeatureSequence s;
        s.steps = seq_len;
        s.channels = fs.channels;
        s.bands = fs.bands;
        s.rate = fs.rate;
        s.class_label = fs.class_label;
        const std::size_t stride = static_cast<std::size_t>(fs.channels * fs.bands);
        s.values.assign(fs.values.begin() + static_cast<std::ptrdiff_t>(r * seq_len * stride),
                        fs.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * seq_len * stride));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace eegpipe::features
