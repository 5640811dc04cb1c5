// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/core/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace eegpipe::core {

namespace {

double channel_variance(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    const long n = row.size();
    if (n < 2) return 0.0;
    const double mean = row.mean();
    return (row.array() - mean).square().sum() / static_cast<double>(n - 1);
}

}  // namespace

Recording downsample(const Recording& rec, double target_rate) {
    if (!(target_rate > 0.0)) throw InvalidConfig("target rate must be positive");
    const double ratio = rec.rate / target_rate;
    const long factor = std::lround(ratio);
    if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9)
        throw NonIntegerFactor("rate " + std::to_string(rec.rate) +
                               " is not an integer multiple of " + std::to_string(target_rate));

    const SosFilter aa = design_butterworth(FilterSpec::low_pass(0.45 * target_rate), rec.rate);
    const Eigen::MatrixXd smoothed = filtfilt(aa, rec.samples);

    const long out_len = rec.length() / factor;
    Recording out;
    out.rate = target_rate;
    out.labels = rec.labels;
    out.samples.resize(rec.channels(), out_len);
    for (long i = 0; i < out_len; ++i) out.samples.col(i) = smoothed.col(i * factor);
    for (const EventMarker& m : rec.markers) {
        const long idx = m.sample_index / factor;
        if (idx < out_len) out.markers.push_back({idx, m.label});
    }
    return out;
}

std::vector<ChannelLabel> detect_bad_channels(const Recording& rec, double var_factor,
                                              double flat_eps) {
    if (rec.channels() < 2)
        throw InvalidConfig("bad-channel detection needs at least 2 channels");
    std::vector<double> variances(rec.channels());
    for (long c = 0; c < rec.channels(); ++c) variances[c] = channel_variance(rec.samples.row(c));

    std::vector<double> sorted = variances;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median =
        (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    std::vector<ChannelLabel> bad;
    for (long c = 0; c < rec.channels(); ++c)
        if (variances[c] > var_factor * median || variances[c] < flat_eps)
            bad.push_back(rec.labels[c]);
    return bad;
}

Recording remove_channels(const Recording& rec, const std::vector<ChannelLabel>& bad) {
    auto is_bad = [&bad](const std::string& name) {
        return std::any_of(bad.begin(), bad.end(),
                           [&name](const ChannelLabel& l) { return l.name == name; });
    };
    Recording out;
    out.rate = rec.rate;
    out.markers = rec.markers;
    std::vector<long> keep;
    for (long c = 0; c < rec.channels(); ++c)
        if (!is_bad(rec.labels[c].name)) keep.push_back(c);
    out.samples.resize(static_cast<long>(keep.size()), rec.length());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.samples.row(static_cast<long>(i)) = rec.samples.row(keep[i]);
        out.labels.push_back({rec.labels[keep[i]].name, static_cast<int>(i)});
    }
    return out;
}

Recording rereference_common_average(const Recording& rec) {
    if (rec.channels() < 2)
        throw InvalidConfig("common-average reference needs at least 2 channels");
    Recording out = rec;
    const Eigen::RowVectorXd mean = rec.samples.colwise().mean();
    out.samples = rec.samples.rowwise() - mean;
    return out;
}

Recording filter(const Recording& rec, const FilterSpec& spec) {
    const SosFilter f = design_butterworth(spec, rec.rate);
    Recording out = rec;
    out.samples = filtfilt(f, rec.samples);
    return out;
}

std::vector<Segment> segment(const Recording& rec, double window_s,
                             std::optional<int> class_label, const std::string& recording_id) {
    const long window = std::lround(window_s * rec.rate);
    if (window < 1) throw InvalidConfig("window shorter than one sample");
    if (window > rec.length())
        throw WindowTooLong("window of " + std::to_string(window) +
                            " samples exceeds recording length " + std::to_string(rec.length()));
    const long count = rec.length() / window;
    std::vector<Segment> out;
    out.reserve(count);
    for (long k = 0; k < count; ++k) {
        Segment s;
        s.samples = rec.samples.middleCols(k * window, window);
        s.rate = rec.rate;
        s.class_label = class_label;
        s.origin = {recording_id, k * window};
        out.push_back(std::move(s));
    }
    return out;
}

Segment baseline_correct(const Segment& epoch, double start_s, double end_s) {
    const long lo = std::lround(start_s * epoch.rate);
    const long hi = std::lround(end_s * epoch.rate);
    if (lo < 0 || hi <= lo || hi > epoch.length())
        throw WindowOutOfRange("baseline window [" + std::to_string(start_s) + ", " +
                               std::to_string(end_s) + ") s outside epoch");
    Segment out = epoch;
    const Eigen::VectorXd mean = epoch.samples.middleCols(lo, hi - lo).rowwise().mean();
    out.samples = epoch.samples.colwise() - mean;
    return out;
}

}  // namespace eegpipe::core
