// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/synth/generator.hpp"

#include <algorithm>
#include <cmath>

#include "eegpipe/common/rng.hpp"
#include "eegpipe/core/filter.hpp"
#include "eegpipe/core/preprocess.hpp"

namespace eegpipe::synth {

void SynthConfig::validate() const {
    if (profiles.size() < 2) throw InvalidConfig("need at least 2 class profiles");
    if (channels < 1) throw InvalidConfig("need at least 1 channel");
    if (!(rate > 0.0)) throw InvalidConfig("rate must be positive");
    if (segments_per_class < 1) throw InvalidConfig("segments per class must be >= 1");
    if (noise_floor < 0.0) throw InvalidConfig("noise floor must be >= 0");
    features::validate_bands(bands);
    double top = 0.0;
    for (const auto& b : bands) top = std::max(top, std::min(b.high_hz, 0.45 * rate));
    if (!(rate > 2.0 * top))
        throw InvalidConfig("rate " + std::to_string(rate) +
                            " too low for the highest band edge in use");
    for (const auto& p : profiles) {
        if (p.band_gains.size() != bands.size())
            throw InvalidConfig("profile " + p.label + " has " +
                                std::to_string(p.band_gains.size()) + " gains for " +
                                std::to_string(bands.size()) + " bands");
        bool any = false;
        for (double g : p.band_gains) {
            if (g < 0.0) throw InvalidConfig("negative band gain in profile " + p.label);
            if (g > 0.0) any = true;
        }
        if (!any) throw InvalidConfig("profile " + p.label + " has no positive gain");
    }
}

std::vector<ClassProfile> default_profiles(double dominant_gain) {
    // band order: delta, theta, alpha, beta, gamma
    auto gains = [dominant_gain](int dominant) {
        std::vector<double> g(5, 1.0);
        g[static_cast<std::size_t>(dominant)] = dominant_gain;
        return g;
    };
    return {
        {0, "vigorous", gains(4)},
        {1, "neutral", gains(2)},
        {2, "passive", gains(1)},
    };
}

namespace {

const ClassProfile& profile_for(const SynthConfig& cfg, int class_id) {
    for (const auto& p : cfg.profiles)
        if (p.class_id == class_id) return p;
    throw InvalidConfig("class id " + std::to_string(class_id) + " not in profiles");
}

Eigen::VectorXd white_noise(long n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
}

}  // namespace

core::Recording generate_recording(const SynthConfig& cfg, int class_id) {
    cfg.validate();
    const ClassProfile& profile = profile_for(cfg, class_id);

    const long length = std::lround(cfg.rate) * cfg.segments_per_class;
    core::Recording rec;
    rec.rate = cfg.rate;
    rec.labels = core::default_labels(cfg.channels);
    rec.samples.resize(cfg.channels, length);

    // one filter per band, shared with the analysis side
    std::vector<core::SosFilter> filters;
    for (const auto& band : cfg.bands) {
        const double high = std::min(band.high_hz, 0.45 * cfg.rate);
        filters.push_back(
            core::design_butterworth(core::FilterSpec::band_pass(band.low_hz, high, 4), cfg.rate));
    }

    for (int c = 0; c < cfg.channels; ++c) {
        Eigen::VectorXd channel = Eigen::VectorXd::Zero(length);
        for (std::size_t b = 0; b < cfg.bands.size(); ++b) {
            const double gain = profile.band_gains[b];
            if (gain <= 0.0) continue;
            const std::uint64_t s =
                derive_seed(cfg.seed, "synth-band",
                            (static_cast<std::uint64_t>(class_id) << 24) ^
                                (static_cast<std::uint64_t>(c) << 8) ^ b);
            channel += std::sqrt(gain) * core::filtfilt(filters[b], white_noise(length, s));
        }
        if (cfg.noise_floor > 0.0) {
            const std::uint64_t s =
                derive_seed(cfg.seed, "synth-floor",
                            (static_cast<std::uint64_t>(class_id) << 24) ^
                                (static_cast<std::uint64_t>(c) << 8));
            channel += cfg.noise_floor * white_noise(length, s);
        }
        rec.samples.row(c) = channel.transpose();
    }
    return rec;
}

LabeledSegments make_dataset(const SynthConfig& cfg) {
    cfg.validate();
    if (cfg.segments_per_class < 5)
        throw InvalidConfig("need at least 5 segments per class for an 80/20 split");

    std::vector<core::Segment> all;
    for (const auto& profile : cfg.profiles) {
        const core::Recording rec = generate_recording(cfg, profile.class_id);
        auto segs = core::segment(rec, 1.0, profile.class_id,
                                  "synth-class-" + std::to_string(profile.class_id));
        all.insert(all.end(), std::make_move_iterator(segs.begin()),
                   std::make_move_iterator(segs.end()));
    }

    // seeded shuffle, then stratified 80/20
    std::vector<std::size_t> idx(all.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(derive_seed(cfg.seed, "split"));
    std::shuffle(idx.begin(), idx.end(), rng);

    LabeledSegments out;
    for (const auto& profile : cfg.profiles) {
        std::vector<std::size_t> members;
        for (std::size_t i : idx)
            if (all[i].class_label == profile.class_id) members.push_back(i);
        const std::size_t n_train =
            static_cast<std::size_t>(std::lround(0.8 * static_cast<double>(members.size())));
        for (std::size_t m = 0; m < members.size(); ++m)
            (m < n_train ? out.train : out.validation).push_back(all[members[m]]);
    }
    // interleave classes deterministically: final shuffle within each split
    std::mt19937_64 rng_train(derive_seed(cfg.seed, "split-train"));
    std::mt19937_64 rng_val(derive_seed(cfg.seed, "split-val"));
    std::shuffle(out.train.begin(), out.train.end(), rng_train);
    std::shuffle(out.validation.begin(), out.validation.end(), rng_val);
    return out;
}

ErpEpoch generate_erp_epoch(double rate, double pre_ms, double post_ms,
                            double peak_latency_ms, double amplitude, double noise_sd,
                            std::uint64_t seed) {
    if (!(rate > 0.0)) throw InvalidConfig("rate must be positive");
    if (!(pre_ms >= 0.0 && post_ms > 0.0)) throw InvalidConfig("epoch window must be positive");
    if (!(peak_latency_ms > 0.0 && peak_latency_ms < post_ms))
        throw InvalidConfig("peak latency must lie inside (0, post_ms)");
    if (noise_sd < 0.0) throw InvalidConfig("noise sd must be >= 0");

    const long n = std::lround((pre_ms + post_ms) / 1000.0 * rate);
    const long stimulus = std::lround(pre_ms / 1000.0 * rate);

    ErpEpoch epoch;
    epoch.stimulus_index = stimulus;
    epoch.peak_latency_ms = peak_latency_ms;
    epoch.amplitude = amplitude;
    epoch.segment.rate = rate;
    epoch.segment.samples.resize(1, n);

    constexpr double kSigmaMs = 20.0;
    const double center_ms = pre_ms + peak_latency_ms;
    for (long i = 0; i < n; ++i) {
        const double t_ms = static_cast<double>(i) / rate * 1000.0;
        const double d = t_ms - center_ms;
        epoch.segment.samples(0, i) = amplitude * std::exp(-d * d / (2.0 * kSigmaMs * kSigmaMs));
    }
    if (noise_sd > 0.0) {
        const Eigen::VectorXd noise = white_noise(n, derive_seed(seed, "erp-noise"));
        epoch.segment.samples.row(0) += (noise_sd * noise).transpose();
    }
    return epoch;
}

}  // namespace eegpipe::synth
