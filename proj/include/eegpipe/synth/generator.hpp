// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic EEG: class-dependent band power built from
// band-limited noise (white noise through the shared Butterworth stack),
// plus ERP epochs with a known injected peak. Everything is a pure
// function of (config, seed).

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eegpipe/core/types.hpp"
#include "eegpipe/features/bands.hpp"

namespace eegpipe::synth {

struct ClassProfile {
    int class_id = 0;
    std::string label;                          // e.g. "vigorous"
    std::vector<double> band_gains;             // relative power per band, >= 0
};

struct SynthConfig {
    std::vector<ClassProfile> profiles;
    std::vector<features::BandDefinition> bands = features::default_bands();
    int channels = 8;
    double rate = 128.0;
    int segments_per_class = 200;               // 1-second segments
    double noise_floor = 0.1;                   // broadband noise amplitude
    std::uint64_t seed = 0;

    void validate() const;
};

// Three classes echoing the vigorous/neutral/passive label set, with
// dominant bands gamma/alpha/theta at the given gain ratio over the rest.
std::vector<ClassProfile> default_profiles(double dominant_gain = 4.0);

// One continuous recording of segments_per_class seconds for the class:
// per channel, the sum over bands of band-passed white noise scaled by
// sqrt(gain), plus the broadband floor.
core::Recording generate_recording(const SynthConfig& cfg, int class_id);

struct LabeledSegments {
    std::vector<core::Segment> train;
    std::vector<core::Segment> validation;
};

// Balanced, seed-shuffled, stratified 80/20 split over 1-second segments.
// Feature extraction is deliberately left to the pipeline.
LabeledSegments make_dataset(const SynthConfig& cfg);

struct ErpEpoch {
    core::Segment segment;   // single channel
    long stimulus_index = 0;
    double peak_latency_ms;  // injected ground truth
    double amplitude;
};

// Gaussian bump (sigma 20 ms) at peak_latency_ms after the stimulus, plus
// white noise of the given standard deviation.
ErpEpoch generate_erp_epoch(double rate, double pre_ms, double post_ms,
                            double peak_latency_ms, double amplitude, double noise_sd,
                            std::uint64_t seed);

}  // namespace eegpipe::synth
