// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "eegpipe/core/preprocess.hpp"
#include "eegpipe/features/de.hpp"
#include "eegpipe/synth/generator.hpp"

using namespace eegpipe;
using namespace eegpipe::synth;

namespace {

SynthConfig small_config(std::uint64_t seed = 7) {
    SynthConfig cfg;
    cfg.profiles = default_profiles();
    cfg.channels = 4;
    cfg.rate = 128.0;
    cfg.segments_per_class = 20;
    cfg.seed = seed;
    return cfg;
}

double band_power_fraction(const core::Recording& rec,
                           const features::BandDefinition& band) {
    core::Segment s;
    s.rate = rec.rate;
    s.samples = rec.samples;
    auto filtered = features::band_decompose(s, {band});
    return filtered[0].samples.squaredNorm() / rec.samples.squaredNorm();
}

}  // namespace

TEST_CASE("alpha-only profile concentrates power in 8-12 Hz") {
    SynthConfig cfg = small_config();
    cfg.profiles = {{0, "alpha-only", {0, 0, 1.0, 0, 0}}, {1, "beta-only", {0, 0, 0, 1.0, 0}}};
    cfg.noise_floor = 0.0;
    cfg.channels = 1;
    const core::Recording rec = generate_recording(cfg, 0);
    CHECK(band_power_fraction(rec, {"alpha", 8.0, 12.0}) >= 0.80);
}

TEST_CASE("same seed reproduces the recording bit for bit") {
    SynthConfig cfg = small_config(99);
    const core::Recording a = generate_recording(cfg, 1);
    const core::Recording b = generate_recording(cfg, 1);
    CHECK(a.samples == b.samples);

    cfg.seed = 100;
    const core::Recording c = generate_recording(cfg, 1);
    CHECK(a.samples != c.samples);
}

TEST_CASE("floor-only profile is broadband") {
    SynthConfig cfg = small_config();
    cfg.profiles = {{0, "floor", {1e-30, 0, 0, 0, 0}}, {1, "other", {0, 0, 1.0, 0, 0}}};
    cfg.noise_floor = 1.0;
    cfg.channels = 1;
    const core::Recording rec = generate_recording(cfg, 0);
    // per-Hz power roughly flat across the five bands
    const auto bands = features::default_bands();
    double lo = 1e300, hi = 0.0;
    for (const auto& band : bands) {
        const double width = std::min(band.high_hz, 0.45 * cfg.rate) - band.low_hz;
        const double per_hz = band_power_fraction(rec, band) / width;
        lo = std::min(lo, per_hz);
        hi = std::max(hi, per_hz);
    }
    CHECK(hi / lo < 4.0);
}

TEST_CASE("generated recordings satisfy invariants and survive preprocessing") {
    SynthConfig cfg = small_config(3);
    const core::Recording rec = generate_recording(cfg, 0);
    rec.validate();
    CHECK(rec.length() == 20 * 128);
    CHECK(rec.channels() == 4);

    CHECK(core::detect_bad_channels(rec, 25.0, 1e-12).empty());
    core::Recording car = rereference_common_average(rec);
    core::Recording filtered = core::filter(car, core::FilterSpec::band_pass(0.5, 50.0, 4));
    auto segments = core::segment(filtered, 1.0, 0);
    CHECK(segments.size() == 20);
    auto fs = features::extract_de_features(segments, cfg.bands);
    for (double v : fs.values) CHECK(std::isfinite(v));
}

TEST_CASE("make_dataset splits 80/20 stratified") {
    SynthConfig cfg = small_config(11);
    cfg.segments_per_class = 200;
    cfg.channels = 2;
    LabeledSegments ds = make_dataset(cfg);
    CHECK(ds.train.size() == 480);
    CHECK(ds.validation.size() == 120);

    for (int cls = 0; cls < 3; ++cls) {
        const auto count = [cls](const std::vector<core::Segment>& v) {
            long n = 0;
            for (const auto& s : v)
                if (s.class_label == cls) ++n;
            return n;
        };
        CHECK(std::abs(count(ds.train) - 160) <= 1);
        CHECK(std::abs(count(ds.validation) - 40) <= 1);
    }

    // determinism
    LabeledSegments again = make_dataset(cfg);
    REQUIRE(again.train.size() == ds.train.size());
    for (std::size_t i = 0; i < ds.train.size(); ++i) {
        CHECK(again.train[i].class_label == ds.train[i].class_label);
        CHECK(again.train[i].samples == ds.train[i].samples);
    }
}

TEST_CASE("make_dataset rejects tiny classes") {
    SynthConfig cfg = small_config();
    cfg.segments_per_class = 3;
    CHECK_THROWS_AS(make_dataset(cfg), InvalidConfig);
}

TEST_CASE("separability: dominant-band DE gaps of at least 0.2 nats") {
    SynthConfig cfg = small_config(17);
    cfg.segments_per_class = 30;
    const auto bands = cfg.bands;
    const int dominant_band_of_class[3] = {4, 2, 1};  // gamma, alpha, theta

    // mean DE per (class, band) over all segments and channels
    Eigen::MatrixXd mean_de = Eigen::MatrixXd::Zero(3, 5);
    for (int cls = 0; cls < 3; ++cls) {
        const core::Recording rec = generate_recording(cfg, cls);
        auto segs = core::segment(rec, 1.0, cls);
        auto fs = features::extract_de_features(segs, bands);
        for (long t = 0; t < fs.steps; ++t)
            for (long c = 0; c < fs.channels; ++c)
                for (long b = 0; b < 5; ++b) mean_de(cls, b) += fs.at(t, c, b);
        mean_de.row(cls) /= static_cast<double>(fs.steps * fs.channels);
    }
    for (int cls = 0; cls < 3; ++cls) {
        const int dom = dominant_band_of_class[cls];
        for (int other = 0; other < 3; ++other) {
            if (other == cls) continue;
            CHECK(mean_de(cls, dom) - mean_de(other, dom) >= 0.2);
        }
    }
}

TEST_CASE("ERP epoch generation") {
    SUBCASE("noiseless peak lands exactly on the requested sample") {
        auto epoch = generate_erp_epoch(200.0, 100.0, 500.0, 300.0, 10.0, 0.0, 5);
        Eigen::Index peak;
        epoch.segment.samples.row(0).maxCoeff(&peak);
        CHECK(peak == 80);  // (100 + 300) ms at 200 Hz
        CHECK(epoch.segment.samples(0, peak) == 10.0);
        CHECK(epoch.stimulus_index == 20);
    }
    SUBCASE("amplitude zero gives pure noise") {
        auto epoch = generate_erp_epoch(200.0, 100.0, 500.0, 300.0, 0.0, 1.0, 5);
        const double sd = std::sqrt(epoch.segment.samples.row(0).array().square().mean());
        CHECK(sd == doctest::Approx(1.0).epsilon(0.2));
    }
    SUBCASE("latency outside the window is rejected") {
        CHECK_THROWS_AS(generate_erp_epoch(200.0, 100.0, 500.0, 600.0, 10.0, 0.0, 5),
                        InvalidConfig);
    }
}
