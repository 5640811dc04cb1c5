// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/features/erp.hpp"

#include <cmath>

namespace eegpipe::features {

std::vector<ErpComponent> detect_p300(const core::Segment& epoch, long stimulus_index,
                                      double window_lo_ms, double window_hi_ms,
                                      const std::vector<core::ChannelLabel>& labels) {
    const double rate = epoch.rate;
    const long lo = stimulus_index + std::lround(window_lo_ms / 1000.0 * rate);
    const long hi = stimulus_index + std::lround(window_hi_ms / 1000.0 * rate);
    if (stimulus_index < 0 || lo < 0 || hi <= lo || hi > epoch.length())
        throw WindowOutOfRange("P300 search window outside epoch");

    // 50 ms pre-stimulus baseline for the noise threshold
    const long base_lo = std::max<long>(0, stimulus_index - std::lround(0.050 * rate));
    const long base_n = stimulus_index - base_lo;
    if (base_n < 2) throw WindowOutOfRange("pre-stimulus baseline shorter than 2 samples");

    std::vector<ErpComponent> out;
    out.reserve(epoch.channels());
    for (long c = 0; c < epoch.channels(); ++c) {
        const auto baseline = epoch.samples.row(c).segment(base_lo, base_n);
        const double mu = baseline.mean();
        const double sd = std::sqrt((baseline.array() - mu).square().sum() /
                                    static_cast<double>(base_n - 1));

        // pick the peak on a 3-sample moving average; a raw argmax rides the
        // maximum of the noise and overestimates the amplitude
        auto smoothed = [&](long t) {
            const long a = std::max<long>(0, t - 1);
            const long b = std::min<long>(epoch.length() - 1, t + 1);
            return (epoch.samples(c, a) + epoch.samples(c, t) + epoch.samples(c, b)) / 3.0 - mu;
        };
        double best = -1e300;
        long best_t = lo;
        for (long t = lo; t < hi; ++t) {
            const double v = smoothed(t);
            if (v > best) {
                best = v;
                best_t = t;
            }
        }
        if (!(best > 2.0 * sd))
            throw NoPeak("channel " + std::to_string(c) + ": max deflection " +
                         std::to_string(best) + " below 2x baseline sd " + std::to_string(sd));

        ErpComponent comp;
        comp.channel = (c < static_cast<long>(labels.size()))
                           ? labels[static_cast<std::size_t>(c)]
                           : core::ChannelLabel{"CH" + std::to_string(c + 1), static_cast<int>(c)};
        comp.latency_ms = static_cast<double>(best_t - stimulus_index) / rate * 1000.0;
        comp.amplitude = best;
        out.push_back(comp);
    }
    return out;
}

}  // namespace eegpipe::features
