// SPDX-License-Identifier: Apache-2.0
//
// Event-related potential analysis: per-channel P300 latency and peak.

#pragma once

#include <vector>

#include "eegpipe/core/types.hpp"

namespace eegpipe::features {

struct ErpComponent {
    core::ChannelLabel channel;
    double latency_ms = 0.0;  // stimulus to peak
    double amplitude = 0.0;   // peak value relative to the pre-stimulus mean, microvolts
};

// Finds, per channel, the maximum positive deflection inside the
// post-stimulus window (defaults 250..400 ms). The deflection is measured
// against the mean of the 50 ms pre-stimulus baseline and must exceed twice
// the baseline standard deviation; NoPeak is thrown if any channel fails
// the threshold. Segments carry no labels, so the caller may pass them;
// otherwise channels are named CH1..CHn.
std::vector<ErpComponent> detect_p300(const core::Segment& epoch, long stimulus_index,
                                      double window_lo_ms = 250.0,
                                      double window_hi_ms = 400.0,
                                      const std::vector<core::ChannelLabel>& labels = {});

}  // namespace eegpipe::features
