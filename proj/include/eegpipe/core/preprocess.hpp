// SPDX-License-Identifier: Apache-2.0
//
// Preprocessing chain for raw recordings: decimation, bad-channel
// rejection, common-average re-referencing, zero-phase filtering,
// segmentation, baseline correction. All operations are pure.

#pragma once

#include <vector>

#include "eegpipe/core/filter.hpp"
#include "eegpipe/core/types.hpp"

namespace eegpipe::core {

// Decimates to target_rate after an anti-alias low-pass at 0.45*target_rate.
// rate must be an integer multiple of target_rate (NonIntegerFactor).
// Output length is floor(input length / factor); markers are remapped.
Recording downsample(const Recording& rec, double target_rate);

// Channels whose variance exceeds var_factor times the median channel
// variance, or falls below flat_eps (dead channel). Needs >= 2 channels.
std::vector<ChannelLabel> detect_bad_channels(const Recording& rec, double var_factor,
                                              double flat_eps);

// Drops the named channels and reindexes the remaining labels.
Recording remove_channels(const Recording& rec, const std::vector<ChannelLabel>& bad);

// Subtracts the instantaneous mean across channels at every time index.
Recording rereference_common_average(const Recording& rec);

// Zero-phase filtering of every channel (see filter.hpp for the contract).
Recording filter(const Recording& rec, const FilterSpec& spec);

// Cuts non-overlapping windows of window_s seconds; the trailing partial
// window is discarded. Throws WindowTooLong if no full window fits.
std::vector<Segment> segment(const Recording& rec, double window_s,
                             std::optional<int> class_label = std::nullopt,
                             const std::string& recording_id = "");

// Subtracts the per-channel mean of [start_s, end_s) from the whole epoch.
Segment baseline_correct(const Segment& epoch, double start_s, double end_s);

}  // namespace eegpipe::core
