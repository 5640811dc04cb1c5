// SPDX-License-Identifier: Apache-2.0
//
// Recording file format: CSV with header `time,<label1>,<label2>,...`, one
// row per sample, plus a sidecar markers file of `<sample_index>,<label>`
// lines. The sampling rate travels out-of-band.

#pragma once

#include <filesystem>
#include <string>

#include "eegpipe/core/types.hpp"

namespace eegpipe::core {

void write_recording_csv(const Recording& rec, const std::filesystem::path& csv_path);
void write_markers(const Recording& rec, const std::filesystem::path& markers_path);

// `rate` comes from the caller (CLI flag or config). Throws ParseError on
// malformed input. The markers path is optional; a missing file means no
// markers.
Recording read_recording_csv(const std::filesystem::path& csv_path, double rate,
                             const std::filesystem::path& markers_path = {});

}  // namespace eegpipe::core
