// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "eegpipe/common/errors.hpp"

namespace eegpipe::features {

struct BandDefinition {
    std::string name;
    double low_hz = 0.0;
    double high_hz = 0.0;
};

// The five canonical rhythm bands, non-overlapping and ordered by frequency.
inline std::vector<BandDefinition> default_bands() {
    return {
        {"delta", 0.1, 3.0},  {"theta", 4.0, 7.0},   {"alpha", 8.0, 12.0},
        {"beta", 12.5, 28.0}, {"gamma", 29.0, 50.0},
    };
}

inline void validate_bands(const std::vector<BandDefinition>& bands) {
    if (bands.empty()) throw InvalidConfig("band list is empty");
    for (const auto& b : bands)
        if (!(b.low_hz > 0.0 && b.low_hz < b.high_hz))
            throw InvalidConfig("band " + b.name + " has invalid edges");
}

}  // namespace eegpipe::features
