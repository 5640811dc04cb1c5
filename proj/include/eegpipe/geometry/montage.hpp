// SPDX-License-Identifier: Apache-2.0
//
// Electrode montage geometry. Coordinates live on a sphere of radius r
// (unit by default), x toward the right ear, y toward the nasion, z up.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eegpipe/core/types.hpp"

namespace eegpipe::geometry {

struct ElectrodePosition {
    core::ChannelLabel label;
    double x = 0.0, y = 0.0, z = 0.0;
};

struct MontageLayout {
    std::vector<ElectrodePosition> positions;
    double r = 1.0;

    long size() const { return static_cast<long>(positions.size()); }
    const ElectrodePosition& find(const std::string& name) const;

    // Checks uniqueness, electrode count >= 2 and the on-sphere invariant.
    void validate() const;
};

// Central angle between two on-sphere points, radians in [0, pi].
// Throws OffSphere if a point misses the radius by more than 1e-4.
double spherical_distance(const ElectrodePosition& a, const ElectrodePosition& b, double r);

// The 62-channel cap of the extended 10-20 system, computed from the
// standard ring/arc construction on the unit sphere.
MontageLayout standard_62_layout();

// Rows of `label,x,y,z`. Blank lines and #-comments are skipped.
MontageLayout load_layout(const std::filesystem::path& path, double r = 1.0);

void write_layout(const MontageLayout& layout, const std::filesystem::path& path);

}  // namespace eegpipe::geometry
