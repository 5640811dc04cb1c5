// SPDX-License-Identifier: Apache-2.0
//
// Channel-connectivity matrix: K-nearest-neighbor retention over spherical
// electrode distances, union-symmetrized, plus additive hemispheric pairs.

#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "eegpipe/geometry/montage.hpp"

namespace eegpipe::geometry {

struct AdjacencyMatrix {
    Eigen::MatrixXd weights;  // n x n, symmetric, zero diagonal
    std::vector<core::ChannelLabel> labels;

    long size() const { return weights.rows(); }
    void validate() const;  // symmetry, zero diagonal, non-negative entries
};

// K = max(1, round(0.2 * n)), ties rounded half to even.
int default_k(int n);

// a[i][j] = 1 when j is among i's K nearest by spherical distance or i is
// among j's (union symmetrization). Distances are quantized to 1e-9 rad
// before comparison and residual ties break by ascending channel index, so
// the result is invariant under rigid rotations of the layout.
AdjacencyMatrix knn_adjacency(const MontageLayout& layout, int k);

// For each (i, j) pair: a[i][j] += 1 and a[j][i] += 1.
AdjacencyMatrix apply_global_pairs(const AdjacencyMatrix& adj, const MontageLayout& layout,
                                   const std::vector<std::pair<std::string, std::string>>& pairs);

// The nine hemispheric pairs used to seed global connectivity.
const std::vector<std::pair<std::string, std::string>>& global_pairs();

// Text matrix, row-major, comma separated, one header row of labels.
void write_adjacency_csv(const AdjacencyMatrix& adj, const std::filesystem::path& path);
AdjacencyMatrix read_adjacency_csv(const std::filesystem::path& path);

}  // namespace eegpipe::geometry
