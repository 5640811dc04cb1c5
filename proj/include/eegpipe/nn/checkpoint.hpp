// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint format:
//   magic "NLSTM1"
//   u32 arch string length, arch string bytes
//   per tensor: u32 name length, name bytes, u32 rank, u32 dims[rank],
//               f64 values (row-major)
//   u64 training seed (final 8 bytes)
// All integers and floats little-endian. The tensor list ends where the
// trailing seed record begins.

#pragma once

#include <cstdint>
#include <filesystem>

#include "eegpipe/nn/model.hpp"

namespace eegpipe::nn {

void save_checkpoint(const ModelParams& model, std::uint64_t seed,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
    ModelParams model;
    std::uint64_t seed = 0;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace eegpipe::nn
