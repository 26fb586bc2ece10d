#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cncost/nn.hpp"

namespace cncost::nn {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

/// NNCK container: magic "NNCK", u32 version=1, u32 tensor count, then per
/// tensor: u16 name length, UTF-8 name, u8 rank, u32 dims, f64 little-endian
/// data. Order is preserved; round-trips are bitwise exact.
void save_checkpoint(const NamedTensors& tensors, const std::filesystem::path& path);
NamedTensors load_checkpoint(const std::filesystem::path& path);

} // namespace cncost::nn
