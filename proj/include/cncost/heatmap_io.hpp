#pragma once

#include <cstdint>
#include <filesystem>
#include <tuple>
#include <vector>

#include "cncost/gradcam.hpp"
#include "cncost/voxelize.hpp"

namespace cncost {

enum class HeatmapFormat { vtk, csv };

std::string to_string(HeatmapFormat format);
HeatmapFormat heatmap_format_from_string(const std::string& s);

/// vtk: legacy ASCII STRUCTURED_POINTS carrying two POINT_DATA scalar
/// fields, "gradcam" (double) and "occupancy" (0/1). csv: header i,j,k,value
/// then one row per OCCUPIED cell. Grid and heatmap resolutions must match.
void export_heatmap(const Heatmap& map, const VoxelGrid& grid, const std::filesystem::path& path,
                    HeatmapFormat format);

/// Rows of an exported CSV, in file order.
std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, double>>
read_heatmap_csv(const std::filesystem::path& path);

} // namespace cncost
