#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cncost/model.hpp"

namespace cncost {

enum class HeatmapNorm { raw, unit_max };

/// Dense non-negative scalar field over the input voxel lattice.
struct Heatmap {
    std::uint32_t resolution = 0;
    std::vector<double> values; // R^3, x-fastest (same layout as VoxelGrid)
    CamLayer source_layer = CamLayer::pool1;
    HeatmapNorm normalization = HeatmapNorm::raw;
};

/// Raw class-activation map at `layer`: forward in eval mode, backprop the
/// regression output to the layer's activation A, per-channel weights
/// a_l = mean of dy/dA_l over space, then ReLU(sum_l a_l * A_l).
/// Returns an [S, S, S] tensor at the layer's native resolution.
nn::Tensor grad_cam(const CostModel& model, const VoxelGrid& voxels,
                    const std::array<double, kMaterialSlots>& material_vec, double volume_norm,
                    InputCombo inputs, CamLayer layer);

/// Align-corners trilinear resample of a cubic [S,S,S] map to [R,R,R].
/// Exact on lattice points; S = 1 broadcasts. Requires 1 <= S <= R.
nn::Tensor upsample_trilinear(const nn::Tensor& cam, std::uint32_t target);

/// Elementwise product with binary occupancy; optionally rescales so the
/// max is 1 (identically-zero maps stay zero).
Heatmap intersect_with_input(const nn::Tensor& cam, const VoxelGrid& grid, CamLayer source_layer,
                             HeatmapNorm normalization = HeatmapNorm::raw);

/// Fraction of total heatmap mass inside `region`, an axis-aligned box in
/// grid-index coordinates (cell (i,j,k) counts when lo <= (i,j,k) <= hi
/// componentwise). Zero maps score 0. Throws EmptyRegion when the region
/// covers no cell of the grid.
double feature_localization_score(const Heatmap& map, const Aabb& region);

/// Index-space region spanned by a world-space box, dilated by `pad` cells
/// on every side. Unclamped; scoring clamps to the lattice.
Aabb world_box_to_grid_region(const VoxelGrid& grid, const Aabb& world_box, double pad = 0.0);

/// Convenience: grad_cam at the layer's resolution, upsampled to the input
/// lattice and intersected with occupancy.
Heatmap explain_prediction(const CostModel& model, const VoxelGrid& voxels,
                           const std::array<double, kMaterialSlots>& material_vec,
                           double volume_norm, InputCombo inputs,
                           CamLayer layer = CamLayer::pool1,
                           HeatmapNorm normalization = HeatmapNorm::raw);

} // namespace cncost
