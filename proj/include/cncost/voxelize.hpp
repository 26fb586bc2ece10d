#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cncost/geometry.hpp"
#include "cncost/mesh_io.hpp"

namespace cncost {

/// Cubic binary occupancy grid with a world-to-grid transform.
/// Cells are addressed x-fastest: flat index = i + R*(j + R*k).
struct VoxelGrid {
    std::uint32_t resolution = 32;
    std::vector<std::uint8_t> occupancy; // R^3 entries, each 0 or 1
    Vec3 origin;                         // world position of cell (0,0,0) min corner
    Vec3 cell_size;                      // mm per cell, per axis

    std::size_t index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(resolution) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(resolution) * k);
    }
    bool occupied(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        return occupancy[index(i, j, k)] != 0;
    }
    /// World-space closed box of cell (i,j,k).
    Aabb cell_box(std::uint32_t i, std::uint32_t j, std::uint32_t k) const;
    std::size_t occupied_count() const;
};

enum class FitMode {
    /// Grid spans a cube of side max extent * (1 + 2*0.02), centered on the
    /// mesh bounding box. Aspect ratio is preserved.
    isotropic,
    /// Grid spans the exact per-axis bounding box (the per-axis split of the
    /// source description). Cells are generally non-cubic.
    anisotropic,
};

std::string to_string(FitMode fit);
FitMode fit_mode_from_string(const std::string& s);

/// True iff the closed triangle and the closed box intersect
/// (separating-axis theorem over 13 axes: 3 box axes, the triangle normal
/// and 9 edge cross products). Touching counts as intersecting.
bool triangle_box_intersects(const Triangle& tri, const Aabb& box);

/// Surface (shell) occupancy: cell (i,j,k) is set iff some mesh triangle
/// intersects the closed box of that cell. Interiors stay empty.
/// Throws EmptyMesh or ResolutionTooSmall (resolution must be >= 2).
VoxelGrid voxelize_surface(const TriangleMesh& mesh, std::uint32_t resolution,
                           FitMode fit = FitMode::isotropic);

/// Optional scanline parity fill: marks interior cells of a closed mesh by
/// casting +x rays through cell centers and counting crossings. Off the
/// default path; surface occupancy is what the model consumes.
VoxelGrid fill_solid(const VoxelGrid& surface, const TriangleMesh& mesh);

/// VOXB container: magic "VOXB", u32 version=1, u32 resolution, 3*f64 origin,
/// 3*f64 cell size, then ceil(R^3/8) bytes of bit-packed occupancy,
/// x-fastest, LSB-first within each byte.
void write_voxb(const VoxelGrid& grid, const std::filesystem::path& path);
VoxelGrid read_voxb(const std::filesystem::path& path);

} // namespace cncost
