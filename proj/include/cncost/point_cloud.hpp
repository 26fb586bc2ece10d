#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cncost/geometry.hpp"
#include "cncost/mesh_io.hpp"
#include "cncost/rng.hpp"

namespace cncost {

/// Draws `count` points uniformly over the mesh surface: triangles are chosen
/// by an area-weighted CDF, positions inside each triangle by the
/// square-root-of-barycentric map
///   P = (1 - sqrt(r1)) v0 + sqrt(r1) (1 - r2) v1 + sqrt(r1) r2 v2.
/// Throws EmptyMesh / ZeroSurfaceArea. Deterministic for a given rng state.
std::vector<Vec3> sample_surface_points(const TriangleMesh& mesh, std::size_t count,
                                        SplitMix64& rng);

/// Seed-based convenience: draws from the stream derive_rng(seed, "points").
std::vector<Vec3> sample_point_cloud(const TriangleMesh& mesh, std::size_t count,
                                     std::uint64_t seed);

/// Binary point-cloud container: u64 count, then count * 3 little-endian f64.
void write_points(const std::vector<Vec3>& points, const std::filesystem::path& path);
std::vector<Vec3> read_points(const std::filesystem::path& path);

} // namespace cncost
