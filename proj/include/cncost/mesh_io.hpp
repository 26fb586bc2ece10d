#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cncost/geometry.hpp"

namespace cncost {

/// Indexed triangle soup in millimeters. Coordinates are held in 64-bit
/// floats even though STL stores 32-bit; downstream geometry runs in 64-bit.
struct TriangleMesh {
    std::vector<Triangle> triangles;
    std::string name;

    bool empty() const { return triangles.empty(); }
    std::size_t size() const { return triangles.size(); }
};

/// Parse an ASCII or binary STL stream. Format is auto-detected: buffers
/// beginning with "solid" are tried as ASCII first, falling back to binary
/// (some binary exporters write a "solid" header). Stored facet normals are
/// discarded; they are recomputed on demand from the vertices.
///
/// Throws TruncatedFile, MalformedToken or EmptyMesh.
TriangleMesh parse_stl(std::span<const unsigned char> bytes);

TriangleMesh load_stl(const std::filesystem::path& path);

/// Serialize as binary STL (80-byte header, u32 facet count, 50-byte facets).
/// Coordinates are narrowed to f32, the STL storage type.
std::vector<unsigned char> serialize_stl_binary(const TriangleMesh& mesh);

void write_stl_binary(const TriangleMesh& mesh, const std::filesystem::path& path);

/// |sum of signed tetrahedron volumes v0 . (v1 x v2) / 6|, in mm^3.
/// Exact for closed, consistently oriented meshes. Open or inconsistently
/// oriented meshes are not detected; the absolute signed sum is returned
/// as-is.
double mesh_volume(const TriangleMesh& mesh);

/// Componentwise min/max over all vertices. Throws EmptyMesh.
Aabb bounding_box(const TriangleMesh& mesh);

} // namespace cncost
