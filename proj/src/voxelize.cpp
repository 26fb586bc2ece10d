#include "cncost/voxelize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "cncost/errors.hpp"

namespace cncost {

Aabb VoxelGrid::cell_box(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
    Vec3 lo{origin.x + i * cell_size.x, origin.y + j * cell_size.y, origin.z + k * cell_size.z};
    return Aabb{lo, lo + cell_size};
}

std::size_t VoxelGrid::occupied_count() const {
    return static_cast<std::size_t>(
        std::count_if(occupancy.begin(), occupancy.end(), [](std::uint8_t v) { return v != 0; }));
}

std::string to_string(FitMode fit) {
    return fit == FitMode::isotropic ? "isotropic" : "anisotropic";
}

FitMode fit_mode_from_string(const std::string& s) {
    if (s == "isotropic") return FitMode::isotropic;
    if (s == "anisotropic") return FitMode::anisotropic;
    throw MalformedToken("unknown fit mode: " + s);
}

namespace {

// Projection interval of the three vertices onto an axis, against the box's
// own interval. The box is recentred at the origin with half extents h.
bool axis_separates(const Vec3& axis, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& h) {
    double pa = axis.dot(a);
    double pb = axis.dot(b);
    double pc = axis.dot(c);
    double tri_min = std::min({pa, pb, pc});
    double tri_max = std::max({pa, pb, pc});
    double box_r = h.x * std::abs(axis.x) + h.y * std::abs(axis.y) + h.z * std::abs(axis.z);
    return tri_min > box_r || tri_max < -box_r;
}

} // namespace

bool triangle_box_intersects(const Triangle& tri, const Aabb& box) {
    const Vec3 center = box.center();
    const Vec3 h = box.extent() * 0.5;

    // Triangle in box-local coordinates.
    const Vec3 a = tri.v0 - center;
    const Vec3 b = tri.v1 - center;
    const Vec3 c = tri.v2 - center;

    // 1) Box face normals (quick AABB overlap reject).
    if (std::min({a.x, b.x, c.x}) > h.x || std::max({a.x, b.x, c.x}) < -h.x) return false;
    if (std::min({a.y, b.y, c.y}) > h.y || std::max({a.y, b.y, c.y}) < -h.y) return false;
    if (std::min({a.z, b.z, c.z}) > h.z || std::max({a.z, b.z, c.z}) < -h.z) return false;

    const Vec3 e0 = b - a;
    const Vec3 e1 = c - b;
    const Vec3 e2 = a - c;

    // 2) Triangle plane.
    if (axis_separates(e0.cross(e1), a, b, c, h)) return false;

    // 3) Nine edge cross products. Degenerate (near-zero) axes project
    // everything to ~0 and never separate, so no special-casing is needed.
    const Vec3 axes[3] = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    for (const Vec3& unit : axes) {
        if (axis_separates(unit.cross(e0), a, b, c, h)) return false;
        if (axis_separates(unit.cross(e1), a, b, c, h)) return false;
        if (axis_separates(unit.cross(e2), a, b, c, h)) return false;
    }
    return true;
}

namespace {

void grid_frame(const TriangleMesh& mesh, std::uint32_t resolution, FitMode fit, Vec3& origin,
                Vec3& cell) {
    const Aabb bb = bounding_box(mesh);
    if (fit == FitMode::isotropic) {
        const Vec3 ext = bb.extent();
        double side = std::max({ext.x, ext.y, ext.z});
        if (side <= 0.0) side = 1.0; // point-like mesh: give it a unit cube
        side *= 1.04;                // 2% margin each side
        const Vec3 c = bb.center();
        origin = Vec3{c.x - side / 2, c.y - side / 2, c.z - side / 2};
        const double step = side / resolution;
        cell = Vec3{step, step, step};
    } else {
        Vec3 ext = bb.extent();
        // Flat meshes still need nonzero cells on the degenerate axis.
        if (ext.x <= 0.0) ext.x = 1e-9;
        if (ext.y <= 0.0) ext.y = 1e-9;
        if (ext.z <= 0.0) ext.z = 1e-9;
        origin = bb.min;
        cell = Vec3{ext.x / resolution, ext.y / resolution, ext.z / resolution};
    }
}

// Candidate cell range along one axis for a triangle interval [lo,hi],
// widened by one cell on each side so touching contacts are never missed
// to floating-point rounding.
void cell_range(double lo, double hi, double origin, double step, std::uint32_t resolution,
                std::int64_t& first, std::int64_t& last) {
    first = static_cast<std::int64_t>(std::floor((lo - origin) / step)) - 1;
    last = static_cast<std::int64_t>(std::floor((hi - origin) / step)) + 1;
    first = std::clamp<std::int64_t>(first, 0, static_cast<std::int64_t>(resolution) - 1);
    last = std::clamp<std::int64_t>(last, 0, static_cast<std::int64_t>(resolution) - 1);
}

} // namespace

VoxelGrid voxelize_surface(const TriangleMesh& mesh, std::uint32_t resolution, FitMode fit) {
    if (mesh.triangles.empty()) throw EmptyMesh("cannot voxelize an empty mesh");
    if (resolution < 2) throw ResolutionTooSmall("voxel resolution must be >= 2");

    VoxelGrid grid;
    grid.resolution = resolution;
    grid.occupancy.assign(static_cast<std::size_t>(resolution) * resolution * resolution, 0);
    grid_frame(mesh, resolution, fit, grid.origin, grid.cell_size);

    for (const Triangle& tri : mesh.triangles) {
        const Vec3 lo = Vec3::min(tri.v0, Vec3::min(tri.v1, tri.v2));
        const Vec3 hi = Vec3::max(tri.v0, Vec3::max(tri.v1, tri.v2));
        std::int64_t i0, i1, j0, j1, k0, k1;
        cell_range(lo.x, hi.x, grid.origin.x, grid.cell_size.x, resolution, i0, i1);
        cell_range(lo.y, hi.y, grid.origin.y, grid.cell_size.y, resolution, j0, j1);
        cell_range(lo.z, hi.z, grid.origin.z, grid.cell_size.z, resolution, k0, k1);
        for (std::int64_t k = k0; k <= k1; ++k)
            for (std::int64_t j = j0; j <= j1; ++j)
                for (std::int64_t i = i0; i <= i1; ++i) {
                    const std::size_t at = grid.index(static_cast<std::uint32_t>(i),
                                                      static_cast<std::uint32_t>(j),
                                                      static_cast<std::uint32_t>(k));
                    if (grid.occupancy[at]) continue;
                    const Aabb box = grid.cell_box(static_cast<std::uint32_t>(i),
                                                   static_cast<std::uint32_t>(j),
                                                   static_cast<std::uint32_t>(k));
                    if (triangle_box_intersects(tri, box)) grid.occupancy[at] = 1;
                }
    }
    return grid;
}

VoxelGrid fill_solid(const VoxelGrid& surface, const TriangleMesh& mesh) {
    VoxelGrid out = surface;
    const std::uint32_t r = surface.resolution;

    // For each (j,k) column march +x through cell centers; parity of
    // triangle crossings before a center decides inside/outside.
    for (std::uint32_t k = 0; k < r; ++k)
        for (std::uint32_t j = 0; j < r; ++j) {
            const double y = surface.origin.y + (j + 0.5) * surface.cell_size.y;
            const double z = surface.origin.z + (k + 0.5) * surface.cell_size.z;
            std::vector<double> hits;
            for (const Triangle& t : mesh.triangles) {
                // Even-odd membership of (y,z) in the projected triangle via
                // the half-open scanline rule, so a ray through an edge shared
                // by two triangles is attributed to exactly one of them
                // instead of double-counting the crossing.
                bool inside = false;
                for (int e = 0; e < 3; ++e) {
                    const Vec3& a = t.vertex(e);
                    const Vec3& b = t.vertex((e + 1) % 3);
                    if ((a.z > z) != (b.z > z)) {
                        const double yc = a.y + (z - a.z) / (b.z - a.z) * (b.y - a.y);
                        if (y < yc) inside = !inside;
                    }
                }
                if (!inside) continue;
                const Vec3& p0 = t.v0;
                const Vec3& p1 = t.v1;
                const Vec3& p2 = t.v2;
                const double d00y = p1.y - p0.y, d00z = p1.z - p0.z;
                const double d10y = p2.y - p0.y, d10z = p2.z - p0.z;
                const double det = d00y * d10z - d00z * d10y;
                if (det == 0.0) continue; // edge-on to the ray: ignore
                const double by = y - p0.y, bz = z - p0.z;
                const double u = (by * d10z - bz * d10y) / det;
                const double v = (d00y * bz - d00z * by) / det;
                hits.push_back(p0.x + u * (p1.x - p0.x) + v * (p2.x - p0.x));
            }
            std::sort(hits.begin(), hits.end());
            for (std::uint32_t i = 0; i < r; ++i) {
                const std::size_t at = out.index(i, j, k);
                if (out.occupancy[at]) continue;
                const double x = surface.origin.x + (i + 0.5) * surface.cell_size.x;
                const auto before = std::upper_bound(hits.begin(), hits.end(), x) - hits.begin();
                if (before % 2 == 1) out.occupancy[at] = 1;
            }
        }
    return out;
}

namespace {

constexpr char kVoxbMagic[4] = {'V', 'O', 'X', 'B'};

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw TruncatedFile("unexpected end of VOXB data");
    return v;
}

} // namespace

void write_voxb(const VoxelGrid& grid, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoFailure("cannot open for writing: " + path.string());
    os.write(kVoxbMagic, 4);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, grid.resolution);
    put<double>(os, grid.origin.x);
    put<double>(os, grid.origin.y);
    put<double>(os, grid.origin.z);
    put<double>(os, grid.cell_size.x);
    put<double>(os, grid.cell_size.y);
    put<double>(os, grid.cell_size.z);

    const std::size_t n = grid.occupancy.size();
    std::vector<std::uint8_t> packed((n + 7) / 8, 0);
    for (std::size_t idx = 0; idx < n; ++idx)
        if (grid.occupancy[idx]) packed[idx / 8] |= static_cast<std::uint8_t>(1u << (idx % 8));
    os.write(reinterpret_cast<const char*>(packed.data()),
             static_cast<std::streamsize>(packed.size()));
    if (!os) throw IoFailure("write failed: " + path.string());
}

VoxelGrid read_voxb(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoFailure("cannot open for reading: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kVoxbMagic, 4) != 0)
        throw MalformedToken("not a VOXB file: " + path.string());
    const auto version = take<std::uint32_t>(is);
    if (version != 1) throw MalformedToken("unsupported VOXB version");

    VoxelGrid grid;
    grid.resolution = take<std::uint32_t>(is);
    if (grid.resolution == 0) throw MalformedToken("VOXB resolution must be positive");
    grid.origin.x = take<double>(is);
    grid.origin.y = take<double>(is);
    grid.origin.z = take<double>(is);
    grid.cell_size.x = take<double>(is);
    grid.cell_size.y = take<double>(is);
    grid.cell_size.z = take<double>(is);

    const std::size_t n = static_cast<std::size_t>(grid.resolution) * grid.resolution *
                          grid.resolution;
    std::vector<std::uint8_t> packed((n + 7) / 8);
    is.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    if (!is) throw TruncatedFile("VOXB occupancy payload is truncated");
    grid.occupancy.assign(n, 0);
    for (std::size_t idx = 0; idx < n; ++idx)
        grid.occupancy[idx] = (packed[idx / 8] >> (idx % 8)) & 1u;
    return grid;
}

} // namespace cncost
