#include "cncost/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cncost/errors.hpp"

namespace cncost {

std::vector<Vec3> sample_surface_points(const TriangleMesh& mesh, std::size_t count,
                                        SplitMix64& rng) {
    if (mesh.triangles.empty()) throw EmptyMesh("cannot sample an empty mesh");

    std::vector<double> cdf(mesh.triangles.size());
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        total += mesh.triangles[t].area();
        cdf[t] = total;
    }
    if (!(total > 0.0)) throw ZeroSurfaceArea("mesh surface area is zero");

    std::vector<Vec3> points;
    points.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const double pick = rng.uniform() * total;
        const std::size_t t = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
        const Triangle& tri = mesh.triangles[std::min(t, mesh.triangles.size() - 1)];
        const double s = std::sqrt(rng.uniform());
        const double r2 = rng.uniform();
        points.push_back(tri.v0 * (1.0 - s) + tri.v1 * (s * (1.0 - r2)) + tri.v2 * (s * r2));
    }
    return points;
}

void write_points(const std::vector<Vec3>& points, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoFailure("cannot open for writing: " + path.string());
    const std::uint64_t count = points.size();
    os.write(reinterpret_cast<const char*>(&count), sizeof count);
    for (const Vec3& p : points) {
        os.write(reinterpret_cast<const char*>(&p.x), sizeof p.x);
        os.write(reinterpret_cast<const char*>(&p.y), sizeof p.y);
        os.write(reinterpret_cast<const char*>(&p.z), sizeof p.z);
    }
    if (!os) throw IoFailure("write failed: " + path.string());
}

std::vector<Vec3> read_points(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoFailure("cannot open for reading: " + path.string());
    std::uint64_t count = 0;
    is.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!is) throw TruncatedFile("point cloud header is truncated");
    std::vector<Vec3> points(count);
    for (Vec3& p : points) {
        is.read(reinterpret_cast<char*>(&p.x), sizeof p.x);
        is.read(reinterpret_cast<char*>(&p.y), sizeof p.y);
        is.read(reinterpret_cast<char*>(&p.z), sizeof p.z);
    }
    if (!is) throw TruncatedFile("point cloud payload is truncated");
    return points;
}

std::vector<Vec3> sample_point_cloud(const TriangleMesh& mesh, std::size_t count,
                                     std::uint64_t seed) {
    SplitMix64 rng = derive_rng(seed, "points");
    return sample_surface_points(mesh, count, rng);
}

} // namespace cncost
