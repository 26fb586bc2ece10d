#include "cncost/heatmap_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cncost/errors.hpp"

namespace cncost {

std::string to_string(HeatmapFormat format) {
    return format == HeatmapFormat::vtk ? "vtk" : "csv";
}

HeatmapFormat heatmap_format_from_string(const std::string& s) {
    if (s == "vtk") return HeatmapFormat::vtk;
    if (s == "csv") return HeatmapFormat::csv;
    throw MalformedToken("unknown heatmap format: " + s);
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_vtk(const Heatmap& map, const VoxelGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path.string());
    const std::uint32_t r = grid.resolution;
    // Points sit at cell centers so spacing equals the cell size.
    Vec3 o{grid.origin.x + 0.5 * grid.cell_size.x, grid.origin.y + 0.5 * grid.cell_size.y,
           grid.origin.z + 0.5 * grid.cell_size.z};
    out << "# vtk DataFile Version 3.0\n";
    out << "machining cost activation map\n";
    out << "ASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << r << ' ' << r << ' ' << r << '\n';
    out << "ORIGIN " << fmt(o.x) << ' ' << fmt(o.y) << ' ' << fmt(o.z) << '\n';
    out << "SPACING " << fmt(grid.cell_size.x) << ' ' << fmt(grid.cell_size.y) << ' '
        << fmt(grid.cell_size.z) << '\n';
    out << "POINT_DATA " << map.values.size() << '\n';
    out << "SCALARS gradcam double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : map.values) out << fmt(v) << '\n';
    out << "SCALARS occupancy unsigned_char 1\n";
    out << "LOOKUP_TABLE default\n";
    for (std::uint8_t c : grid.occupancy) out << (c ? 1 : 0) << '\n';
    if (!out.flush()) throw IoFailure("write failed: " + path.string());
}

void write_csv(const Heatmap& map, const VoxelGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path.string());
    out << "i,j,k,value\n";
    const std::uint32_t r = grid.resolution;
    for (std::uint32_t k = 0; k < r; ++k)
        for (std::uint32_t j = 0; j < r; ++j)
            for (std::uint32_t i = 0; i < r; ++i) {
                std::size_t n = grid.index(i, j, k);
                if (!grid.occupancy[n]) continue;
                out << i << ',' << j << ',' << k << ',' << fmt(map.values[n]) << '\n';
            }
    if (!out.flush()) throw IoFailure("write failed: " + path.string());
}

} // namespace

void export_heatmap(const Heatmap& map, const VoxelGrid& grid, const std::filesystem::path& path,
                    HeatmapFormat format) {
    if (map.resolution != grid.resolution ||
        map.values.size() != grid.occupancy.size())
        throw ResolutionMismatch("export_heatmap: map and grid resolutions differ");
    if (format == HeatmapFormat::vtk)
        write_vtk(map, grid, path);
    else
        write_csv(map, grid, path);
}

std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, double>>
read_heatmap_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw TruncatedFile("missing header: " + path.string());
    if (line == "i,j,k,value\r") line.pop_back();
    if (line != "i,j,k,value") throw MalformedToken("bad header in " + path.string());

    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::uint32_t i, j, k;
        double v;
        char c1, c2, c3;
        if (!(ss >> i >> c1 >> j >> c2 >> k >> c3 >> v) || c1 != ',' || c2 != ',' || c3 != ',')
            throw MalformedToken(path.string() + ":" + std::to_string(lineno) + ": bad row");
        rows.emplace_back(i, j, k, v);
    }
    return rows;
}

} // namespace cncost
