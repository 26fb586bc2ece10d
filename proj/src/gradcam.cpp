#include "cncost/gradcam.hpp"

#include <algorithm>
#include <cmath>

#include "cncost/errors.hpp"

namespace cncost {

nn::Tensor grad_cam(const CostModel& model, const VoxelGrid& voxels,
                    const std::array<double, kMaterialSlots>& material_vec, double volume_norm,
                    InputCombo inputs, CamLayer layer) {
    CostModel::Trace trace;
    model.forward(voxel_tensor(voxels), material_tensor(material_vec), volume_norm,
                  CostModel::Mode::eval, inputs, nullptr, &trace);
    CostModel::ActivationGrad ag = model.activation_gradient(trace, layer);

    const nn::Tensor& act = *ag.activation;
    const nn::Tensor& grad = ag.gradient;
    const std::size_t channels = act.shape[0];
    const std::size_t side = act.shape[1];
    const std::size_t spatial = side * side * side;

    nn::Tensor cam({side, side, side}, std::vector<double>(spatial, 0.0));
    for (std::size_t l = 0; l < channels; ++l) {
        const double* g = grad.data.data() + l * spatial;
        const double* a = act.data.data() + l * spatial;
        double alpha = 0.0;
        for (std::size_t n = 0; n < spatial; ++n) alpha += g[n];
        alpha /= static_cast<double>(spatial);
        for (std::size_t n = 0; n < spatial; ++n) cam.data[n] += alpha * a[n];
    }
    for (double& v : cam.data) v = std::max(v, 0.0);
    return cam;
}

nn::Tensor upsample_trilinear(const nn::Tensor& cam, std::uint32_t target) {
    if (cam.shape.size() != 3 || cam.shape[0] != cam.shape[1] || cam.shape[1] != cam.shape[2])
        throw ShapeMismatch("upsample_trilinear: expected a cubic rank-3 tensor");
    const std::size_t s = cam.shape[0];
    const std::size_t r = target;
    if (s < 1) throw BadResolution("upsample_trilinear: source resolution must be >= 1");
    if (r < s) throw BadResolution("upsample_trilinear: target must be >= source resolution");

    // Per-axis sample positions under the align-corners lattice map.
    struct Tap {
        std::size_t lo, hi;
        double frac;
    };
    std::vector<Tap> taps(r);
    for (std::size_t t = 0; t < r; ++t) {
        if (s == 1) {
            taps[t] = {0, 0, 0.0};
            continue;
        }
        double x = static_cast<double>(t) * (static_cast<double>(s - 1) / static_cast<double>(r - 1));
        std::size_t lo = std::min(static_cast<std::size_t>(x), s - 2);
        taps[t] = {lo, lo + 1, x - static_cast<double>(lo)};
    }

    auto src = [&](std::size_t i, std::size_t j, std::size_t k) {
        return cam.data[(k * s + j) * s + i];
    };
    nn::Tensor out({r, r, r}, std::vector<double>(r * r * r, 0.0));
    std::size_t n = 0;
    for (std::size_t k = 0; k < r; ++k) {
        const Tap& tk = taps[k];
        for (std::size_t j = 0; j < r; ++j) {
            const Tap& tj = taps[j];
            for (std::size_t i = 0; i < r; ++i) {
                const Tap& ti = taps[i];
                double c00 = src(ti.lo, tj.lo, tk.lo) * (1 - ti.frac) + src(ti.hi, tj.lo, tk.lo) * ti.frac;
                double c10 = src(ti.lo, tj.hi, tk.lo) * (1 - ti.frac) + src(ti.hi, tj.hi, tk.lo) * ti.frac;
                double c01 = src(ti.lo, tj.lo, tk.hi) * (1 - ti.frac) + src(ti.hi, tj.lo, tk.hi) * ti.frac;
                double c11 = src(ti.lo, tj.hi, tk.hi) * (1 - ti.frac) + src(ti.hi, tj.hi, tk.hi) * ti.frac;
                double c0 = c00 * (1 - tj.frac) + c10 * tj.frac;
                double c1 = c01 * (1 - tj.frac) + c11 * tj.frac;
                out.data[n++] = c0 * (1 - tk.frac) + c1 * tk.frac;
            }
        }
    }
    return out;
}

Heatmap intersect_with_input(const nn::Tensor& cam, const VoxelGrid& grid, CamLayer source_layer,
                             HeatmapNorm normalization) {
    if (cam.shape.size() != 3 || cam.shape[0] != grid.resolution ||
        cam.shape[1] != grid.resolution || cam.shape[2] != grid.resolution)
        throw ResolutionMismatch("intersect_with_input: map and grid resolutions differ");

    Heatmap map;
    map.resolution = grid.resolution;
    map.source_layer = source_layer;
    map.normalization = normalization;
    map.values.resize(cam.data.size());
    for (std::size_t n = 0; n < cam.data.size(); ++n)
        map.values[n] = grid.occupancy[n] ? cam.data[n] : 0.0;

    if (normalization == HeatmapNorm::unit_max) {
        double mx = 0.0;
        for (double v : map.values) mx = std::max(mx, v);
        if (mx > 0.0)
            for (double& v : map.values) v /= mx;
    }
    return map;
}

double feature_localization_score(const Heatmap& map, const Aabb& region) {
    const std::uint32_t r = map.resolution;
    if (r == 0) throw EmptyRegion("feature_localization_score: empty heatmap");
    auto clamp_lo = [&](double v) {
        return static_cast<std::int64_t>(std::ceil(std::max(v, 0.0)));
    };
    auto clamp_hi = [&](double v) {
        return static_cast<std::int64_t>(std::floor(std::min(v, static_cast<double>(r - 1))));
    };
    std::int64_t i0 = clamp_lo(region.min.x), i1 = clamp_hi(region.max.x);
    std::int64_t j0 = clamp_lo(region.min.y), j1 = clamp_hi(region.max.y);
    std::int64_t k0 = clamp_lo(region.min.z), k1 = clamp_hi(region.max.z);
    if (i0 > i1 || j0 > j1 || k0 > k1)
        throw EmptyRegion("feature_localization_score: region covers no cell");

    double total = 0.0;
    for (double v : map.values) total += v;
    if (total == 0.0) return 0.0;

    double inside = 0.0;
    for (std::int64_t k = k0; k <= k1; ++k)
        for (std::int64_t j = j0; j <= j1; ++j)
            for (std::int64_t i = i0; i <= i1; ++i)
                inside += map.values[(static_cast<std::size_t>(k) * r + static_cast<std::size_t>(j)) * r +
                                     static_cast<std::size_t>(i)];
    return inside / total;
}

Aabb world_box_to_grid_region(const VoxelGrid& grid, const Aabb& world_box, double pad) {
    // Continuous cell-index coordinates: cell i spans [i, i+1) along each
    // axis after dividing out the cell size. A cell overlaps the box when
    // its index lies in [floor(lo), ceil(hi) - 1]; pad widens both ends.
    auto lo_idx = [&](double w, double o, double c) { return std::floor((w - o) / c) - pad; };
    auto hi_idx = [&](double w, double o, double c) { return std::ceil((w - o) / c) - 1.0 + pad; };
    Aabb region;
    region.min = Vec3{lo_idx(world_box.min.x, grid.origin.x, grid.cell_size.x),
                      lo_idx(world_box.min.y, grid.origin.y, grid.cell_size.y),
                      lo_idx(world_box.min.z, grid.origin.z, grid.cell_size.z)};
    region.max = Vec3{hi_idx(world_box.max.x, grid.origin.x, grid.cell_size.x),
                      hi_idx(world_box.max.y, grid.origin.y, grid.cell_size.y),
                      hi_idx(world_box.max.z, grid.origin.z, grid.cell_size.z)};
    return region;
}

Heatmap explain_prediction(const CostModel& model, const VoxelGrid& voxels,
                           const std::array<double, kMaterialSlots>& material_vec,
                           double volume_norm, InputCombo inputs, CamLayer layer,
                           HeatmapNorm normalization) {
    nn::Tensor cam = grad_cam(model, voxels, material_vec, volume_norm, inputs, layer);
    nn::Tensor up = upsample_trilinear(cam, voxels.resolution);
    return intersect_with_input(up, voxels, layer, normalization);
}

} // namespace cncost
