#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cncost/material.hpp"
#include "cncost/normalize.hpp"
#include "cncost/voxelize.hpp"

namespace cncost {

/// Axis-aligned world-space box of one machining feature, carried through
/// the manifest so explanation quality can be scored against geometry.
struct FeatureBox {
    std::string kind;
    Vec3 min;
    Vec3 max;
};

/// One manifest row: a part on disk plus its label data.
struct PartRecord {
    std::string id;
    std::filesystem::path mesh_path;
    std::string material;
    double cost = 0.0;
    double volume = 0.0; // ignored unless has_volume
    bool has_volume = false;
    std::vector<FeatureBox> features; // optional annotation
};

/// JSON-lines manifest, one object per part:
///   {"id": str, "mesh": path, "material": str, "cost": num[, "volume": num]
///    [, "features": [{"kind": str, "min": [x,y,z], "max": [x,y,z]}]]}
/// Relative mesh paths resolve against the manifest's directory on read;
/// on write, paths under the manifest's directory are stored relative.
std::vector<PartRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<PartRecord>& records, const std::filesystem::path& path);

/// One model-ready example.
struct Example {
    std::string id;
    VoxelGrid voxels;
    std::array<double, kMaterialSlots> material_vec{};
    double volume_norm = 0.0;
    double cost_norm = 0.0;
};

struct Dataset {
    std::uint32_t resolution = 0;
    std::vector<Example> examples;
    NormalizationParams norm_cost;
    NormalizationParams norm_volume;
    MaterialVocab vocab;
};

/// Voxelizes every part, computes volume where the manifest omits it, fits
/// normalization statistics on the WHOLE manifest (so denormalized test
/// metrics are well-defined; a mild leak, accepted deliberately), and
/// encodes materials. Errors from a part are rethrown naming its id.
Dataset build_dataset(const std::vector<PartRecord>& manifest, std::uint32_t resolution,
                      NormKind norm_cost_kind, NormKind norm_volume_kind,
                      const MaterialVocab& vocab, FitMode fit = FitMode::isotropic);

/// Seeded shuffle then partition. |train| = round-half-up(train_fraction*N),
/// clamped so both sides stay non-empty. Throws TooFewExamples below 2.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

/// Directory layout: index.json (params, vocab, per-example metadata) plus
/// one VOXB file per example. Identical datasets serialize bit-identically.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

} // namespace cncost
