#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cncost/dataset.hpp"
#include "cncost/mesh_io.hpp"

namespace cncost {

enum class FeatureKind {
    through_hole,
    blind_hole,
    rect_pocket,
    through_slot,
    step,
    circ_end_pocket,
};

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

/// One realized cut, as costed by the oracle.
struct SynthFeature {
    FeatureKind kind;
    double depth = 0.0;  // mm of cut (= block thickness for through kinds)
    double radius = 0.0; // hole / cap / corner radius; 0 for purely rectangular cuts
    FeatureBox box;      // world bounding box of the removed volume
    double removed_volume = 0.0;
};

/// Corpus recipe. Blocks are axis-aligned cuboids with the min corner at the
/// origin; features are cut into the top face, one per column of an x-wise
/// tiling, so every face is an enumerable set of axis-aligned polygons.
struct SynthSpec {
    std::size_t part_count = 100;
    double block_xy_min = 60.0;
    double block_xy_max = 100.0;
    double thickness_min = 35.0;
    double thickness_max = 45.0;
    std::size_t features_min = 1;
    std::size_t features_max = 3;
    double depth_min = 5.0;
    double depth_max = 32.0; // must stay below thickness_min
    double radius_min = 2.0;
    double radius_max = 14.0;
    /// > 1 skews block dimensions toward the small end with a long tail of
    /// big (expensive) parts; 1 = uniform.
    double size_skew = 1.0;
    std::vector<FeatureKind> kinds = {
        FeatureKind::through_hole, FeatureKind::blind_hole,    FeatureKind::rect_pocket,
        FeatureKind::through_slot, FeatureKind::step,          FeatureKind::circ_end_pocket,
    };
    std::vector<std::string> materials = {"steel", "aluminum", "stainless"};
};

/// Machining rate per mm^3 * 1e-3: steel 1.0, aluminum 0.8, stainless 1.4.
/// Throws UnknownMaterial for anything else.
double synth_material_rate(const std::string& material);

/// Per-feature cost term: 50 + 6*depth, plus 90/max(radius, 1) for the
/// kinds that have a radius. Strictly increasing in depth; and since a
/// larger radius also removes more material, part cost is strictly
/// decreasing in radius with everything else held fixed.
double synth_feature_cost(const SynthFeature& feature);

/// Ground-truth part cost: rate(material) * volume * 1e-3 + sum of feature
/// terms. `volume` is the material (part) volume in mm^3.
double synth_oracle_cost(const std::string& material, double volume,
                         const std::vector<SynthFeature>& features);

/// One generated part, before costing is folded into a PartRecord.
struct SynthPart {
    TriangleMesh mesh;
    double volume = 0.0; // exact analytic material volume
    std::string material;
    std::vector<SynthFeature> features;
};

/// Deterministically builds part `index` of the corpus described by `spec`
/// (per-part RNG stream; parts are independent). Throws InfeasibleSpec when
/// the recipe cannot fit (e.g. depth_max >= thickness_min).
SynthPart synth_build_part(const SynthSpec& spec, std::uint64_t seed, std::size_t index);

/// Generates the whole corpus: STL meshes under out_dir/meshes plus
/// out_dir/manifest.jsonl (costs from the oracle, volumes analytic, feature
/// boxes included). Returns the records with absolute mesh paths.
std::vector<PartRecord> synth_generate(const SynthSpec& spec, std::uint64_t seed,
                                       const std::filesystem::path& out_dir);

/// Three parts identical except for pocket depth 10 / 20 / 30 mm
/// (steel, 80x80x40 block, centered square pocket). Oracle cost is strictly
/// increasing along the sweep.
std::vector<PartRecord> synth_depth_sweep(const std::filesystem::path& out_dir);

/// Three parts identical except for blind-hole radius 3 / 8 / 13 mm
/// (steel, depth 15, 80x80x40 block). Oracle cost is strictly decreasing
/// along the sweep.
std::vector<PartRecord> synth_round_sweep(const std::filesystem::path& out_dir);

} // namespace cncost
