#include "cncost/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cncost/errors.hpp"
#include "cncost/mesh_io.hpp"
#include "cncost/rng.hpp"

namespace cncost {

using nlohmann::json;

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw MalformedToken("expected a 3-element coordinate array");
    return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

std::vector<PartRecord> read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoFailure("cannot open manifest: " + path.string());
    const std::filesystem::path base = path.parent_path();

    std::vector<PartRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw MalformedToken("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        PartRecord rec;
        try {
            rec.id = j.at("id").get<std::string>();
            rec.mesh_path = j.at("mesh").get<std::string>();
            rec.material = j.at("material").get<std::string>();
            rec.cost = j.at("cost").get<double>();
            if (j.contains("volume")) {
                rec.volume = j.at("volume").get<double>();
                rec.has_volume = true;
            }
            if (j.contains("features"))
                for (const json& f : j.at("features"))
                    rec.features.push_back(FeatureBox{f.at("kind").get<std::string>(),
                                                      vec3_from_json(f.at("min")),
                                                      vec3_from_json(f.at("max"))});
        } catch (const json::exception& e) {
            throw MalformedToken("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        if (rec.mesh_path.is_relative()) rec.mesh_path = base / rec.mesh_path;
        records.push_back(std::move(rec));
    }
    return records;
}

void write_manifest(const std::vector<PartRecord>& records, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoFailure("cannot open manifest for writing: " + path.string());
    const std::filesystem::path base = path.parent_path();

    for (const PartRecord& rec : records) {
        std::filesystem::path mesh = rec.mesh_path;
        const std::filesystem::path abs_mesh = std::filesystem::absolute(mesh).lexically_normal();
        const std::filesystem::path abs_base = std::filesystem::absolute(base).lexically_normal();
        const std::filesystem::path rel = abs_mesh.lexically_relative(abs_base);
        if (!rel.empty() && rel.native().rfind("..", 0) != 0) mesh = rel;
        json j;
        j["id"] = rec.id;
        j["mesh"] = mesh.generic_string();
        j["material"] = rec.material;
        j["cost"] = rec.cost;
        if (rec.has_volume) j["volume"] = rec.volume;
        if (!rec.features.empty()) {
            json feats = json::array();
            for (const FeatureBox& f : rec.features)
                feats.push_back({{"kind", f.kind},
                                 {"min", vec3_to_json(f.min)},
                                 {"max", vec3_to_json(f.max)}});
            j["features"] = feats;
        }
        os << j.dump() << '\n';
    }
    if (!os) throw IoFailure("manifest write failed: " + path.string());
}

Dataset build_dataset(const std::vector<PartRecord>& manifest, std::uint32_t resolution,
                      NormKind norm_cost_kind, NormKind norm_volume_kind,
                      const MaterialVocab& vocab, FitMode fit) {
    if (manifest.empty()) throw EmptyDataset("manifest has no parts");

    struct Loaded {
        VoxelGrid voxels;
        double volume;
    };
    std::vector<Loaded> loaded;
    loaded.reserve(manifest.size());
    std::vector<double> costs, volumes;
    costs.reserve(manifest.size());
    volumes.reserve(manifest.size());

    for (const PartRecord& rec : manifest) {
        try {
            if (!(rec.cost > 0.0)) throw NonPositiveInput("cost must be positive");
            const TriangleMesh mesh = load_stl(rec.mesh_path);
            double volume = rec.has_volume ? rec.volume : mesh_volume(mesh);
            if (!(volume > 0.0)) throw NonPositiveInput("volume must be positive");
            loaded.push_back(Loaded{voxelize_surface(mesh, resolution, fit), volume});
            costs.push_back(rec.cost);
            volumes.push_back(volume);
        } catch (const Error& e) {
            throw PipelineError("part '" + rec.id + "': " + e.what());
        }
    }

    Dataset ds;
    ds.resolution = resolution;
    ds.vocab = vocab;
    ds.norm_cost = fit_normalization(norm_cost_kind, costs);
    ds.norm_volume = fit_normalization(norm_volume_kind, volumes);

    ds.examples.reserve(manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        Example ex;
        ex.id = manifest[i].id;
        ex.voxels = std::move(loaded[i].voxels);
        try {
            ex.material_vec = encode_material(manifest[i].material, vocab);
        } catch (const Error& e) {
            throw PipelineError("part '" + manifest[i].id + "': " + e.what());
        }
        ex.volume_norm = normalize_value(loaded[i].volume, ds.norm_volume);
        ex.cost_norm = normalize_value(manifest[i].cost, ds.norm_cost);
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
    const std::size_t n = dataset.examples.size();
    if (n < 2) throw TooFewExamples("split needs at least 2 examples");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DegenerateRange("train_fraction must lie strictly between 0 and 1");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng = derive_rng(seed, "split");
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);

    // Round half up, then clamp so neither side is empty.
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(n) + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    auto take = [&](std::size_t first, std::size_t last) {
        Dataset part;
        part.resolution = dataset.resolution;
        part.norm_cost = dataset.norm_cost;
        part.norm_volume = dataset.norm_volume;
        part.vocab = dataset.vocab;
        part.examples.reserve(last - first);
        for (std::size_t i = first; i < last; ++i)
            part.examples.push_back(dataset.examples[order[i]]);
        return part;
    };
    return {take(0, n_train), take(n_train, n)};
}

namespace {

json params_to_json(const NormalizationParams& p) {
    json j;
    j["kind"] = to_string(p.kind);
    if (p.kind == NormKind::minmax) {
        j["x_min"] = p.x_min;
        j["x_max"] = p.x_max;
    }
    return j;
}

NormalizationParams params_from_json(const json& j) {
    NormalizationParams p;
    p.kind = norm_kind_from_string(j.at("kind").get<std::string>());
    if (p.kind == NormKind::minmax) {
        p.x_min = j.at("x_min").get<double>();
        p.x_max = j.at("x_max").get<double>();
    }
    return p;
}

std::string voxb_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ex_%06zu.voxb", i);
    return buf;
}

} // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    json index;
    index["resolution"] = dataset.resolution;
    index["norm_cost"] = params_to_json(dataset.norm_cost);
    index["norm_volume"] = params_to_json(dataset.norm_volume);
    index["vocab"] = dataset.vocab.labels();

    json examples = json::array();
    for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
        const Example& ex = dataset.examples[i];
        const auto hot = std::find(ex.material_vec.begin(), ex.material_vec.end(), 1.0);
        if (hot == ex.material_vec.end())
            throw MalformedToken("example '" + ex.id + "' has no one-hot material");
        json j;
        j["id"] = ex.id;
        j["voxb"] = voxb_name(i);
        j["material_index"] = static_cast<std::size_t>(hot - ex.material_vec.begin());
        j["volume_norm"] = ex.volume_norm;
        j["cost_norm"] = ex.cost_norm;
        examples.push_back(std::move(j));
        write_voxb(ex.voxels, dir / voxb_name(i));
    }
    index["examples"] = std::move(examples);

    std::ofstream os(dir / "index.json");
    if (!os) throw IoFailure("cannot write dataset index in " + dir.string());
    os << index.dump(2) << '\n';
    if (!os) throw IoFailure("dataset index write failed in " + dir.string());
}

Dataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream is(dir / "index.json");
    if (!is) throw IoFailure("cannot open dataset index in " + dir.string());
    json index;
    try {
        index = json::parse(is);
    } catch (const json::exception& e) {
        throw MalformedToken(std::string("dataset index: ") + e.what());
    }

    Dataset ds;
    try {
        ds.resolution = index.at("resolution").get<std::uint32_t>();
        ds.norm_cost = params_from_json(index.at("norm_cost"));
        ds.norm_volume = params_from_json(index.at("norm_volume"));
        ds.vocab = MaterialVocab(index.at("vocab").get<std::vector<std::string>>());
        for (const json& j : index.at("examples")) {
            Example ex;
            ex.id = j.at("id").get<std::string>();
            ex.voxels = read_voxb(dir / j.at("voxb").get<std::string>());
            if (ex.voxels.resolution != ds.resolution)
                throw ResolutionMismatch("example '" + ex.id +
                                         "' resolution differs from the index");
            const auto slot = j.at("material_index").get<std::size_t>();
            if (slot >= kMaterialSlots)
                throw UnknownMaterial("material index out of range in dataset index");
            ex.material_vec[slot] = 1.0;
            ex.volume_norm = j.at("volume_norm").get<double>();
            ex.cost_norm = j.at("cost_norm").get<double>();
            ds.examples.push_back(std::move(ex));
        }
    } catch (const json::exception& e) {
        throw MalformedToken(std::string("dataset index: ") + e.what());
    }
    return ds;
}

} // namespace cncost
