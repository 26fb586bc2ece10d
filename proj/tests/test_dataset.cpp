#include <doctest.h>

#include <fstream>
#include <set>

#include "cncost/dataset.hpp"
#include "cncost/errors.hpp"
#include "cncost/mesh_io.hpp"
#include "test_helpers.hpp"

using namespace cncost;
using namespace testutil;

namespace {

// Writes `n` box meshes of varying size and a manifest referencing them.
// Returns the manifest path.
std::filesystem::path make_corpus(const TempDir& dir, std::size_t n,
                                  bool with_volume = false, bool with_features = false) {
    std::vector<PartRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = 10.0 + 3.0 * static_cast<double>(i);
        TriangleMesh box = make_box({0, 0, 0}, {s, s * 0.8, s * 0.5});
        auto mesh_path = dir.path / ("part_" + std::to_string(i) + ".stl");
        write_stl_binary(box, mesh_path);

        PartRecord rec;
        rec.id = "part_" + std::to_string(i);
        rec.mesh_path = mesh_path;
        rec.material = i % 2 == 0 ? "aluminum_6061" : "steel_1045";
        rec.cost = 40.0 + 7.0 * static_cast<double>(i);
        if (with_volume) {
            rec.volume = s * (s * 0.8) * (s * 0.5);
            rec.has_volume = true;
        }
        if (with_features) {
            rec.features.push_back({"pocket", {1, 1, 1}, {3, 3, 2}});
            rec.features.push_back({"hole", {5, 5, 0}, {6, 6, s * 0.5}});
        }
        records.push_back(rec);
    }
    auto manifest = dir.path / "manifest.jsonl";
    write_manifest(records, manifest);
    return manifest;
}

MaterialVocab two_metals() {
    return MaterialVocab::from_labels({"aluminum_6061", "steel_1045"});
}

} // namespace

TEST_CASE("manifest round-trips every field") {
    TempDir dir("manifest_rt");
    auto manifest = make_corpus(dir, 4, /*with_volume=*/true, /*with_features=*/true);
    auto records = read_manifest(manifest);
    REQUIRE(records.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& r = records[i];
        CHECK(r.id == "part_" + std::to_string(i));
        CHECK(std::filesystem::exists(r.mesh_path));
        CHECK(r.material == (i % 2 == 0 ? "aluminum_6061" : "steel_1045"));
        CHECK(r.cost == 40.0 + 7.0 * static_cast<double>(i));
        CHECK(r.has_volume);
        REQUIRE(r.features.size() == 2);
        CHECK(r.features[0].kind == "pocket");
        CHECK(r.features[0].min == Vec3{1, 1, 1});
        CHECK(r.features[0].max == Vec3{3, 3, 2});
        CHECK(r.features[1].kind == "hole");
    }

    // Second write of the re-read records is byte-identical.
    auto manifest2 = dir.path / "again.jsonl";
    write_manifest(records, manifest2);
    auto round2 = read_manifest(manifest2);
    REQUIRE(round2.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(round2[i].cost == records[i].cost);
        CHECK(round2[i].volume == records[i].volume);
    }
}

TEST_CASE("relative mesh paths resolve against the manifest directory") {
    TempDir dir("manifest_rel");
    std::filesystem::create_directories(dir.path / "meshes");
    write_stl_binary(make_unit_cube(), dir.path / "meshes" / "cube.stl");

    PartRecord rec;
    rec.id = "p0";
    rec.mesh_path = dir.path / "meshes" / "cube.stl";
    rec.material = "aluminum_6061";
    rec.cost = 10.0;
    write_manifest({rec}, dir.path / "m.jsonl");

    // The stored path must be relative (portable corpus directory).
    std::ifstream in(dir.path / "m.jsonl");
    std::string line;
    std::getline(in, line);
    CHECK(line.find("meshes/cube.stl") != std::string::npos);
    CHECK(line.find(dir.path.string()) == std::string::npos);

    auto records = read_manifest(dir.path / "m.jsonl");
    REQUIRE(records.size() == 1);
    CHECK(std::filesystem::exists(records[0].mesh_path));
    TriangleMesh m = load_stl(records[0].mesh_path);
    CHECK(m.size() == 12);
}

TEST_CASE("manifest read errors carry context") {
    TempDir dir("manifest_bad");
    {
        std::ofstream out(dir.path / "bad.jsonl");
        out << "{\"id\": \"x\", \"mesh\": \"a.stl\"}\n"; // missing material+cost
    }
    CHECK_THROWS_AS(read_manifest(dir.path / "bad.jsonl"), MalformedToken);
    CHECK_THROWS_AS(read_manifest(dir.path / "missing.jsonl"), IoFailure);
    {
        std::ofstream out(dir.path / "garbage.jsonl");
        out << "not json at all\n";
    }
    CHECK_THROWS_AS(read_manifest(dir.path / "garbage.jsonl"), MalformedToken);
}

TEST_CASE("build_dataset produces normalized, encoded examples") {
    TempDir dir("build_ds");
    auto manifest = make_corpus(dir, 5);
    auto records = read_manifest(manifest);
    Dataset ds = build_dataset(records, 16, NormKind::minmax, NormKind::minmax, two_metals());

    REQUIRE(ds.examples.size() == 5);
    CHECK(ds.resolution == 16);
    CHECK(ds.vocab.size() == 2);
    for (const auto& ex : ds.examples) {
        CHECK(ex.voxels.resolution == 16);
        CHECK(ex.voxels.occupied_count() > 0);
        CHECK(ex.cost_norm >= 0.0);
        CHECK(ex.cost_norm <= 1.0);
        CHECK(ex.volume_norm >= 0.0);
        CHECK(ex.volume_norm <= 1.0);
        double onehot_sum = 0.0;
        for (double v : ex.material_vec) onehot_sum += v;
        CHECK(onehot_sum == 1.0);
    }
    // Cost normalization is invertible back to the manifest values.
    for (std::size_t i = 0; i < records.size(); ++i)
        CHECK(denormalize_value(ds.examples[i].cost_norm, ds.norm_cost) ==
              doctest::Approx(records[i].cost).epsilon(1e-12));

    // Volumes were computed from the meshes (none were provided): box volume.
    NormalizationParams vol = ds.norm_volume;
    const double v0 = denormalize_value(ds.examples[0].volume_norm, vol);
    CHECK(v0 == doctest::Approx(10.0 * 8.0 * 5.0).epsilon(1e-9));
}

TEST_CASE("build_dataset honors manifest-provided volumes") {
    TempDir dir("build_vol");
    auto manifest = make_corpus(dir, 3, /*with_volume=*/true);
    auto records = read_manifest(manifest);
    records[1].volume = 123456.0; // deliberately different from the mesh
    Dataset ds = build_dataset(records, 16, NormKind::log, NormKind::log, two_metals());
    CHECK(denormalize_value(ds.examples[1].volume_norm, ds.norm_volume) ==
          doctest::Approx(123456.0).epsilon(1e-12));
}

TEST_CASE("build_dataset names the failing part") {
    TempDir dir("build_fail");
    auto manifest = make_corpus(dir, 3);
    auto records = read_manifest(manifest);
    records[2].mesh_path = dir.path / "nope.stl";
    try {
        build_dataset(records, 16, NormKind::minmax, NormKind::minmax, two_metals());
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(std::string(e.what()).find("part_2") != std::string::npos);
    }
}

TEST_CASE("build_dataset rejects unknown materials") {
    TempDir dir("build_mat");
    auto manifest = make_corpus(dir, 2);
    auto records = read_manifest(manifest);
    records[0].material = "unobtanium";
    CHECK_THROWS_AS(
        build_dataset(records, 16, NormKind::minmax, NormKind::minmax, two_metals()),
        PipelineError);
}

TEST_CASE("split sizes follow round-half-up and partition the examples") {
    TempDir dir("split_sz");
    auto manifest = make_corpus(dir, 7);
    Dataset ds = build_dataset(read_manifest(manifest), 16, NormKind::minmax,
                               NormKind::minmax, two_metals());

    auto [tr, te] = split(ds, 0.8, 1);
    CHECK(tr.examples.size() == 6); // round(0.8*7) = round(5.6) = 6
    CHECK(te.examples.size() == 1);

    auto [tr2, te2] = split(ds, 0.5, 1);
    CHECK(tr2.examples.size() == 4); // round-half-up(3.5) = 4
    CHECK(te2.examples.size() == 3);

    // Extreme fractions stay clamped to non-empty sides.
    auto [tr3, te3] = split(ds, 0.999, 1);
    CHECK(tr3.examples.size() == 6);
    CHECK(te3.examples.size() == 1);
    auto [tr4, te4] = split(ds, 0.001, 1);
    CHECK(tr4.examples.size() == 1);
    CHECK(te4.examples.size() == 6);
    CHECK_THROWS_AS(split(ds, 0.0, 1), DegenerateRange);
    CHECK_THROWS_AS(split(ds, 1.0, 1), DegenerateRange);

    // Partition: ids disjoint, union = all.
    std::set<std::string> seen;
    for (const auto& e : tr.examples) seen.insert(e.id);
    for (const auto& e : te.examples) {
        CHECK(seen.count(e.id) == 0);
        seen.insert(e.id);
    }
    CHECK(seen.size() == 7);

    // Normalization stats and vocab are inherited unchanged.
    CHECK(tr.norm_cost.x_min == ds.norm_cost.x_min);
    CHECK(te.norm_cost.x_max == ds.norm_cost.x_max);
    CHECK(tr.vocab.size() == ds.vocab.size());
}

TEST_CASE("split is deterministic in the seed and varies across seeds") {
    TempDir dir("split_det");
    auto manifest = make_corpus(dir, 9);
    Dataset ds = build_dataset(read_manifest(manifest), 16, NormKind::minmax,
                               NormKind::minmax, two_metals());
    auto [a_tr, a_te] = split(ds, 0.8, 7);
    auto [b_tr, b_te] = split(ds, 0.8, 7);
    REQUIRE(a_tr.examples.size() == b_tr.examples.size());
    for (std::size_t i = 0; i < a_tr.examples.size(); ++i)
        CHECK(a_tr.examples[i].id == b_tr.examples[i].id);

    bool any_difference = false;
    for (std::uint64_t seed = 0; seed < 6 && !any_difference; ++seed) {
        auto [c_tr, c_te] = split(ds, 0.8, seed);
        for (std::size_t i = 0; i < c_tr.examples.size(); ++i)
            any_difference = any_difference || c_tr.examples[i].id != a_tr.examples[i].id;
    }
    CHECK(any_difference);
}

TEST_CASE("split rejects datasets below two examples") {
    TempDir dir("split_few");
    auto manifest = make_corpus(dir, 1);
    Dataset ds = build_dataset(read_manifest(manifest), 16, NormKind::log,
                               NormKind::log, two_metals());
    CHECK_THROWS_AS(split(ds, 0.8, 0), TooFewExamples);
    CHECK_THROWS_AS(split(Dataset{}, 0.8, 0), TooFewExamples);
}

TEST_CASE("dataset save/load round-trip is lossless and byte-stable") {
    TempDir dir("ds_rt");
    auto manifest = make_corpus(dir, 4, /*with_volume=*/true);
    Dataset ds = build_dataset(read_manifest(manifest), 16, NormKind::log,
                               NormKind::minmax, two_metals());

    auto out1 = dir.path / "ds1";
    save_dataset(ds, out1);
    Dataset back = load_dataset(out1);

    CHECK(back.resolution == ds.resolution);
    CHECK(back.norm_cost.kind == ds.norm_cost.kind);
    CHECK(back.norm_volume.kind == ds.norm_volume.kind);
    CHECK(back.norm_volume.x_min == ds.norm_volume.x_min);
    CHECK(back.norm_volume.x_max == ds.norm_volume.x_max);
    CHECK(back.vocab.labels() == ds.vocab.labels());
    REQUIRE(back.examples.size() == ds.examples.size());
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
        const auto& a = ds.examples[i];
        const auto& b = back.examples[i];
        CHECK(b.id == a.id);
        CHECK(b.voxels.occupancy == a.voxels.occupancy);
        CHECK(b.voxels.origin == a.voxels.origin);
        CHECK(b.voxels.cell_size == a.voxels.cell_size);
        CHECK(b.material_vec == a.material_vec);
        CHECK(b.volume_norm == a.volume_norm);
        CHECK(b.cost_norm == a.cost_norm);
    }

    // Saving the loaded dataset reproduces identical bytes.
    auto out2 = dir.path / "ds2";
    save_dataset(back, out2);
    CHECK(read_bytes(out1 / "index.json") == read_bytes(out2 / "index.json"));
    for (const auto& entry : std::filesystem::directory_iterator(out1))
        if (entry.path().extension() == ".voxb")
            CHECK(read_bytes(entry.path()) ==
                  read_bytes(out2 / entry.path().filename()));
}

TEST_CASE("load_dataset surfaces missing/corrupt directories") {
    TempDir dir("ds_bad");
    CHECK_THROWS_AS(load_dataset(dir.path / "nothing"), IoFailure);
    std::filesystem::create_directories(dir.path / "empty");
    CHECK_THROWS_AS(load_dataset(dir.path / "empty"), IoFailure);
}
