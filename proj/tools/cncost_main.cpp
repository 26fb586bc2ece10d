// cncost — machining-cost estimation pipeline driver.
//
// Subcommands: preprocess, synth, train, evaluate, predict, explain, ablate.
// Every run is reproducible: identical arguments (including --seed) produce
// bytewise-identical artifacts.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cncost/ablate.hpp"
#include "cncost/dataset.hpp"
#include "cncost/errors.hpp"
#include "cncost/gradcam.hpp"
#include "cncost/heatmap_io.hpp"
#include "cncost/model.hpp"
#include "cncost/rng.hpp"
#include "cncost/synth.hpp"
#include "cncost/train.hpp"

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct SharedFlags {
    std::uint64_t seed = 0;
    std::uint32_t resolution = 32;
    std::string normalization = "log";
    std::string loss = "mae";
    std::string inputs = "vmv";
    std::string layer = "pool1";
    std::string out;
};

cncost::SynthSpec synth_spec_from_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw cncost::IoFailure("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw cncost::MalformedToken(path.string() + ": " + e.what());
    }
    cncost::SynthSpec spec;
    if (j.contains("part_count")) spec.part_count = j["part_count"].get<std::size_t>();
    if (j.contains("block_xy_min")) spec.block_xy_min = j["block_xy_min"].get<double>();
    if (j.contains("block_xy_max")) spec.block_xy_max = j["block_xy_max"].get<double>();
    if (j.contains("thickness_min")) spec.thickness_min = j["thickness_min"].get<double>();
    if (j.contains("thickness_max")) spec.thickness_max = j["thickness_max"].get<double>();
    if (j.contains("features_min")) spec.features_min = j["features_min"].get<std::size_t>();
    if (j.contains("features_max")) spec.features_max = j["features_max"].get<std::size_t>();
    if (j.contains("depth_min")) spec.depth_min = j["depth_min"].get<double>();
    if (j.contains("depth_max")) spec.depth_max = j["depth_max"].get<double>();
    if (j.contains("radius_min")) spec.radius_min = j["radius_min"].get<double>();
    if (j.contains("radius_max")) spec.radius_max = j["radius_max"].get<double>();
    if (j.contains("size_skew")) spec.size_skew = j["size_skew"].get<double>();
    if (j.contains("kinds")) {
        spec.kinds.clear();
        for (const auto& k : j["kinds"])
            spec.kinds.push_back(cncost::feature_kind_from_string(k.get<std::string>()));
    }
    if (j.contains("materials")) spec.materials = j["materials"].get<std::vector<std::string>>();
    return spec;
}

int cmd_preprocess(const std::string& manifest_path, const SharedFlags& flags,
                   const std::string& fit_name) {
    auto manifest = cncost::read_manifest(manifest_path);
    auto kind = cncost::norm_kind_from_string(flags.normalization);
    auto fit = cncost::fit_mode_from_string(fit_name);

    std::vector<std::string> labels;
    for (const auto& r : manifest) labels.push_back(r.material);
    auto vocab = cncost::MaterialVocab::from_labels(labels);

    cncost::Dataset dataset =
        cncost::build_dataset(manifest, flags.resolution, kind, kind, vocab, fit);

    const double cells = static_cast<double>(flags.resolution) * flags.resolution * flags.resolution;
    double occ_sum = 0.0;
    for (const auto& ex : dataset.examples) {
        double volume = cncost::denormalize_value(ex.volume_norm, dataset.norm_volume);
        std::size_t occ = ex.voxels.occupied_count();
        occ_sum += static_cast<double>(occ);
        std::cout << ex.id << " volume=" << fmt6(volume) << " occupied=" << occ << "/"
                  << static_cast<std::size_t>(cells) << "\n";
    }
    cncost::save_dataset(dataset, flags.out);
    std::cout << "wrote " << dataset.examples.size() << " examples to " << flags.out
              << " (resolution " << flags.resolution << ", normalization " << flags.normalization
              << ", mean occupancy " << fmt6(occ_sum / (cells * dataset.examples.size()))
              << ")\n";
    return 0;
}

int cmd_synth(const SharedFlags& flags, const std::string& spec_path, std::size_t count,
              double skew, const std::string& sweep) {
    namespace fs = std::filesystem;
    if (!sweep.empty()) {
        std::vector<cncost::PartRecord> records;
        if (sweep == "depth")
            records = cncost::synth_depth_sweep(flags.out);
        else if (sweep == "round")
            records = cncost::synth_round_sweep(flags.out);
        else
            throw cncost::MalformedToken("unknown sweep: " + sweep + " (expected depth|round)");
        for (const auto& r : records)
            std::cout << r.id << " cost=" << fmt6(r.cost) << " volume=" << fmt6(r.volume) << "\n";
        return 0;
    }

    cncost::SynthSpec spec;
    if (!spec_path.empty()) spec = synth_spec_from_json(spec_path);
    if (count > 0) spec.part_count = count;
    if (skew > 0.0) spec.size_skew = skew;

    const fs::path out_dir = flags.out;
    const fs::path mesh_dir = out_dir / "meshes";
    fs::create_directories(mesh_dir);

    std::vector<cncost::PartRecord> records;
    std::size_t skipped = 0;
    std::map<std::string, std::size_t> kind_counts;
    double depth_min = 1e300, depth_max = -1e300, radius_min = 1e300, radius_max = -1e300;

    for (std::size_t i = 0; i < spec.part_count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "part_%04zu", i);
        try {
            cncost::SynthPart part = cncost::synth_build_part(spec, flags.seed, i);
            fs::path mesh_path = mesh_dir / (std::string(name) + ".stl");
            cncost::write_stl_binary(part.mesh, mesh_path);

            cncost::PartRecord rec;
            rec.id = name;
            rec.mesh_path = mesh_path;
            rec.material = part.material;
            rec.volume = part.volume;
            rec.has_volume = true;
            rec.cost = cncost::synth_oracle_cost(part.material, part.volume, part.features);
            for (const auto& f : part.features) {
                rec.features.push_back(f.box);
                ++kind_counts[cncost::to_string(f.kind)];
                depth_min = std::min(depth_min, f.depth);
                depth_max = std::max(depth_max, f.depth);
                if (f.radius > 0.0) {
                    radius_min = std::min(radius_min, f.radius);
                    radius_max = std::max(radius_max, f.radius);
                }
            }
            records.push_back(std::move(rec));
        } catch (const cncost::InfeasibleSpec& e) {
            std::cerr << "warning: skipping " << name << ": " << e.what() << "\n";
            ++skipped;
        }
    }
    cncost::write_manifest(records, out_dir / "manifest.jsonl");

    std::cout << "generated " << records.size() << " parts";
    if (skipped > 0) std::cout << " (" << skipped << " skipped)";
    std::cout << " under " << out_dir.string() << "\n";
    std::cout << "feature distribution:\n";
    for (const auto& [k, n] : kind_counts) std::cout << "  " << k << ": " << n << "\n";
    if (depth_max >= depth_min)
        std::cout << "  depth range: [" << fmt6(depth_min) << ", " << fmt6(depth_max) << "]\n";
    if (radius_max >= radius_min)
        std::cout << "  radius range: [" << fmt6(radius_min) << ", " << fmt6(radius_max) << "]\n";
    if (records.empty()) throw cncost::InfeasibleSpec("no parts could be generated");
    return 0;
}

int cmd_train(const std::string& dataset_dir, const SharedFlags& flags, double train_fraction,
              const cncost::TrainConfig& base) {
    cncost::Dataset dataset = cncost::load_dataset(dataset_dir);
    auto [train_set, test_set] = cncost::split(dataset, train_fraction, flags.seed);

    cncost::ModelSpec spec;
    spec.voxel_resolution = dataset.resolution;
    cncost::CostModel model(spec, flags.seed);

    cncost::TrainConfig cfg = base;
    cfg.loss = cncost::nn::loss_kind_from_string(flags.loss);
    cfg.inputs = cncost::input_combo_from_string(flags.inputs);
    cfg.seed = flags.seed;

    cncost::TrainHistory history = cncost::train(model, train_set, cfg);
    cncost::save_model(model, cfg, cncost::pipeline_params_of(train_set, cfg.inputs), flags.out);
    cncost::write_history_csv(history, std::filesystem::path(flags.out) / "history.csv");

    std::cout << "trained " << history.train_loss.size() << " epochs (best "
              << history.best_epoch << ", val loss "
              << fmt6(history.val_loss[history.best_epoch]) << ") -> " << flags.out << "\n";
    auto [rmse, mape] = cncost::evaluate(model, test_set, cfg.inputs);
    std::cout << "held-out split: rmse=" << fmt6(rmse) << " mape=" << fmt6(mape) << "%\n";
    if (history.diverged) {
        std::cerr << "error: training diverged at epoch " << history.train_loss.size() - 1
                  << "\n";
        return 3;
    }
    return 0;
}

int cmd_evaluate(const std::string& model_dir, const std::string& dataset_dir,
                 const SharedFlags& flags, double train_fraction, const std::string& which,
                 bool inputs_given) {
    cncost::LoadedModel loaded = cncost::load_model(model_dir);
    cncost::Dataset dataset = cncost::load_dataset(dataset_dir);
    cncost::InputCombo inputs =
        inputs_given ? cncost::input_combo_from_string(flags.inputs) : loaded.params.inputs;

    const cncost::Dataset* eval_set = &dataset;
    cncost::Dataset train_set, test_set;
    if (which != "all") {
        std::tie(train_set, test_set) = cncost::split(dataset, train_fraction, flags.seed);
        eval_set = which == "train" ? &train_set : &test_set;
    }
    auto [rmse, mape] = cncost::evaluate(loaded.model, *eval_set, inputs);
    std::cout << "examples=" << eval_set->examples.size() << " rmse=" << fmt(rmse)
              << " mape=" << fmt(mape) << "%\n";
    if (!flags.out.empty()) {
        std::ofstream out(flags.out, std::ios::binary);
        if (!out) throw cncost::IoFailure("cannot open " + flags.out);
        out << "split,examples,rmse,mape\n";
        out << which << ',' << eval_set->examples.size() << ',' << fmt(rmse) << ',' << fmt(mape)
            << "\n";
        if (!out.flush()) throw cncost::IoFailure("write failed: " + flags.out);
    }
    return 0;
}

int cmd_predict(const std::string& model_dir, const std::string& mesh, const std::string& material) {
    cncost::LoadedModel loaded = cncost::load_model(model_dir);
    double cost = cncost::predict_cost(loaded.model, mesh, material, loaded.params);
    std::cout << fmt(cost) << "\n";
    return 0;
}

int cmd_explain(const std::string& model_dir, const std::string& mesh_path,
                const std::string& material, const SharedFlags& flags, const std::string& format,
                const std::vector<double>& region, double region_pad, bool raw) {
    cncost::LoadedModel loaded = cncost::load_model(model_dir);
    const cncost::PipelineParams& params = loaded.params;

    cncost::TriangleMesh mesh = cncost::load_stl(mesh_path);
    cncost::VoxelGrid grid = cncost::voxelize_surface(mesh, params.resolution, params.fit);
    double volume = cncost::mesh_volume(mesh);
    auto onehot = cncost::encode_material(material, params.vocab);
    double vol_norm = cncost::normalize_value(volume, params.norm_volume);

    cncost::CamLayer layer = cncost::cam_layer_from_string(flags.layer);
    cncost::Heatmap raw_map = cncost::explain_prediction(loaded.model, grid, onehot, vol_norm,
                                                         params.inputs, layer,
                                                         cncost::HeatmapNorm::raw);

    double y = loaded.model.forward_eval(cncost::voxel_tensor(grid),
                                         cncost::material_tensor(onehot), vol_norm, params.inputs);
    std::cout << "predicted_cost=" << fmt(cncost::denormalize_value(y, params.norm_cost)) << "\n";

    if (region.size() == 6) {
        cncost::Aabb world{{region[0], region[1], region[2]}, {region[3], region[4], region[5]}};
        cncost::Aabb idx = cncost::world_box_to_grid_region(grid, world, region_pad);
        std::cout << "localization_score="
                  << fmt(cncost::feature_localization_score(raw_map, idx)) << "\n";
    }

    cncost::Heatmap out_map = raw_map;
    if (!raw) {
        double mx = 0.0;
        for (double v : out_map.values) mx = std::max(mx, v);
        if (mx > 0.0)
            for (double& v : out_map.values) v /= mx;
        out_map.normalization = cncost::HeatmapNorm::unit_max;
    }
    cncost::export_heatmap(out_map, grid, flags.out,
                           cncost::heatmap_format_from_string(format));
    std::cout << "wrote " << flags.out << "\n";
    return 0;
}

int cmd_ablate(const std::string& manifest_path, const SharedFlags& flags,
               const std::vector<std::string>& norm_names,
               const std::vector<std::string>& loss_names,
               const std::vector<std::string>& combo_names,
               const std::vector<std::uint64_t>& seeds, const cncost::TrainConfig& base) {
    auto manifest = cncost::read_manifest(manifest_path);

    std::vector<cncost::NormKind> norms;
    for (const auto& s : norm_names) norms.push_back(cncost::norm_kind_from_string(s));
    std::vector<cncost::nn::LossKind> losses;
    for (const auto& s : loss_names) losses.push_back(cncost::nn::loss_kind_from_string(s));
    std::vector<cncost::InputCombo> combos;
    for (const auto& s : combo_names) combos.push_back(cncost::input_combo_from_string(s));

    cncost::ModelSpec spec;
    spec.voxel_resolution = flags.resolution;

    cncost::AblationReport report =
        cncost::ablate(manifest, flags.resolution, norms, losses, combos, seeds, base, spec);
    cncost::write_ablation_csv(report, flags.out);

    std::cout << "| normalization | loss | inputs | seed | rmse | mape | epochs | converged |\n";
    std::cout << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& c : report.cells) {
        std::cout << "| " << cncost::to_string(c.normalization) << " | "
                  << cncost::nn::to_string(c.loss) << " | " << cncost::to_string(c.inputs)
                  << " | " << c.seed << " | " << fmt6(c.rmse) << " | " << fmt6(c.mape) << " | "
                  << c.epochs << " | " << (c.converged ? "yes" : "no") << " |\n";
        if (!c.error.empty())
            std::cerr << "warning: cell " << cncost::to_string(c.normalization) << "/"
                      << cncost::nn::to_string(c.loss) << "/" << cncost::to_string(c.inputs)
                      << "/" << c.seed << " failed: " << c.error << "\n";
    }
    std::cout << "wrote " << flags.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cncost: machining cost estimation from voxelized CAD meshes"};
    app.require_subcommand(1);

    SharedFlags flags;
    cncost::TrainConfig base;
    double train_fraction = 0.8;

    auto add_shared = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--seed", flags.seed, "root random seed")->capture_default_str();
        if (with_out)
            sub->add_option("--out", flags.out, "output path")->required();
    };
    auto add_train_flags = [&](CLI::App* sub) {
        sub->add_option("--lr", base.learning_rate, "Adam learning rate")->capture_default_str();
        sub->add_option("--batch", base.batch_size, "mini-batch size")->capture_default_str();
        sub->add_option("--epochs", base.max_epochs, "max training epochs")->capture_default_str();
        sub->add_option("--patience", base.patience, "early-stop patience (0 = off)")
            ->capture_default_str();
        sub->add_option("--val-fraction", base.val_fraction, "validation holdout fraction")
            ->capture_default_str();
    };

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "voxelize a manifest into a dataset directory");
    std::string manifest_path;
    std::string fit_name = "isotropic";
    pre->add_option("--manifest", manifest_path, "JSONL part manifest")->required();
    pre->add_option("--resolution", flags.resolution, "voxel grid resolution")
        ->capture_default_str();
    pre->add_option("--normalization", flags.normalization, "minmax|log")->capture_default_str();
    pre->add_option("--fit", fit_name, "isotropic|anisotropic")->capture_default_str();
    add_shared(pre, true);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic machining corpus");
    std::string synth_spec_path, sweep;
    std::size_t synth_count = 0;
    double synth_skew = 0.0;
    synth->add_option("--spec", synth_spec_path, "JSON corpus recipe (defaults used if omitted)");
    synth->add_option("--count", synth_count, "number of parts (overrides recipe)");
    synth->add_option("--skew", synth_skew, "block-size skew exponent (overrides recipe)");
    synth->add_option("--sweep", sweep, "write a fixed fixture sweep instead: depth|round");
    add_shared(synth, true);

    // train
    auto* tr = app.add_subcommand("train", "train a cost model on a dataset directory");
    std::string dataset_dir;
    tr->add_option("--dataset", dataset_dir, "dataset directory from preprocess")->required();
    tr->add_option("--loss", flags.loss, "mse|mae|msle")->capture_default_str();
    tr->add_option("--inputs", flags.inputs, "v|vm|vmv|mv|vv")->capture_default_str();
    tr->add_option("--train-fraction", train_fraction, "train split fraction")
        ->capture_default_str();
    add_train_flags(tr);
    add_shared(tr, true);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "evaluate a trained model on a dataset split");
    std::string model_dir, which_split = "test";
    ev->add_option("--model", model_dir, "model directory from train")->required();
    ev->add_option("--dataset", dataset_dir, "dataset directory")->required();
    ev->add_option("--split", which_split, "test|train|all")->capture_default_str();
    ev->add_option("--train-fraction", train_fraction, "train split fraction")
        ->capture_default_str();
    auto* ev_inputs = ev->add_option("--inputs", flags.inputs, "override input combination");
    ev->add_option("--seed", flags.seed, "split seed")->capture_default_str();
    ev->add_option("--out", flags.out, "optional metrics CSV");

    // predict
    auto* pr = app.add_subcommand("predict", "predict the cost of one mesh");
    std::string mesh_path, material;
    pr->add_option("--model", model_dir, "model directory")->required();
    pr->add_option("--mesh", mesh_path, "STL file")->required();
    pr->add_option("--material", material, "material label")->required();

    // explain
    auto* ex = app.add_subcommand("explain", "write a Grad-CAM heatmap for one mesh");
    std::string format = "vtk";
    std::vector<double> region;
    double region_pad = 0.0;
    bool raw = false;
    ex->add_option("--model", model_dir, "model directory")->required();
    ex->add_option("--mesh", mesh_path, "STL file")->required();
    ex->add_option("--material", material, "material label")->required();
    ex->add_option("--layer", flags.layer, "conv1|conv2|pool1|conv3|conv4|pool2|conv5")
        ->capture_default_str();
    ex->add_option("--format", format, "vtk|csv")->capture_default_str();
    ex->add_option("--region", region, "world-space box x0 y0 z0 x1 y1 z1 to score")
        ->expected(6);
    ex->add_option("--region-pad", region_pad, "dilate the region by this many cells")
        ->capture_default_str();
    ex->add_flag("--raw", raw, "skip unit-max renormalization of the exported map");
    add_shared(ex, true);

    // ablate
    auto* ab = app.add_subcommand("ablate", "factorial study over normalization/loss/inputs");
    std::vector<std::string> norm_names = {"minmax", "log"};
    std::vector<std::string> loss_names = {"mse", "mae", "msle"};
    std::vector<std::string> combo_names = {"vmv"};
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    ab->add_option("--manifest", manifest_path, "JSONL part manifest")->required();
    ab->add_option("--resolution", flags.resolution, "voxel grid resolution")
        ->capture_default_str();
    ab->add_option("--normalizations", norm_names, "normalization kinds")->delimiter(',');
    ab->add_option("--losses", loss_names, "loss kinds")->delimiter(',');
    ab->add_option("--input-combos", combo_names, "input combinations")->delimiter(',');
    ab->add_option("--seeds", seeds, "training seeds")->delimiter(',');
    ab->add_option("--train-fraction", train_fraction, "train split fraction")
        ->capture_default_str();
    add_train_flags(ab);
    add_shared(ab, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (pre->parsed()) return cmd_preprocess(manifest_path, flags, fit_name);
        if (synth->parsed()) return cmd_synth(flags, synth_spec_path, synth_count, synth_skew, sweep);
        if (tr->parsed()) return cmd_train(dataset_dir, flags, train_fraction, base);
        if (ev->parsed())
            return cmd_evaluate(model_dir, dataset_dir, flags, train_fraction, which_split,
                                ev_inputs->count() > 0);
        if (pr->parsed()) return cmd_predict(model_dir, mesh_path, material);
        if (ex->parsed())
            return cmd_explain(model_dir, mesh_path, material, flags, format, region, region_pad,
                               raw);
        if (ab->parsed())
            return cmd_ablate(manifest_path, flags, norm_names, loss_names, combo_names, seeds,
                              base);
    } catch (const cncost::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
