#include "cncost/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "cncost/checkpoint.hpp"
#include "cncost/errors.hpp"
#include "cncost/rng.hpp"

namespace cncost {

namespace {

using ordered_json = nlohmann::ordered_json;

void fisher_yates(std::vector<std::size_t>& idx, SplitMix64& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(idx[i - 1], idx[j]);
    }
}

std::vector<nn::Tensor> zeros_like(const std::vector<nn::Tensor>& params) {
    std::vector<nn::Tensor> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(nn::Tensor::zeros(p.shape));
    return out;
}

// Normalized-space loss of one example; n = 1 so gradients are per-example
// and the caller owns the 1/batch scaling.
std::pair<double, double> example_loss(nn::LossKind kind, double pred, double target) {
    auto [value, grad] = nn::loss(kind, nn::Tensor({1}, {pred}), nn::Tensor({1}, {target}));
    return {value, grad.data[0]};
}

} // namespace

TrainHistory train(CostModel& model, const Dataset& train_set, const TrainConfig& config) {
    const auto& examples = train_set.examples;
    if (examples.empty()) throw EmptyDataset("train(): empty dataset");
    if (config.batch_size == 0) throw SpecInvalid("train(): batch_size must be positive");
    if (!(config.val_fraction >= 0.0 && config.val_fraction < 1.0))
        throw SpecInvalid("train(): val_fraction must lie in [0, 1)");

    const auto t_start = std::chrono::steady_clock::now();
    const std::size_t n = examples.size();

    // Held-out validation slice: seeded shuffle, tail of the permutation.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    {
        SplitMix64 rng = derive_rng(config.seed, "val-split");
        fisher_yates(order, rng);
    }
    std::size_t n_val = 0;
    if (config.val_fraction > 0.0 && n >= 2) {
        n_val = static_cast<std::size_t>(std::floor(config.val_fraction * n + 0.5));
        n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    }
    std::vector<std::size_t> fit_idx(order.begin(), order.end() - n_val);
    std::vector<std::size_t> val_idx(order.end() - n_val, order.end());

    auto& params = model.parameters();
    std::vector<nn::AdamState> adam(params.size());
    nn::AdamConfig adam_cfg;
    adam_cfg.lr = config.learning_rate;

    std::vector<nn::Tensor> grad_accum = zeros_like(params);
    std::vector<nn::Tensor> best_params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t streak = 0;

    TrainHistory history;
    CostModel::Trace trace;

    auto eval_mean_loss = [&](const std::vector<std::size_t>& idx) {
        double sum = 0.0;
        for (std::size_t i : idx) {
            const Example& ex = examples[i];
            double y = model.forward_eval(voxel_tensor(ex.voxels), material_tensor(ex.material_vec),
                                          ex.volume_norm, config.inputs);
            sum += example_loss(config.loss, y, ex.cost_norm).first;
        }
        return idx.empty() ? 0.0 : sum / static_cast<double>(idx.size());
    };

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        SplitMix64 shuffle_rng = derive_rng(config.seed, "epoch", epoch);
        SplitMix64 dropout_rng = derive_rng(config.seed, "dropout", epoch);
        fisher_yates(fit_idx, shuffle_rng);

        double epoch_sum = 0.0;
        bool blew_up = false;
        try {
            for (std::size_t start = 0; start < fit_idx.size(); start += config.batch_size) {
                std::size_t stop = std::min(start + config.batch_size, fit_idx.size());
                double inv_b = 1.0 / static_cast<double>(stop - start);
                for (auto& g : grad_accum) std::fill(g.data.begin(), g.data.end(), 0.0);

                for (std::size_t b = start; b < stop; ++b) {
                    const Example& ex = examples[fit_idx[b]];
                    double y = model.forward(voxel_tensor(ex.voxels),
                                             material_tensor(ex.material_vec), ex.volume_norm,
                                             CostModel::Mode::train, config.inputs, &dropout_rng,
                                             &trace);
                    auto [lval, dldy] = example_loss(config.loss, y, ex.cost_norm);
                    epoch_sum += lval;
                    std::vector<nn::Tensor> g = model.backward(trace, dldy);
                    for (std::size_t p = 0; p < g.size(); ++p) {
                        double* acc = grad_accum[p].data.data();
                        const double* src = g[p].data.data();
                        for (std::size_t k = 0; k < g[p].data.size(); ++k)
                            acc[k] += inv_b * src[k];
                    }
                }
                for (std::size_t p = 0; p < params.size(); ++p)
                    nn::adam_step(params[p], grad_accum[p], adam[p], adam_cfg);
            }
        } catch (const MsleDomain&) {
            // A prediction left the loss domain: the run has diverged.
            blew_up = true;
        }

        double train_loss = blew_up ? std::numeric_limits<double>::quiet_NaN()
                                    : epoch_sum / static_cast<double>(fit_idx.size());
        double val_loss = blew_up ? std::numeric_limits<double>::quiet_NaN()
                                  : (n_val > 0 ? eval_mean_loss(val_idx) : train_loss);
        history.train_loss.push_back(train_loss);
        history.val_loss.push_back(val_loss);

        if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
            history.diverged = true;
            break;
        }
        if (val_loss < best_val) {
            best_val = val_loss;
            history.best_epoch = epoch;
            best_params = params;
            streak = 0;
        } else {
            ++streak;
            if (config.patience > 0 && streak >= config.patience) break;
        }
    }

    if (!best_params.empty()) params = std::move(best_params);
    history.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return history;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path.string());
    out << "epoch,train_loss,val_loss,best\n";
    char buf[64];
    for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
        out << e << ',';
        std::snprintf(buf, sizeof buf, "%.17g", history.train_loss[e]);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", history.val_loss[e]);
        out << buf << ',' << (e == history.best_epoch ? 1 : 0) << '\n';
    }
    if (!out.flush()) throw IoFailure("write failed: " + path.string());
}

PipelineParams pipeline_params_of(const Dataset& dataset, InputCombo inputs, FitMode fit) {
    PipelineParams p;
    p.resolution = dataset.resolution;
    p.norm_cost = dataset.norm_cost;
    p.norm_volume = dataset.norm_volume;
    p.vocab = dataset.vocab;
    p.inputs = inputs;
    p.fit = fit;
    return p;
}

double predict_cost(const CostModel& model, const std::filesystem::path& mesh_path,
                    const std::string& material, const PipelineParams& params) {
    TriangleMesh mesh = load_stl(mesh_path);
    // Surface-shell occupancy, matching what build_dataset feeds the model.
    VoxelGrid grid = voxelize_surface(mesh, params.resolution, params.fit);
    double volume = mesh_volume(mesh);
    auto onehot = encode_material(material, params.vocab);
    double vol_norm = normalize_value(volume, params.norm_volume);
    double y = model.forward_eval(voxel_tensor(grid), material_tensor(onehot), vol_norm,
                                  params.inputs);
    return denormalize_value(y, params.norm_cost);
}

std::pair<double, double> evaluate(const CostModel& model, const Dataset& test_set,
                                   InputCombo inputs) {
    if (test_set.examples.empty()) throw EmptyDataset("evaluate(): empty dataset");
    std::vector<double> pred, target;
    pred.reserve(test_set.examples.size());
    target.reserve(test_set.examples.size());
    for (const Example& ex : test_set.examples) {
        double y = model.forward_eval(voxel_tensor(ex.voxels), material_tensor(ex.material_vec),
                                      ex.volume_norm, inputs);
        pred.push_back(denormalize_value(y, test_set.norm_cost));
        target.push_back(denormalize_value(ex.cost_norm, test_set.norm_cost));
    }
    return {nn::metric_rmse(pred, target), nn::metric_mape(pred, target)};
}

namespace {

ordered_json norm_to_json(const NormalizationParams& p) {
    return ordered_json{{"kind", to_string(p.kind)}, {"x_min", p.x_min}, {"x_max", p.x_max}};
}

NormalizationParams norm_from_json(const ordered_json& j) {
    NormalizationParams p;
    p.kind = norm_kind_from_string(j.at("kind").get<std::string>());
    p.x_min = j.at("x_min").get<double>();
    p.x_max = j.at("x_max").get<double>();
    return p;
}

} // namespace

void save_model(const CostModel& model, const TrainConfig& config, const PipelineParams& params,
                const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    nn::NamedTensors named;
    const auto& names = model.parameter_names();
    const auto& tensors = model.parameters();
    named.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) named.emplace_back(names[i], tensors[i]);
    nn::save_checkpoint(named, dir / "checkpoint.nnck");

    const ModelSpec& spec = model.spec();
    ordered_json meta{
        {"spec",
         {{"voxel_resolution", spec.voxel_resolution},
          {"material_dim", spec.material_dim},
          {"conv_filters", spec.conv_filters},
          {"head_widths", spec.head_widths},
          {"alpha", spec.alpha},
          {"dropout_p", spec.dropout_p}}},
        {"train",
         {{"learning_rate", config.learning_rate},
          {"batch_size", config.batch_size},
          {"max_epochs", config.max_epochs},
          {"patience", config.patience},
          {"val_fraction", config.val_fraction},
          {"loss", nn::to_string(config.loss)},
          {"inputs", to_string(config.inputs)},
          {"seed", config.seed}}},
        {"pipeline",
         {{"resolution", params.resolution},
          {"norm_cost", norm_to_json(params.norm_cost)},
          {"norm_volume", norm_to_json(params.norm_volume)},
          {"vocab", params.vocab.labels()},
          {"inputs", to_string(params.inputs)},
          {"fit", to_string(params.fit)}}},
    };
    std::ofstream out(dir / "meta.json", std::ios::binary);
    if (!out) throw IoFailure("cannot open " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
    if (!out.flush()) throw IoFailure("write failed: " + (dir / "meta.json").string());
}

LoadedModel load_model(const std::filesystem::path& dir) {
    std::ifstream in(dir / "meta.json", std::ios::binary);
    if (!in) throw IoFailure("cannot open " + (dir / "meta.json").string());
    ordered_json meta;
    try {
        in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedToken("meta.json: " + std::string(e.what()));
    }

    try {
        const auto& js = meta.at("spec");
        ModelSpec spec;
        spec.voxel_resolution = js.at("voxel_resolution").get<std::uint32_t>();
        spec.material_dim = js.at("material_dim").get<std::size_t>();
        spec.conv_filters = js.at("conv_filters").get<std::vector<std::size_t>>();
        spec.head_widths = js.at("head_widths").get<std::vector<std::size_t>>();
        spec.alpha = js.at("alpha").get<double>();
        spec.dropout_p = js.at("dropout_p").get<double>();

        const auto& jt = meta.at("train");
        TrainConfig config;
        config.learning_rate = jt.at("learning_rate").get<double>();
        config.batch_size = jt.at("batch_size").get<std::size_t>();
        config.max_epochs = jt.at("max_epochs").get<std::size_t>();
        config.patience = jt.at("patience").get<std::size_t>();
        config.val_fraction = jt.at("val_fraction").get<double>();
        config.loss = nn::loss_kind_from_string(jt.at("loss").get<std::string>());
        config.inputs = input_combo_from_string(jt.at("inputs").get<std::string>());
        config.seed = jt.at("seed").get<std::uint64_t>();

        const auto& jp = meta.at("pipeline");
        PipelineParams params;
        params.resolution = jp.at("resolution").get<std::uint32_t>();
        params.norm_cost = norm_from_json(jp.at("norm_cost"));
        params.norm_volume = norm_from_json(jp.at("norm_volume"));
        params.vocab = MaterialVocab(jp.at("vocab").get<std::vector<std::string>>());
        params.inputs = input_combo_from_string(jp.at("inputs").get<std::string>());
        params.fit = fit_mode_from_string(jp.at("fit").get<std::string>());

        CostModel model(spec, 0);
        nn::NamedTensors loaded = nn::load_checkpoint(dir / "checkpoint.nnck");
        const auto& names = model.parameter_names();
        if (loaded.size() != names.size())
            throw ShapeMismatch("checkpoint holds " + std::to_string(loaded.size()) +
                                " tensors, model expects " + std::to_string(names.size()));
        auto& tensors = model.parameters();
        for (auto& [name, tensor] : loaded) {
            auto it = std::find(names.begin(), names.end(), name);
            if (it == names.end()) throw MalformedToken("unexpected tensor in checkpoint: " + name);
            std::size_t slot = static_cast<std::size_t>(it - names.begin());
            if (tensor.shape != tensors[slot].shape)
                throw ShapeMismatch("tensor " + name + " shape mismatch against model spec");
            tensors[slot] = std::move(tensor);
        }
        return LoadedModel{std::move(model), config, params};
    } catch (const nlohmann::json::exception& e) {
        throw MalformedToken("meta.json: " + std::string(e.what()));
    }
}

} // namespace cncost
