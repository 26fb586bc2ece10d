#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "cncost/dataset.hpp"
#include "cncost/model.hpp"
#include "cncost/nn.hpp"

namespace cncost {

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 16;
    std::size_t max_epochs = 1000;
    std::size_t patience = 50;    // early stop: epochs without val improvement
    double val_fraction = 0.1;    // held out from the train set
    nn::LossKind loss = nn::LossKind::mae;
    InputCombo inputs = InputCombo::vmv;
    std::uint64_t seed = 0;
};

struct TrainHistory {
    std::vector<double> train_loss; // one entry per epoch actually run
    std::vector<double> val_loss;
    std::size_t best_epoch = 0;     // index of the restored epoch
    bool diverged = false;          // NaN/Inf seen; training aborted there
    /// Measured wall time. Deliberately excluded from serialized artifacts
    /// so identical (config, seed) runs stay byte-identical on disk.
    double wall_seconds = 0.0;
};

/// Mini-batch Adam over seeded epoch shuffles, early stopping on a held-out
/// validation slice with best-epoch weight restoration. Deterministic in
/// (config, data): histories and final parameters are exactly reproducible.
TrainHistory train(CostModel& model, const Dataset& train_set, const TrainConfig& config);

/// Epochs run / best val loss live in the history; CSV excludes wall time.
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

/// Everything needed to run the preprocessing pipeline at predict time.
struct PipelineParams {
    std::uint32_t resolution = 32;
    NormalizationParams norm_cost;
    NormalizationParams norm_volume;
    MaterialVocab vocab;
    InputCombo inputs = InputCombo::vmv;
    FitMode fit = FitMode::isotropic;
};

PipelineParams pipeline_params_of(const Dataset& dataset, InputCombo inputs,
                                  FitMode fit = FitMode::isotropic);

/// Full pipeline: load mesh, voxelize, mesh volume, normalize, forward in
/// eval mode, denormalize the output back to currency units.
double predict_cost(const CostModel& model, const std::filesystem::path& mesh_path,
                    const std::string& material, const PipelineParams& params);

/// Denormalized (RMSE, MAPE) of the model on a prepared dataset.
std::pair<double, double> evaluate(const CostModel& model, const Dataset& test_set,
                                   InputCombo inputs);

/// Model directory: checkpoint.nnck (parameters) + meta.json (spec, train
/// config, normalization params, vocab).
void save_model(const CostModel& model, const TrainConfig& config,
                const PipelineParams& params, const std::filesystem::path& dir);

struct LoadedModel {
    CostModel model;
    TrainConfig config;
    PipelineParams params;
};
/// Rebuilds the model from meta.json and loads the checkpoint, validating
/// every tensor name and shape against the spec.
LoadedModel load_model(const std::filesystem::path& dir);

} // namespace cncost
