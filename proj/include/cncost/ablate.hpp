#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cncost/dataset.hpp"
#include "cncost/train.hpp"

namespace cncost {

/// One (normalization, loss, inputs, seed) trial of the factorial study.
struct AblationCell {
    NormKind normalization = NormKind::minmax;
    nn::LossKind loss = nn::LossKind::mse;
    InputCombo inputs = InputCombo::vmv;
    std::uint64_t seed = 0;
    double rmse = 0.0; // NaN when the cell failed
    double mape = 0.0; // NaN when the cell failed
    std::size_t epochs = 0;
    bool converged = false; // training finished without diverging
    std::string error;      // non-empty when the cell threw
};

struct AblationReport {
    std::vector<AblationCell> cells;
};

/// Trains one model per grid cell and evaluates it on a held-out split.
/// The dataset is rebuilt per normalization kind (it changes the targets);
/// the train/test partition depends only on the user seed, so every cell of
/// one seed sees the same parts. Cells that throw or diverge are kept in the
/// report with NaN metrics rather than aborting the sweep.
AblationReport ablate(const std::vector<PartRecord>& manifest, std::uint32_t resolution,
                      const std::vector<NormKind>& normalizations,
                      const std::vector<nn::LossKind>& losses,
                      const std::vector<InputCombo>& input_combos,
                      const std::vector<std::uint64_t>& seeds, const TrainConfig& base_config,
                      const ModelSpec& spec);

/// Header: normalization,loss,inputs,seed,rmse,mape,epochs,converged
void write_ablation_csv(const AblationReport& report, const std::filesystem::path& path);

} // namespace cncost
