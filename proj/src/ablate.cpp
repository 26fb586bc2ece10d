#include "cncost/ablate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cncost/errors.hpp"
#include "cncost/rng.hpp"

namespace cncost {

AblationReport ablate(const std::vector<PartRecord>& manifest, std::uint32_t resolution,
                      const std::vector<NormKind>& normalizations,
                      const std::vector<nn::LossKind>& losses,
                      const std::vector<InputCombo>& input_combos,
                      const std::vector<std::uint64_t>& seeds, const TrainConfig& base_config,
                      const ModelSpec& spec) {
    if (manifest.empty()) throw EmptyDataset("ablate(): empty manifest");

    std::vector<std::string> labels;
    labels.reserve(manifest.size());
    for (const auto& r : manifest) labels.push_back(r.material);
    MaterialVocab vocab = MaterialVocab::from_labels(labels);

    AblationReport report;
    for (NormKind norm : normalizations) {
        Dataset dataset = build_dataset(manifest, resolution, norm, norm, vocab);
        for (nn::LossKind loss_kind : losses) {
            for (InputCombo combo : input_combos) {
                for (std::uint64_t seed : seeds) {
                    AblationCell cell;
                    cell.normalization = norm;
                    cell.loss = loss_kind;
                    cell.inputs = combo;
                    cell.seed = seed;
                    std::string tag = "ablate-" + to_string(norm) + "-" +
                                      nn::to_string(loss_kind) + "-" + to_string(combo);
                    std::uint64_t cell_seed = derive_rng(seed, tag).next();
                    try {
                        auto [train_set, test_set] = split(dataset, 0.8, seed);
                        CostModel model(spec, cell_seed);
                        TrainConfig cfg = base_config;
                        cfg.loss = loss_kind;
                        cfg.inputs = combo;
                        cfg.seed = cell_seed;
                        TrainHistory history = train(model, train_set, cfg);
                        cell.epochs = history.train_loss.size();
                        cell.converged = !history.diverged;
                        if (history.diverged) {
                            cell.rmse = std::numeric_limits<double>::quiet_NaN();
                            cell.mape = std::numeric_limits<double>::quiet_NaN();
                        } else {
                            auto [rmse, mape] = evaluate(model, test_set, combo);
                            cell.rmse = rmse;
                            cell.mape = mape;
                        }
                    } catch (const Error& e) {
                        cell.rmse = std::numeric_limits<double>::quiet_NaN();
                        cell.mape = std::numeric_limits<double>::quiet_NaN();
                        cell.converged = false;
                        cell.error = e.what();
                    }
                    report.cells.push_back(cell);
                }
            }
        }
    }
    return report;
}

void write_ablation_csv(const AblationReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path.string());
    out << "normalization,loss,inputs,seed,rmse,mape,epochs,converged\n";
    char buf[64];
    for (const AblationCell& c : report.cells) {
        out << to_string(c.normalization) << ',' << nn::to_string(c.loss) << ','
            << to_string(c.inputs) << ',' << c.seed << ',';
        std::snprintf(buf, sizeof buf, "%.17g", c.rmse);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", c.mape);
        out << buf << ',' << c.epochs << ',' << (c.converged ? 1 : 0) << '\n';
    }
    if (!out.flush()) throw IoFailure("write failed: " + path.string());
}

} // namespace cncost
