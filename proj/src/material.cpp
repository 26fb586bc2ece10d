#include "cncost/material.hpp"

#include <algorithm>

#include "cncost/errors.hpp"

namespace cncost {

MaterialVocab::MaterialVocab(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() > kMaterialSlots)
        throw UnknownMaterial("material vocabulary is limited to " +
                              std::to_string(kMaterialSlots) + " labels");
    for (std::size_t i = 0; i < labels_.size(); ++i)
        for (std::size_t j = i + 1; j < labels_.size(); ++j)
            if (labels_[i] == labels_[j])
                throw UnknownMaterial("duplicate material label: " + labels_[i]);
}

std::size_t MaterialVocab::index_of(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw UnknownMaterial("unknown material: " + label);
    return static_cast<std::size_t>(it - labels_.begin());
}

bool MaterialVocab::contains(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

MaterialVocab MaterialVocab::from_labels(const std::vector<std::string>& labels) {
    std::vector<std::string> unique;
    for (const std::string& label : labels)
        if (std::find(unique.begin(), unique.end(), label) == unique.end())
            unique.push_back(label);
    return MaterialVocab(std::move(unique));
}

std::array<double, kMaterialSlots> encode_material(const std::string& label,
                                                   const MaterialVocab& vocab) {
    std::array<double, kMaterialSlots> onehot{};
    onehot[vocab.index_of(label)] = 1.0;
    return onehot;
}

} // namespace cncost
