#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace cncost {

/// Width of the one-hot material input. Fixed so the encoding (and the model
/// built on top of it) never changes shape when the vocabulary grows.
inline constexpr std::size_t kMaterialSlots = 16;

/// Ordered list of up to kMaterialSlots distinct material labels. The list
/// order defines the one-hot slot of each label.
class MaterialVocab {
  public:
    MaterialVocab() = default;
    explicit MaterialVocab(std::vector<std::string> labels);

    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }

    /// Slot of `label`; throws UnknownMaterial when absent.
    std::size_t index_of(const std::string& label) const;
    bool contains(const std::string& label) const;

    /// Vocabulary of the unique materials in `labels`, ordered by first
    /// appearance.
    static MaterialVocab from_labels(const std::vector<std::string>& labels);

  private:
    std::vector<std::string> labels_;
};

/// One-hot vector, kMaterialSlots wide; slots at or past vocab.size() are 0.
std::array<double, kMaterialSlots> encode_material(const std::string& label,
                                                   const MaterialVocab& vocab);

} // namespace cncost
