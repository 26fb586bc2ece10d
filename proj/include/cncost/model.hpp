#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cncost/material.hpp"
#include "cncost/nn.hpp"
#include "cncost/voxelize.hpp"

namespace cncost {

/// Which input branches carry data; disabled branches are fed zeros so the
/// architecture (and parameter count) never changes across combinations.
enum class InputCombo {
    v,   // voxel only
    vm,  // voxel + material
    vmv, // voxel + material + volume
    mv,  // material + volume
    vv,  // voxel + volume
};
std::string to_string(InputCombo combo);
InputCombo input_combo_from_string(const std::string& s);

/// Spatial layers of the voxel branch selectable for activation mapping.
enum class CamLayer { conv1, conv2, pool1, conv3, conv4, pool2, conv5 };
std::string to_string(CamLayer layer);
CamLayer cam_layer_from_string(const std::string& s);

struct ModelSpec {
    std::uint32_t voxel_resolution = 32;
    std::size_t material_dim = kMaterialSlots;
    /// conv1, conv2, [pool, dropout], conv3, conv4, [pool, dropout], conv5.
    std::vector<std::size_t> conv_filters = {16, 16, 32, 32, 64};
    std::vector<std::size_t> head_widths = {2000, 300, 150, 20, 16, 1};
    double alpha = 0.1;
    double dropout_p = 0.3;
};

/// Throws SpecInvalid unless the conv stack fits: exactly 5 conv stages,
/// resolution >= 24 and divisible by 4 (the two stride-2 pools need even
/// maps), final head width 1.
void validate_spec(const ModelSpec& spec);

/// Spatial side length of each voxel-branch stage output for resolution r.
std::uint32_t cam_layer_side(const ModelSpec& spec, CamLayer layer);

/// The three-branch regression network: voxel conv stack flattened, one
/// linear dense on the material one-hot, one linear dense on the volume
/// scalar, concatenated into a LeakyReLU dense head with a linear output.
class CostModel {
  public:
    enum class Mode { train, eval };

    /// Per-call activation record; backward needs one from a cached forward.
    struct Trace {
        nn::Tensor x0;                           // voxel input, post combo mask
        nn::Tensor z1, a1, z2, a2, p1, d1;       // conv1/conv2/pool1/drop1
        nn::Tensor z3, a3, z4, a4, p2, d2, z5, a5; // conv3/conv4/pool2/drop2/conv5
        std::vector<std::size_t> am1, am2;       // pool argmax routing
        std::vector<std::uint8_t> m1, m2;        // dropout masks (train mode)
        bool train_mode = false;
        nn::Tensor mat0, vol0, mb, vb;           // branch 2/3 inputs and outputs
        nn::Tensor cat;
        std::vector<nn::Tensor> zh;              // head pre-activations
        std::vector<nn::Tensor> h;               // head post-activations
        double y = 0.0;
    };

    CostModel(ModelSpec spec, std::uint64_t seed);

    const ModelSpec& spec() const { return spec_; }
    std::size_t parameter_count() const;

    /// Stable name order: conv1..conv5, material, volume, head0..head5,
    /// each as <name>.weight then <name>.bias.
    const std::vector<std::string>& parameter_names() const { return names_; }
    std::vector<nn::Tensor>& parameters() { return params_; }
    const std::vector<nn::Tensor>& parameters() const { return params_; }

    /// Single-example forward. Train mode draws dropout masks from `rng`
    /// (required); eval mode ignores it. Returns the normalized-cost output
    /// and fills `trace` when given.
    double forward(const nn::Tensor& voxel, const nn::Tensor& material, double volume_norm,
                   Mode mode, InputCombo combo, SplitMix64* rng, Trace* trace) const;
    double forward_eval(const nn::Tensor& voxel, const nn::Tensor& material,
                        double volume_norm, InputCombo combo = InputCombo::vmv) const;

    /// d(loss)/d(parameters) for d(loss)/dy = dldy, aligned with
    /// parameter_names(). The trace must come from this model's forward.
    std::vector<nn::Tensor> backward(const Trace& trace, double dldy) const;

    /// dy/d(activation at `layer`) plus the activation itself, for
    /// activation-map work; parameters receive no gradients on this path.
    struct ActivationGrad {
        const nn::Tensor* activation;
        nn::Tensor gradient;
    };
    ActivationGrad activation_gradient(const Trace& trace, CamLayer layer) const;

  private:
    ModelSpec spec_;
    std::vector<std::string> names_;
    std::vector<nn::Tensor> params_;

    const nn::Tensor& weight(std::size_t slot) const { return params_[2 * slot]; }
    const nn::Tensor& bias(std::size_t slot) const { return params_[2 * slot + 1]; }
};

/// Builds a voxel-branch input tensor [1, R, R, R] from an occupancy grid.
nn::Tensor voxel_tensor(const VoxelGrid& grid);
/// Material one-hot as a [16] tensor.
nn::Tensor material_tensor(const std::array<double, kMaterialSlots>& onehot);

} // namespace cncost
