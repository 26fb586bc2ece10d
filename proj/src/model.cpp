#include "cncost/model.hpp"

#include <algorithm>
#include <cstring>

#include "cncost/errors.hpp"

namespace cncost {

std::string to_string(InputCombo combo) {
    switch (combo) {
        case InputCombo::v: return "v";
        case InputCombo::vm: return "vm";
        case InputCombo::vmv: return "vmv";
        case InputCombo::mv: return "mv";
        case InputCombo::vv: return "vv";
    }
    throw MalformedToken("bad input combo value");
}

InputCombo input_combo_from_string(const std::string& s) {
    if (s == "v") return InputCombo::v;
    if (s == "vm") return InputCombo::vm;
    if (s == "vmv") return InputCombo::vmv;
    if (s == "mv") return InputCombo::mv;
    if (s == "vv") return InputCombo::vv;
    throw MalformedToken("unknown input combo: " + s);
}

std::string to_string(CamLayer layer) {
    switch (layer) {
        case CamLayer::conv1: return "conv1";
        case CamLayer::conv2: return "conv2";
        case CamLayer::pool1: return "pool1";
        case CamLayer::conv3: return "conv3";
        case CamLayer::conv4: return "conv4";
        case CamLayer::pool2: return "pool2";
        case CamLayer::conv5: return "conv5";
    }
    throw MalformedToken("bad cam layer value");
}

CamLayer cam_layer_from_string(const std::string& s) {
    if (s == "conv1") return CamLayer::conv1;
    if (s == "conv2") return CamLayer::conv2;
    if (s == "pool1") return CamLayer::pool1;
    if (s == "conv3") return CamLayer::conv3;
    if (s == "conv4") return CamLayer::conv4;
    if (s == "pool2") return CamLayer::pool2;
    if (s == "conv5") return CamLayer::conv5;
    throw InvalidLayer("unknown activation layer: " + s);
}

void validate_spec(const ModelSpec& spec) {
    if (spec.conv_filters.size() != 5)
        throw SpecInvalid("the voxel branch needs exactly 5 conv stages");
    for (std::size_t f : spec.conv_filters)
        if (f == 0) throw SpecInvalid("conv filter counts must be positive");
    if (spec.head_widths.empty() || spec.head_widths.back() != 1)
        throw SpecInvalid("the head must end in a single output");
    for (std::size_t wd : spec.head_widths)
        if (wd == 0) throw SpecInvalid("head widths must be positive");
    if (spec.material_dim == 0 || spec.material_dim > kMaterialSlots)
        throw SpecInvalid("material_dim must be in [1, 16]");
    if (!(spec.dropout_p >= 0.0 && spec.dropout_p < 1.0))
        throw SpecInvalid("dropout rate must be in [0, 1)");
    const std::uint32_t r = spec.voxel_resolution;
    // Chain: r -2 -2 /2 -2 -2 /2 -2; both halvings need even maps and the
    // final conv needs a >= 3 input, so r >= 24 and r = 0 (mod 4).
    if (r < 24 || r % 4 != 0)
        throw SpecInvalid("voxel resolution must be >= 24 and divisible by 4");
}

std::uint32_t cam_layer_side(const ModelSpec& spec, CamLayer layer) {
    const std::uint32_t r = spec.voxel_resolution;
    switch (layer) {
        case CamLayer::conv1: return r - 2;
        case CamLayer::conv2: return r - 4;
        case CamLayer::pool1: return (r - 4) / 2;
        case CamLayer::conv3: return (r - 4) / 2 - 2;
        case CamLayer::conv4: return (r - 4) / 2 - 4;
        case CamLayer::pool2: return ((r - 4) / 2 - 4) / 2;
        case CamLayer::conv5: return ((r - 4) / 2 - 4) / 2 - 2;
    }
    throw InvalidLayer("bad cam layer value");
}

namespace {

constexpr std::size_t kConvSlots = 5;   // conv1..conv5
constexpr std::size_t kMaterialSlot = 5;
constexpr std::size_t kVolumeSlot = 6;
constexpr std::size_t kHeadSlot0 = 7;

} // namespace

CostModel::CostModel(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    validate_spec(spec_);

    struct Entry {
        std::string name;
        std::vector<std::size_t> shape;
        std::size_t fan_in, fan_out;
    };
    std::vector<Entry> entries;

    std::size_t in_ch = 1;
    for (std::size_t i = 0; i < spec_.conv_filters.size(); ++i) {
        const std::size_t out_ch = spec_.conv_filters[i];
        entries.push_back(Entry{"conv" + std::to_string(i + 1),
                                {out_ch, in_ch, 3, 3, 3},
                                in_ch * 27,
                                out_ch * 27});
        in_ch = out_ch;
    }
    entries.push_back(Entry{"material",
                            {spec_.material_dim, spec_.material_dim},
                            spec_.material_dim,
                            spec_.material_dim});
    entries.push_back(Entry{"volume", {1, 1}, 1, 1});

    const std::uint32_t s5 = cam_layer_side(spec_, CamLayer::conv5);
    const std::size_t flat = spec_.conv_filters.back() * s5 * s5 * s5;
    std::size_t width = flat + spec_.material_dim + 1;
    for (std::size_t i = 0; i < spec_.head_widths.size(); ++i) {
        entries.push_back(Entry{"head" + std::to_string(i),
                                {spec_.head_widths[i], width},
                                width,
                                spec_.head_widths[i]});
        width = spec_.head_widths[i];
    }

    for (const Entry& e : entries) {
        SplitMix64 rng = derive_rng(seed, "init-" + e.name);
        names_.push_back(e.name + ".weight");
        params_.push_back(nn::xavier_normal_init(e.shape, e.fan_in, e.fan_out, rng));
        names_.push_back(e.name + ".bias");
        params_.push_back(nn::Tensor::zeros({e.shape[0]}));
    }
}

std::size_t CostModel::parameter_count() const {
    std::size_t n = 0;
    for (const nn::Tensor& p : params_) n += p.numel();
    return n;
}

double CostModel::forward(const nn::Tensor& voxel, const nn::Tensor& material,
                          double volume_norm, Mode mode, InputCombo combo, SplitMix64* rng,
                          Trace* trace) const {
    const std::uint32_t r = spec_.voxel_resolution;
    if (voxel.shape != std::vector<std::size_t>{1, r, r, r})
        throw ShapeMismatch("voxel input must be [1, R, R, R] at the spec resolution");
    if (material.numel() != spec_.material_dim)
        throw ShapeMismatch("material input width does not match the spec");
    const bool train = mode == Mode::train;
    if (train && rng == nullptr)
        throw PipelineError("train-mode forward needs a dropout RNG");

    Trace local;
    Trace& t = trace != nullptr ? *trace : local;
    t.train_mode = train;

    const bool use_voxel = combo != InputCombo::mv;
    const bool use_material = combo == InputCombo::vm || combo == InputCombo::vmv ||
                              combo == InputCombo::mv;
    const bool use_volume = combo == InputCombo::vmv || combo == InputCombo::mv ||
                            combo == InputCombo::vv;

    t.x0 = use_voxel ? voxel : nn::Tensor::zeros(voxel.shape);
    t.mat0 = use_material ? material : nn::Tensor::zeros(material.shape);
    t.vol0 = nn::Tensor({1}, {use_volume ? volume_norm : 0.0});

    const double alpha = spec_.alpha;
    t.z1 = nn::conv3d_forward(t.x0, weight(0), bias(0));
    t.a1 = nn::leaky_relu_forward(t.z1, alpha);
    t.z2 = nn::conv3d_forward(t.a1, weight(1), bias(1));
    t.a2 = nn::leaky_relu_forward(t.z2, alpha);
    {
        nn::MaxPool3dResult pool = nn::maxpool3d_forward(t.a2);
        t.p1 = std::move(pool.output);
        t.am1 = std::move(pool.argmax);
    }
    if (train) {
        nn::DropoutResult drop = nn::dropout_forward(t.p1, spec_.dropout_p, *rng);
        t.d1 = std::move(drop.output);
        t.m1 = std::move(drop.mask);
    } else {
        t.d1 = t.p1;
    }
    t.z3 = nn::conv3d_forward(t.d1, weight(2), bias(2));
    t.a3 = nn::leaky_relu_forward(t.z3, alpha);
    t.z4 = nn::conv3d_forward(t.a3, weight(3), bias(3));
    t.a4 = nn::leaky_relu_forward(t.z4, alpha);
    {
        nn::MaxPool3dResult pool = nn::maxpool3d_forward(t.a4);
        t.p2 = std::move(pool.output);
        t.am2 = std::move(pool.argmax);
    }
    if (train) {
        nn::DropoutResult drop = nn::dropout_forward(t.p2, spec_.dropout_p, *rng);
        t.d2 = std::move(drop.output);
        t.m2 = std::move(drop.mask);
    } else {
        t.d2 = t.p2;
    }
    t.z5 = nn::conv3d_forward(t.d2, weight(4), bias(4));
    t.a5 = nn::leaky_relu_forward(t.z5, alpha);

    // Branch 2/3 are single linear dense layers (no activation).
    t.mb = nn::dense_forward(t.mat0, weight(kMaterialSlot), bias(kMaterialSlot));
    t.vb = nn::dense_forward(t.vol0, weight(kVolumeSlot), bias(kVolumeSlot));

    t.cat = nn::Tensor::zeros({t.a5.numel() + t.mb.numel() + t.vb.numel()});
    std::copy(t.a5.data.begin(), t.a5.data.end(), t.cat.data.begin());
    std::copy(t.mb.data.begin(), t.mb.data.end(), t.cat.data.begin() + t.a5.numel());
    std::copy(t.vb.data.begin(), t.vb.data.end(),
              t.cat.data.begin() + t.a5.numel() + t.mb.numel());

    const std::size_t n_head = spec_.head_widths.size();
    t.zh.resize(n_head);
    t.h.resize(n_head);
    const nn::Tensor* cur = &t.cat;
    for (std::size_t i = 0; i < n_head; ++i) {
        t.zh[i] = nn::dense_forward(*cur, weight(kHeadSlot0 + i), bias(kHeadSlot0 + i));
        t.h[i] = (i + 1 < n_head) ? nn::leaky_relu_forward(t.zh[i], alpha) : t.zh[i];
        cur = &t.h[i];
    }
    t.y = t.h.back().data[0];
    return t.y;
}

double CostModel::forward_eval(const nn::Tensor& voxel, const nn::Tensor& material,
                               double volume_norm, InputCombo combo) const {
    return forward(voxel, material, volume_norm, Mode::eval, combo, nullptr, nullptr);
}

namespace {

// Gradient flowing back through the head into the concatenation.
nn::Tensor head_backward(const CostModel::Trace& t, double dldy, double alpha,
                         const std::vector<nn::Tensor>& params, std::size_t head_slot0,
                         std::vector<nn::Tensor>* grads) {
    const std::size_t n_head = t.zh.size();
    nn::Tensor g({1}, {dldy});
    for (std::size_t idx = n_head; idx-- > 0;) {
        if (idx + 1 < n_head) g = nn::leaky_relu_backward(g, t.zh[idx], alpha);
        const nn::Tensor& input = idx == 0 ? t.cat : t.h[idx - 1];
        const nn::Tensor& w = params[2 * (head_slot0 + idx)];
        if (grads != nullptr) {
            nn::DenseGrads dg = nn::dense_backward(g, input, w);
            (*grads)[2 * (head_slot0 + idx)] = std::move(dg.weight);
            (*grads)[2 * (head_slot0 + idx) + 1] = std::move(dg.bias);
            g = std::move(dg.input);
        } else {
            g = nn::dense_backward_input(g, w);
        }
    }
    return g; // d(loss)/d(cat)
}

nn::Tensor slice_tensor(const nn::Tensor& src, std::size_t offset,
                        std::vector<std::size_t> shape) {
    nn::Tensor out = nn::Tensor::zeros(std::move(shape));
    std::copy(src.data.begin() + static_cast<std::ptrdiff_t>(offset),
              src.data.begin() + static_cast<std::ptrdiff_t>(offset + out.numel()),
              out.data.begin());
    return out;
}

} // namespace

std::vector<nn::Tensor> CostModel::backward(const Trace& trace, double dldy) const {
    const double alpha = spec_.alpha;
    std::vector<nn::Tensor> grads(params_.size());

    nn::Tensor g_cat = head_backward(trace, dldy, alpha, params_, kHeadSlot0, &grads);

    const std::size_t flat = trace.a5.numel();
    nn::Tensor g_a5 = slice_tensor(g_cat, 0, trace.a5.shape);
    nn::Tensor g_mb = slice_tensor(g_cat, flat, {trace.mb.numel()});
    nn::Tensor g_vb = slice_tensor(g_cat, flat + trace.mb.numel(), {trace.vb.numel()});

    {
        nn::DenseGrads dg = nn::dense_backward(g_mb, trace.mat0, weight(kMaterialSlot));
        grads[2 * kMaterialSlot] = std::move(dg.weight);
        grads[2 * kMaterialSlot + 1] = std::move(dg.bias);
    }
    {
        nn::DenseGrads dg = nn::dense_backward(g_vb, trace.vol0, weight(kVolumeSlot));
        grads[2 * kVolumeSlot] = std::move(dg.weight);
        grads[2 * kVolumeSlot + 1] = std::move(dg.bias);
    }

    nn::Tensor g = nn::leaky_relu_backward(g_a5, trace.z5, alpha);
    {
        nn::Conv3dGrads cg = nn::conv3d_backward(g, trace.d2, weight(4));
        grads[8] = std::move(cg.weight);
        grads[9] = std::move(cg.bias);
        g = std::move(cg.input);
    }
    if (trace.train_mode) g = nn::dropout_backward(g, trace.m2, spec_.dropout_p);
    g = nn::maxpool3d_backward(g, trace.am2, trace.a4.shape);
    g = nn::leaky_relu_backward(g, trace.z4, alpha);
    {
        nn::Conv3dGrads cg = nn::conv3d_backward(g, trace.a3, weight(3));
        grads[6] = std::move(cg.weight);
        grads[7] = std::move(cg.bias);
        g = std::move(cg.input);
    }
    g = nn::leaky_relu_backward(g, trace.z3, alpha);
    {
        nn::Conv3dGrads cg = nn::conv3d_backward(g, trace.d1, weight(2));
        grads[4] = std::move(cg.weight);
        grads[5] = std::move(cg.bias);
        g = std::move(cg.input);
    }
    if (trace.train_mode) g = nn::dropout_backward(g, trace.m1, spec_.dropout_p);
    g = nn::maxpool3d_backward(g, trace.am1, trace.a2.shape);
    g = nn::leaky_relu_backward(g, trace.z2, alpha);
    {
        nn::Conv3dGrads cg = nn::conv3d_backward(g, trace.a1, weight(1));
        grads[2] = std::move(cg.weight);
        grads[3] = std::move(cg.bias);
        g = std::move(cg.input);
    }
    g = nn::leaky_relu_backward(g, trace.z1, alpha);
    {
        nn::Conv3dGrads cg = nn::conv3d_backward(g, trace.x0, weight(0));
        grads[0] = std::move(cg.weight);
        grads[1] = std::move(cg.bias);
    }
    return grads;
}

CostModel::ActivationGrad CostModel::activation_gradient(const Trace& trace,
                                                         CamLayer layer) const {
    const double alpha = spec_.alpha;
    nn::Tensor g_cat = head_backward(trace, 1.0, alpha, params_, kHeadSlot0, nullptr);
    nn::Tensor g = slice_tensor(g_cat, 0, trace.a5.shape); // dy/d(a5)

    ActivationGrad out{nullptr, {}};
    if (layer == CamLayer::conv5) {
        out.activation = &trace.a5;
        out.gradient = std::move(g);
        return out;
    }
    g = nn::leaky_relu_backward(g, trace.z5, alpha);
    g = nn::conv3d_backward_input(g, weight(4));
    if (trace.train_mode) g = nn::dropout_backward(g, trace.m2, spec_.dropout_p);
    if (layer == CamLayer::pool2) {
        out.activation = &trace.p2;
        out.gradient = std::move(g);
        return out;
    }
    g = nn::maxpool3d_backward(g, trace.am2, trace.a4.shape);
    if (layer == CamLayer::conv4) {
        out.activation = &trace.a4;
        out.gradient = std::move(g);
        return out;
    }
    g = nn::leaky_relu_backward(g, trace.z4, alpha);
    g = nn::conv3d_backward_input(g, weight(3));
    if (layer == CamLayer::conv3) {
        out.activation = &trace.a3;
        out.gradient = std::move(g);
        return out;
    }
    g = nn::leaky_relu_backward(g, trace.z3, alpha);
    g = nn::conv3d_backward_input(g, weight(2));
    if (trace.train_mode) g = nn::dropout_backward(g, trace.m1, spec_.dropout_p);
    if (layer == CamLayer::pool1) {
        out.activation = &trace.p1;
        out.gradient = std::move(g);
        return out;
    }
    g = nn::maxpool3d_backward(g, trace.am1, trace.a2.shape);
    if (layer == CamLayer::conv2) {
        out.activation = &trace.a2;
        out.gradient = std::move(g);
        return out;
    }
    g = nn::leaky_relu_backward(g, trace.z2, alpha);
    g = nn::conv3d_backward_input(g, weight(1));
    out.activation = &trace.a1; // conv1
    out.gradient = std::move(g);
    return out;
}

nn::Tensor voxel_tensor(const VoxelGrid& grid) {
    const std::size_t r = grid.resolution;
    nn::Tensor t = nn::Tensor::zeros({1, r, r, r});
    for (std::size_t n = 0; n < grid.occupancy.size(); ++n)
        t.data[n] = grid.occupancy[n] ? 1.0 : 0.0;
    return t;
}

nn::Tensor material_tensor(const std::array<double, kMaterialSlots>& onehot) {
    return nn::Tensor({kMaterialSlots}, std::vector<double>(onehot.begin(), onehot.end()));
}

} // namespace cncost
