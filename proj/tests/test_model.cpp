#include <doctest.h>

#include "cncost/errors.hpp"
#include "cncost/model.hpp"
#include "cncost/nn.hpp"
#include "cncost/rng.hpp"
#include "cncost/voxelize.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

using namespace cncost;

namespace {

nn::Tensor random_tensor(std::vector<std::size_t> shape, SplitMix64& rng) {
    nn::Tensor t = nn::Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
    return t;
}

// A small but spec-conformant architecture so full-network numerics stay cheap.
ModelSpec tiny_spec() {
    ModelSpec s;
    s.voxel_resolution = 24; // chain: 24 -> 22 -> 20 -> 10 -> 8 -> 6 -> 3 -> 1
    s.material_dim = 2;
    s.conv_filters = {1, 1, 1, 1, 3};
    s.head_widths = {4, 1};
    s.dropout_p = 0.0;
    return s;
}

struct TinyInputs {
    nn::Tensor voxel;
    nn::Tensor material;
    double volume = 0.0;
};

TinyInputs tiny_inputs(std::uint64_t seed) {
    SplitMix64 rng(seed);
    TinyInputs in;
    // Continuous voxel values keep conv outputs generic, so pooling has no
    // tied candidates and finite differences stay well behaved.
    in.voxel = random_tensor({1, 24, 24, 24}, rng);
    in.material = random_tensor({2}, rng);
    in.volume = rng.uniform(0.1, 0.9);
    return in;
}

bool tensors_equal(const nn::Tensor& a, const nn::Tensor& b) {
    return a.shape == b.shape && a.data == b.data;
}

} // namespace

TEST_CASE("parameter count matches an independently summed layer inventory") {
    // Conv stages (3x3x3 kernels): out*in*27 + out.
    const std::size_t conv = (16 * 1 * 27 + 16) + (16 * 16 * 27 + 16) + (32 * 16 * 27 + 32) +
                             (32 * 32 * 27 + 32) + (64 * 32 * 27 + 64);
    // Metadata branches: one 16x16 linear map and one 1x1 linear map.
    const std::size_t material = 16 * 16 + 16;
    const std::size_t volume = 1 * 1 + 1;
    // Flattened voxel features at 32^3 input: 64 channels on a 3^3 map.
    const std::size_t cat = 64 * 3 * 3 * 3 + 16 + 1;
    const std::size_t head = (2000 * cat + 2000) + (300 * 2000 + 300) + (150 * 300 + 150) +
                             (20 * 150 + 20) + (16 * 20 + 16) + (1 * 16 + 1);
    const std::size_t expected = conv + material + volume + head;
    CHECK(expected == 4245369u);

    CostModel model{ModelSpec{}, 7};
    CHECK(model.parameter_count() == 4245369u);

    std::size_t total = 0;
    for (const nn::Tensor& p : model.parameters()) total += p.numel();
    CHECK(total == model.parameter_count());
}

TEST_CASE("parameter names and shapes follow the declared layer order") {
    CostModel model{ModelSpec{}, 3};
    const std::vector<std::string> names = model.parameter_names();
    const std::vector<std::string> expected_names = {
        "conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias", "conv3.weight",
        "conv3.bias",   "conv4.weight", "conv4.bias", "conv5.weight", "conv5.bias",
        "material.weight", "material.bias", "volume.weight", "volume.bias",
        "head0.weight", "head0.bias", "head1.weight", "head1.bias", "head2.weight",
        "head2.bias",   "head3.weight", "head3.bias", "head4.weight", "head4.bias",
        "head5.weight", "head5.bias"};
    CHECK(names == expected_names);
    REQUIRE(model.parameters().size() == names.size());

    using Shape = std::vector<std::size_t>;
    const std::vector<Shape> expected_shapes = {
        {16, 1, 3, 3, 3},  {16},   {16, 16, 3, 3, 3}, {16},  {32, 16, 3, 3, 3}, {32},
        {32, 32, 3, 3, 3}, {32},   {64, 32, 3, 3, 3}, {64},  {16, 16},          {16},
        {1, 1},            {1},    {2000, 1745},      {2000}, {300, 2000},      {300},
        {150, 300},        {150},  {20, 150},         {20},   {16, 20},         {16},
        {1, 16},           {1}};
    for (std::size_t i = 0; i < expected_shapes.size(); ++i)
        CHECK(model.parameters()[i].shape == expected_shapes[i]);
}

TEST_CASE("validate_spec rejects malformed architectures") {
    CHECK_NOTHROW(validate_spec(ModelSpec{}));
    CHECK_NOTHROW(validate_spec(tiny_spec()));

    ModelSpec s = tiny_spec();
    s.voxel_resolution = 23; // below the minimum and not a multiple of 4
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);
    s.voxel_resolution = 26; // even, but both halvings need divisibility by 4
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);
    s.voxel_resolution = 20; // multiple of 4 but the final conv would underflow
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);

    s = tiny_spec();
    s.conv_filters = {8, 8, 8, 8};
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);
    s.conv_filters = {8, 8, 8, 8, 8, 8};
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);
    s.conv_filters = {8, 0, 8, 8, 8};
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);

    s = tiny_spec();
    s.head_widths = {4, 2};
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);
    s.head_widths = {};
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);
    s.head_widths = {0, 1};
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);

    s = tiny_spec();
    s.material_dim = 0;
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);
    s.material_dim = 17;
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);

    s = tiny_spec();
    s.dropout_p = 1.0;
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);
    s.dropout_p = -0.1;
    CHECK_THROWS_AS(validate_spec(s), SpecInvalid);
}

TEST_CASE("cam_layer_side reproduces the spatial dimension chain") {
    const ModelSpec s32{}; // resolution 32
    CHECK(cam_layer_side(s32, CamLayer::conv1) == 30);
    CHECK(cam_layer_side(s32, CamLayer::conv2) == 28);
    CHECK(cam_layer_side(s32, CamLayer::pool1) == 14);
    CHECK(cam_layer_side(s32, CamLayer::conv3) == 12);
    CHECK(cam_layer_side(s32, CamLayer::conv4) == 10);
    CHECK(cam_layer_side(s32, CamLayer::pool2) == 5);
    CHECK(cam_layer_side(s32, CamLayer::conv5) == 3);

    const ModelSpec s24 = tiny_spec();
    CHECK(cam_layer_side(s24, CamLayer::conv1) == 22);
    CHECK(cam_layer_side(s24, CamLayer::conv2) == 20);
    CHECK(cam_layer_side(s24, CamLayer::pool1) == 10);
    CHECK(cam_layer_side(s24, CamLayer::conv3) == 8);
    CHECK(cam_layer_side(s24, CamLayer::conv4) == 6);
    CHECK(cam_layer_side(s24, CamLayer::pool2) == 3);
    CHECK(cam_layer_side(s24, CamLayer::conv5) == 1);
}

TEST_CASE("enum string forms round-trip and reject unknown tokens") {
    for (InputCombo c : {InputCombo::v, InputCombo::vm, InputCombo::vmv, InputCombo::mv,
                         InputCombo::vv})
        CHECK(input_combo_from_string(to_string(c)) == c);
    CHECK_THROWS_AS(input_combo_from_string("vmx"), MalformedToken);

    for (CamLayer l : {CamLayer::conv1, CamLayer::conv2, CamLayer::pool1, CamLayer::conv3,
                       CamLayer::conv4, CamLayer::pool2, CamLayer::conv5})
        CHECK(cam_layer_from_string(to_string(l)) == l);
    CHECK_THROWS_AS(cam_layer_from_string("pool3"), InvalidLayer);
}

TEST_CASE("initialization is seed-deterministic") {
    const ModelSpec spec = tiny_spec();
    CostModel a{spec, 11};
    CostModel b{spec, 11};
    CostModel c{spec, 12};

    REQUIRE(a.parameters().size() == b.parameters().size());
    for (std::size_t i = 0; i < a.parameters().size(); ++i)
        CHECK(tensors_equal(a.parameters()[i], b.parameters()[i]));

    bool any_differs = false;
    for (std::size_t i = 0; i < a.parameters().size(); ++i)
        if (!tensors_equal(a.parameters()[i], c.parameters()[i])) any_differs = true;
    CHECK(any_differs);

    const TinyInputs in = tiny_inputs(5);
    const double ya = a.forward_eval(in.voxel, in.material, in.volume, InputCombo::vmv);
    const double yb = b.forward_eval(in.voxel, in.material, in.volume, InputCombo::vmv);
    const double yc = c.forward_eval(in.voxel, in.material, in.volume, InputCombo::vmv);
    CHECK(ya == yb);
    CHECK(ya != yc);
    CHECK(std::isfinite(ya));
}

TEST_CASE("input combos feed zeros to every disabled branch") {
    const ModelSpec spec = tiny_spec();
    CostModel model{spec, 21};
    const TinyInputs in = tiny_inputs(6);
    const nn::Tensor zero_voxel = nn::Tensor::zeros(in.voxel.shape);
    const nn::Tensor zero_material = nn::Tensor::zeros(in.material.shape);

    auto eval = [&](const nn::Tensor& vox, const nn::Tensor& mat, double vol, InputCombo c) {
        return model.forward_eval(vox, mat, vol, c);
    };

    // Each combo must agree exactly with the all-inputs pass that zeroes the
    // disabled branches by hand.
    CHECK(eval(in.voxel, in.material, in.volume, InputCombo::v) ==
          eval(in.voxel, zero_material, 0.0, InputCombo::vmv));
    CHECK(eval(in.voxel, in.material, in.volume, InputCombo::vm) ==
          eval(in.voxel, in.material, 0.0, InputCombo::vmv));
    CHECK(eval(in.voxel, in.material, in.volume, InputCombo::vv) ==
          eval(in.voxel, zero_material, in.volume, InputCombo::vmv));
    CHECK(eval(in.voxel, in.material, in.volume, InputCombo::mv) ==
          eval(zero_voxel, in.material, in.volume, InputCombo::vmv));

    // Disabled inputs are ignored entirely...
    const TinyInputs other = tiny_inputs(7);
    CHECK(eval(in.voxel, in.material, 0.123, InputCombo::v) ==
          eval(in.voxel, other.material, 0.987, InputCombo::v));
    CHECK(eval(in.voxel, in.material, in.volume, InputCombo::mv) ==
          eval(other.voxel, in.material, in.volume, InputCombo::mv));

    // ...while enabled inputs still matter.
    CHECK(eval(in.voxel, in.material, in.volume, InputCombo::vmv) !=
          eval(in.voxel, other.material, in.volume, InputCombo::vmv));
    CHECK(eval(in.voxel, in.material, in.volume, InputCombo::vmv) !=
          eval(in.voxel, in.material, other.volume, InputCombo::vmv));
    CHECK(eval(in.voxel, in.material, in.volume, InputCombo::vmv) !=
          eval(other.voxel, in.material, in.volume, InputCombo::vmv));
}

TEST_CASE("the trace records the gated inputs and intermediate shapes") {
    const ModelSpec spec = tiny_spec();
    CostModel model{spec, 31};
    const TinyInputs in = tiny_inputs(8);

    CostModel::Trace trace;
    model.forward(in.voxel, in.material, in.volume, CostModel::Mode::eval, InputCombo::mv,
                  nullptr, &trace);
    CHECK(trace.x0.shape == in.voxel.shape);
    for (double v : trace.x0.data) CHECK(v == 0.0);
    CHECK(trace.mat0.data == in.material.data);
    CHECK(trace.vol0.data == std::vector<double>{in.volume});
    CHECK_FALSE(trace.train_mode);

    model.forward(in.voxel, in.material, in.volume, CostModel::Mode::eval, InputCombo::v,
                  nullptr, &trace);
    CHECK(trace.x0.data == in.voxel.data);
    for (double v : trace.mat0.data) CHECK(v == 0.0);
    CHECK(trace.vol0.data == std::vector<double>{0.0});

    using Shape = std::vector<std::size_t>;
    CHECK(trace.z1.shape == Shape{1, 22, 22, 22});
    CHECK(trace.a2.shape == Shape{1, 20, 20, 20});
    CHECK(trace.p1.shape == Shape{1, 10, 10, 10});
    CHECK(trace.a3.shape == Shape{1, 8, 8, 8});
    CHECK(trace.a4.shape == Shape{1, 6, 6, 6});
    CHECK(trace.p2.shape == Shape{1, 3, 3, 3});
    CHECK(trace.a5.shape == Shape{3, 1, 1, 1});
    CHECK(trace.cat.shape == Shape{3 + 2 + 1});
    REQUIRE(trace.zh.size() == 2);
    CHECK(trace.zh[0].shape == Shape{4});
    CHECK(trace.h[1].shape == Shape{1});
    CHECK(trace.y == trace.h[1].data[0]);

    // The concatenation is [flattened voxel features | material | volume].
    for (std::size_t i = 0; i < trace.a5.numel(); ++i)
        CHECK(trace.cat.data[i] == trace.a5.data[i]);
    for (std::size_t i = 0; i < trace.mb.numel(); ++i)
        CHECK(trace.cat.data[trace.a5.numel() + i] == trace.mb.data[i]);
    CHECK(trace.cat.data.back() == trace.vb.data[0]);
}

TEST_CASE("forward_eval matches an eval-mode forward pass and is repeatable") {
    const ModelSpec spec = tiny_spec();
    CostModel model{spec, 41};
    const TinyInputs in = tiny_inputs(9);

    const double y1 = model.forward_eval(in.voxel, in.material, in.volume, InputCombo::vmv);
    const double y2 = model.forward(in.voxel, in.material, in.volume, CostModel::Mode::eval,
                                    InputCombo::vmv, nullptr, nullptr);
    const double y3 = model.forward_eval(in.voxel, in.material, in.volume, InputCombo::vmv);
    CHECK(y1 == y2);
    CHECK(y1 == y3);
}

TEST_CASE("train mode requires an RNG and matches eval when dropout is off") {
    ModelSpec spec = tiny_spec(); // dropout_p == 0
    CostModel model{spec, 51};
    const TinyInputs in = tiny_inputs(10);

    CHECK_THROWS_AS(model.forward(in.voxel, in.material, in.volume, CostModel::Mode::train,
                                  InputCombo::vmv, nullptr, nullptr),
                    PipelineError);

    SplitMix64 rng = derive_rng(51, "dropout", 0);
    const double y_train = model.forward(in.voxel, in.material, in.volume,
                                         CostModel::Mode::train, InputCombo::vmv, &rng, nullptr);
    const double y_eval = model.forward_eval(in.voxel, in.material, in.volume, InputCombo::vmv);
    CHECK(y_train == y_eval); // p = 0 keeps every unit at unit scale

    // With dropout active, a train pass almost surely deviates from eval; the
    // pooled maps have 1000 + 27 units, so all-kept masks are vanishingly rare.
    spec.dropout_p = 0.4;
    CostModel dropping{spec, 51};
    const double base = dropping.forward_eval(in.voxel, in.material, in.volume, InputCombo::vmv);
    bool deviated = false;
    for (std::uint64_t attempt = 0; attempt < 3 && !deviated; ++attempt) {
        SplitMix64 r2 = derive_rng(51, "dropout", attempt);
        const double y = dropping.forward(in.voxel, in.material, in.volume,
                                          CostModel::Mode::train, InputCombo::vmv, &r2, nullptr);
        deviated = y != base;
    }
    CHECK(deviated);
}

TEST_CASE("forward rejects inputs whose shapes disagree with the spec") {
    const ModelSpec spec = tiny_spec();
    CostModel model{spec, 61};
    const TinyInputs in = tiny_inputs(11);

    const nn::Tensor wrong_res = nn::Tensor::zeros({1, 28, 28, 28});
    CHECK_THROWS_AS(model.forward_eval(wrong_res, in.material, in.volume, InputCombo::vmv),
                    ShapeMismatch);
    const nn::Tensor wrong_rank = nn::Tensor::zeros({24, 24, 24});
    CHECK_THROWS_AS(model.forward_eval(wrong_rank, in.material, in.volume, InputCombo::vmv),
                    ShapeMismatch);
    const nn::Tensor wrong_material = nn::Tensor::zeros({3});
    CHECK_THROWS_AS(model.forward_eval(in.voxel, wrong_material, in.volume, InputCombo::vmv),
                    ShapeMismatch);
}

TEST_CASE("backward gradients match central differences across every tensor") {
    const ModelSpec spec = tiny_spec();
    CostModel model{spec, 71};
    const TinyInputs in = tiny_inputs(12);

    CostModel::Trace trace;
    model.forward(in.voxel, in.material, in.volume, CostModel::Mode::eval, InputCombo::vmv,
                  nullptr, &trace);
    const std::vector<nn::Tensor> grads = model.backward(trace, 1.0);
    REQUIRE(grads.size() == model.parameters().size());

    const double h = 1e-5;
    std::size_t checked = 0;
    for (std::size_t p = 0; p < grads.size(); ++p) {
        REQUIRE(grads[p].shape == model.parameters()[p].shape);
        for (std::size_t i = 0; i < grads[p].numel(); ++i) {
            double& slot = model.parameters()[p].data[i];
            const double keep = slot;
            slot = keep + h;
            const double up =
                model.forward_eval(in.voxel, in.material, in.volume, InputCombo::vmv);
            slot = keep - h;
            const double down =
                model.forward_eval(in.voxel, in.material, in.volume, InputCombo::vmv);
            slot = keep;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = grads[p].data[i];
            const double rel = std::abs(numeric - analytic) /
                               std::max({1.0, std::abs(numeric), std::abs(analytic)});
            CHECK(rel < 1e-4);
            ++checked;
        }
    }
    CHECK(checked == model.parameter_count());
}

TEST_CASE("backward zeroes weight gradients of branches that saw zero input") {
    const ModelSpec spec = tiny_spec();
    CostModel model{spec, 81};
    const TinyInputs in = tiny_inputs(13);
    const std::vector<std::string> names = model.parameter_names();

    auto grad_of = [&](const std::vector<nn::Tensor>& grads, const std::string& name) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return grads[i];
        REQUIRE(false);
        return nn::Tensor{};
    };
    auto all_zero = [](const nn::Tensor& t) {
        for (double v : t.data)
            if (v != 0.0) return false;
        return true;
    };

    CostModel::Trace trace;
    model.forward(in.voxel, in.material, in.volume, CostModel::Mode::eval, InputCombo::vm,
                  nullptr, &trace);
    std::vector<nn::Tensor> grads = model.backward(trace, 1.0);
    // Zero volume input: its weight cannot influence the output, but the bias
    // still feeds the concatenation.
    CHECK(all_zero(grad_of(grads, "volume.weight")));
    CHECK_FALSE(all_zero(grad_of(grads, "volume.bias")));
    CHECK_FALSE(all_zero(grad_of(grads, "material.weight")));

    model.forward(in.voxel, in.material, in.volume, CostModel::Mode::eval, InputCombo::vv,
                  nullptr, &trace);
    grads = model.backward(trace, 1.0);
    CHECK(all_zero(grad_of(grads, "material.weight")));
    CHECK_FALSE(all_zero(grad_of(grads, "material.bias")));
    CHECK_FALSE(all_zero(grad_of(grads, "volume.weight")));
}

TEST_CASE("activation_gradient exposes each requested layer with matching shapes") {
    const ModelSpec spec = tiny_spec();
    CostModel model{spec, 91};
    const TinyInputs in = tiny_inputs(14);

    CostModel::Trace trace;
    model.forward(in.voxel, in.material, in.volume, CostModel::Mode::eval, InputCombo::vmv,
                  nullptr, &trace);

    const std::vector<std::pair<CamLayer, const nn::Tensor*>> expected = {
        {CamLayer::conv1, &trace.a1}, {CamLayer::conv2, &trace.a2},
        {CamLayer::pool1, &trace.p1}, {CamLayer::conv3, &trace.a3},
        {CamLayer::conv4, &trace.a4}, {CamLayer::pool2, &trace.p2},
        {CamLayer::conv5, &trace.a5}};
    for (const auto& [layer, tensor] : expected) {
        const CostModel::ActivationGrad ag = model.activation_gradient(trace, layer);
        CHECK(ag.activation == tensor);
        CHECK(ag.gradient.shape == tensor->shape);
        CHECK(ag.gradient.all_finite());
    }
}

TEST_CASE("activation_gradient at the last conv matches head finite differences") {
    const ModelSpec spec = tiny_spec();
    CostModel model{spec, 101};
    const TinyInputs in = tiny_inputs(15);

    CostModel::Trace trace;
    model.forward(in.voxel, in.material, in.volume, CostModel::Mode::eval, InputCombo::vmv,
                  nullptr, &trace);

    // Replay the head from the concatenation with the model's own parameters.
    const std::vector<std::string> names = model.parameter_names();
    std::size_t head0 = names.size();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == "head0.weight") head0 = i;
    REQUIRE(head0 < names.size());

    auto head_value = [&](const nn::Tensor& cat) {
        nn::Tensor cur = cat;
        for (std::size_t i = 0; i < spec.head_widths.size(); ++i) {
            cur = nn::dense_forward(cur, model.parameters()[head0 + 2 * i],
                                    model.parameters()[head0 + 2 * i + 1]);
            if (i + 1 < spec.head_widths.size()) cur = nn::leaky_relu_forward(cur, spec.alpha);
        }
        return cur.data[0];
    };
    CHECK(std::abs(head_value(trace.cat) - trace.y) < 1e-12);

    const CostModel::ActivationGrad ag = model.activation_gradient(trace, CamLayer::conv5);
    const double h = 1e-6;
    for (std::size_t i = 0; i < trace.a5.numel(); ++i) {
        nn::Tensor up = trace.cat;
        nn::Tensor down = trace.cat;
        up.data[i] += h;
        down.data[i] -= h;
        const double numeric = (head_value(up) - head_value(down)) / (2.0 * h);
        const double rel = std::abs(numeric - ag.gradient.data[i]) /
                           std::max({1.0, std::abs(numeric), std::abs(ag.gradient.data[i])});
        CHECK(rel < 1e-6);
    }
}

TEST_CASE("activation gradients vanish when the head is disconnected") {
    const ModelSpec spec = tiny_spec();
    CostModel model{spec, 111};
    const TinyInputs in = tiny_inputs(16);

    for (std::size_t i = 0; i < model.parameter_names().size(); ++i)
        if (model.parameter_names()[i] == "head0.weight")
            for (double& v : model.parameters()[i].data) v = 0.0;

    CostModel::Trace trace;
    model.forward(in.voxel, in.material, in.volume, CostModel::Mode::eval, InputCombo::vmv,
                  nullptr, &trace);
    for (CamLayer layer : {CamLayer::conv1, CamLayer::conv2, CamLayer::pool1, CamLayer::conv3,
                           CamLayer::conv4, CamLayer::pool2, CamLayer::conv5}) {
        const CostModel::ActivationGrad ag = model.activation_gradient(trace, layer);
        for (double v : ag.gradient.data) CHECK(v == 0.0);
    }
}

TEST_CASE("voxel_tensor and material_tensor preserve layout") {
    VoxelGrid grid;
    grid.resolution = 4;
    grid.occupancy.assign(64, 0);
    grid.occupancy[grid.index(1, 2, 3)] = 1;
    grid.occupancy[grid.index(0, 0, 0)] = 1;
    grid.occupancy[grid.index(3, 3, 3)] = 1;

    const nn::Tensor t = voxel_tensor(grid);
    CHECK(t.shape == std::vector<std::size_t>{1, 4, 4, 4});
    std::size_t ones = 0;
    for (std::size_t n = 0; n < 64; ++n) {
        CHECK(t.data[n] == (grid.occupancy[n] ? 1.0 : 0.0));
        if (t.data[n] == 1.0) ++ones;
    }
    CHECK(ones == 3);
    CHECK(t.data[1 + 4 * (2 + 4 * 3)] == 1.0);

    std::array<double, kMaterialSlots> onehot{};
    onehot[5] = 1.0;
    const nn::Tensor m = material_tensor(onehot);
    CHECK(m.shape == std::vector<std::size_t>{kMaterialSlots});
    for (std::size_t i = 0; i < kMaterialSlots; ++i)
        CHECK(m.data[i] == (i == 5 ? 1.0 : 0.0));
}

TEST_CASE("a default-size model runs end to end on voxel occupancy input") {
    CostModel model{ModelSpec{}, 121};
    SplitMix64 rng(17);
    nn::Tensor voxel = nn::Tensor::zeros({1, 32, 32, 32});
    for (double& v : voxel.data) v = rng.uniform(0.0, 1.0) < 0.2 ? 1.0 : 0.0;
    std::array<double, kMaterialSlots> onehot{};
    onehot[0] = 1.0;

    CostModel::Trace trace;
    const double y = model.forward(voxel, material_tensor(onehot), 0.37,
                                   CostModel::Mode::eval, InputCombo::vmv, nullptr, &trace);
    CHECK(std::isfinite(y));
    using Shape = std::vector<std::size_t>;
    CHECK(trace.z1.shape == Shape{16, 30, 30, 30});
    CHECK(trace.p1.shape == Shape{16, 14, 14, 14});
    CHECK(trace.a5.shape == Shape{64, 3, 3, 3});
    CHECK(trace.cat.shape == Shape{1745});
}
