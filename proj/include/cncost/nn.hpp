#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cncost/rng.hpp"

namespace cncost::nn {

/// Dense row-major (last index fastest) 64-bit float tensor.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shape_, std::vector<double> data_);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    std::size_t numel() const { return data.size(); }
    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;
};

// --- convolution ------------------------------------------------------------

/// Valid-padding stride-1 3x3x3 convolution.
/// input [C_in, D, H, W], weight [C_out, C_in, 3, 3, 3], bias [C_out]
/// -> [C_out, D-2, H-2, W-2].
Tensor conv3d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias);

struct Conv3dGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
};
Conv3dGrads conv3d_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weight);
/// Input gradient only (cheaper path when parameters are frozen).
Tensor conv3d_backward_input(const Tensor& grad_out, const Tensor& weight);

// --- pooling ----------------------------------------------------------------

/// 2x2x2 max pooling, stride 2. Spatial dims must be even.
/// argmax records, per output element, the flat input index that won
/// (ties resolved to the lowest flat index).
struct MaxPool3dResult {
    Tensor output;
    std::vector<std::size_t> argmax;
};
MaxPool3dResult maxpool3d_forward(const Tensor& input);
Tensor maxpool3d_backward(const Tensor& grad_out, const std::vector<std::size_t>& argmax,
                          const std::vector<std::size_t>& input_shape);

// --- activations ------------------------------------------------------------

/// max(alpha*x, x); derivative alpha for x < 0 and 1 for x >= 0.
Tensor leaky_relu_forward(const Tensor& input, double alpha = 0.1);
Tensor leaky_relu_backward(const Tensor& grad_out, const Tensor& input, double alpha = 0.1);

// --- dropout ----------------------------------------------------------------

/// Inverted dropout: each element zeroed with probability p, survivors
/// scaled by 1/(1-p). mask holds 0/1 per element.
struct DropoutResult {
    Tensor output;
    std::vector<std::uint8_t> mask;
};
DropoutResult dropout_forward(const Tensor& input, double p, SplitMix64& rng);
Tensor dropout_backward(const Tensor& grad_out, const std::vector<std::uint8_t>& mask, double p);

// --- dense ------------------------------------------------------------------

/// x [n_in], weight [n_out, n_in], bias [n_out] -> Wx + b.
Tensor dense_forward(const Tensor& input, const Tensor& weight, const Tensor& bias);

struct DenseGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
};
DenseGrads dense_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weight);
Tensor dense_backward_input(const Tensor& grad_out, const Tensor& weight);

// --- initialization ---------------------------------------------------------

/// I.i.d. normal(0, 2/(fan_in+fan_out)) entries.
Tensor xavier_normal_init(std::vector<std::size_t> shape, std::size_t fan_in,
                          std::size_t fan_out, SplitMix64& rng);

// --- losses and metrics -----------------------------------------------------

enum class LossKind { mse, mae, msle };
std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& s);

/// Returns (scalar loss, gradient wrt pred). Means are over elements.
/// MAE subgradient at 0 is 0. MSLE requires pred and target > -1.
std::pair<double, Tensor> loss(LossKind kind, const Tensor& pred, const Tensor& target);

double metric_rmse(const std::vector<double>& pred, const std::vector<double>& target);
/// Percent: 100 * mean(|p-t| / |t|). Throws ZeroTarget on any zero target.
double metric_mape(const std::vector<double>& pred, const std::vector<double>& target);

// --- optimizer --------------------------------------------------------------

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Tensor m;
    Tensor v;
    std::uint64_t t = 0;
};

/// Standard Adam with bias correction; state.t increments per call.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const AdamConfig& cfg);

} // namespace cncost::nn
