#include "cncost/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "cncost/errors.hpp"

namespace cncost::nn {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    if (n != data.size()) throw ShapeMismatch("tensor data does not match its shape");
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeMismatch("tensor dimensions must be positive");
        n *= d;
    }
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(n, 0.0);
    return t;
}

bool Tensor::all_finite() const {
    return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

// --- convolution ------------------------------------------------------------

namespace {

struct ConvDims {
    std::size_t c_in, d, h, w;    // input
    std::size_t c_out;            // filters
    std::size_t od, oh, ow;       // output spatial dims
    std::size_t n_out;            // od*oh*ow
    std::size_t k_rows;           // c_in*27
};

ConvDims conv_dims(const Tensor& input, const Tensor& weight, const Tensor* bias) {
    if (input.shape.size() != 4) throw ShapeMismatch("conv3d input must be rank 4 [C,D,H,W]");
    if (weight.shape.size() != 5 || weight.shape[2] != 3 || weight.shape[3] != 3 ||
        weight.shape[4] != 3)
        throw ShapeMismatch("conv3d weight must be [C_out, C_in, 3, 3, 3]");
    ConvDims dm;
    dm.c_in = input.shape[0];
    dm.d = input.shape[1];
    dm.h = input.shape[2];
    dm.w = input.shape[3];
    dm.c_out = weight.shape[0];
    if (weight.shape[1] != dm.c_in)
        throw ShapeMismatch("conv3d weight channel count does not match the input");
    if (bias != nullptr && (bias->shape.size() != 1 || bias->shape[0] != dm.c_out))
        throw ShapeMismatch("conv3d bias must be [C_out]");
    if (dm.d < 3 || dm.h < 3 || dm.w < 3)
        throw ShapeMismatch("conv3d input spatial dims must be >= 3 (valid padding)");
    dm.od = dm.d - 2;
    dm.oh = dm.h - 2;
    dm.ow = dm.w - 2;
    dm.n_out = dm.od * dm.oh * dm.ow;
    dm.k_rows = dm.c_in * 27;
    return dm;
}

// Gathers input patches into a [c_in*27, n_out] matrix (row = (c,a,b,d) tap,
// column = output position), reusing one growing scratch buffer.
std::vector<double>& im2col(const Tensor& input, const ConvDims& dm) {
    static thread_local std::vector<double> scratch;
    scratch.resize(dm.k_rows * dm.n_out);
    const double* src = input.data.data();
    std::size_t row = 0;
    for (std::size_t c = 0; c < dm.c_in; ++c)
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b)
                for (std::size_t e = 0; e < 3; ++e, ++row) {
                    double* dst = scratch.data() + row * dm.n_out;
                    for (std::size_t i = 0; i < dm.od; ++i)
                        for (std::size_t j = 0; j < dm.oh; ++j) {
                            const double* s =
                                src + ((c * dm.d + i + a) * dm.h + j + b) * dm.w + e;
                            double* t = dst + (i * dm.oh + j) * dm.ow;
                            std::copy(s, s + dm.ow, t);
                        }
                }
    return scratch;
}

} // namespace

Tensor conv3d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    const ConvDims dm = conv_dims(input, weight, &bias);
    const std::vector<double>& cols = im2col(input, dm);

    Tensor out = Tensor::zeros({dm.c_out, dm.od, dm.oh, dm.ow});
    ConstMatMap w_mat(weight.data.data(), static_cast<Eigen::Index>(dm.c_out),
                      static_cast<Eigen::Index>(dm.k_rows));
    ConstMatMap col_mat(cols.data(), static_cast<Eigen::Index>(dm.k_rows),
                        static_cast<Eigen::Index>(dm.n_out));
    MatMap out_mat(out.data.data(), static_cast<Eigen::Index>(dm.c_out),
                   static_cast<Eigen::Index>(dm.n_out));
    out_mat.noalias() = w_mat * col_mat;

    for (std::size_t o = 0; o < dm.c_out; ++o) {
        const double b = bias.data[o];
        double* dst = out.data.data() + o * dm.n_out;
        for (std::size_t n = 0; n < dm.n_out; ++n) dst[n] += b;
    }
    return out;
}

Conv3dGrads conv3d_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weight) {
    const ConvDims dm = conv_dims(input, weight, nullptr);
    if (grad_out.shape != std::vector<std::size_t>{dm.c_out, dm.od, dm.oh, dm.ow})
        throw ShapeMismatch("conv3d grad_out shape does not match the forward output");

    Conv3dGrads g;
    g.weight = Tensor::zeros(weight.shape);
    g.bias = Tensor::zeros({dm.c_out});

    // dL/dW = dL/dY [c_out, n] * cols^T [n, k_rows]
    {
        const std::vector<double>& cols = im2col(input, dm);
        ConstMatMap gy(grad_out.data.data(), static_cast<Eigen::Index>(dm.c_out),
                       static_cast<Eigen::Index>(dm.n_out));
        ConstMatMap col_mat(cols.data(), static_cast<Eigen::Index>(dm.k_rows),
                            static_cast<Eigen::Index>(dm.n_out));
        MatMap gw(g.weight.data.data(), static_cast<Eigen::Index>(dm.c_out),
                  static_cast<Eigen::Index>(dm.k_rows));
        gw.noalias() = gy * col_mat.transpose();
    }

    for (std::size_t o = 0; o < dm.c_out; ++o) {
        const double* src = grad_out.data.data() + o * dm.n_out;
        g.bias.data[o] = std::accumulate(src, src + dm.n_out, 0.0);
    }

    g.input = conv3d_backward_input(grad_out, weight);
    return g;
}

Tensor conv3d_backward_input(const Tensor& grad_out, const Tensor& weight) {
    if (grad_out.shape.size() != 4) throw ShapeMismatch("conv3d grad_out must be rank 4");
    if (weight.shape.size() != 5) throw ShapeMismatch("conv3d weight must be rank 5");
    const std::size_t c_out = weight.shape[0];
    const std::size_t c_in = weight.shape[1];
    if (grad_out.shape[0] != c_out)
        throw ShapeMismatch("conv3d grad_out channels do not match the weights");
    const std::size_t od = grad_out.shape[1], oh = grad_out.shape[2], ow = grad_out.shape[3];
    const std::size_t n_out = od * oh * ow;
    const std::size_t k_rows = c_in * 27;
    const std::size_t d = od + 2, h = oh + 2, w = ow + 2;

    // cols_grad [k_rows, n_out] = W^T [k_rows, c_out] * gy [c_out, n_out],
    // then scatter-add back to input positions (col2im).
    static thread_local std::vector<double> cols_grad;
    cols_grad.assign(k_rows * n_out, 0.0);
    {
        ConstMatMap w_mat(weight.data.data(), static_cast<Eigen::Index>(c_out),
                          static_cast<Eigen::Index>(k_rows));
        ConstMatMap gy(grad_out.data.data(), static_cast<Eigen::Index>(c_out),
                       static_cast<Eigen::Index>(n_out));
        MatMap cg(cols_grad.data(), static_cast<Eigen::Index>(k_rows),
                  static_cast<Eigen::Index>(n_out));
        cg.noalias() = w_mat.transpose() * gy;
    }

    Tensor gx = Tensor::zeros({c_in, d, h, w});
    std::size_t row = 0;
    for (std::size_t c = 0; c < c_in; ++c)
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b)
                for (std::size_t e = 0; e < 3; ++e, ++row) {
                    const double* src = cols_grad.data() + row * n_out;
                    for (std::size_t i = 0; i < od; ++i)
                        for (std::size_t j = 0; j < oh; ++j) {
                            double* t =
                                gx.data.data() + ((c * d + i + a) * h + j + b) * w + e;
                            const double* s = src + (i * oh + j) * ow;
                            for (std::size_t k = 0; k < ow; ++k) t[k] += s[k];
                        }
                }
    return gx;
}

// --- pooling ----------------------------------------------------------------

MaxPool3dResult maxpool3d_forward(const Tensor& input) {
    if (input.shape.size() != 4) throw ShapeMismatch("maxpool3d input must be rank 4");
    const std::size_t c = input.shape[0], d = input.shape[1], h = input.shape[2],
                      w = input.shape[3];
    if (d % 2 != 0 || h % 2 != 0 || w % 2 != 0)
        throw OddDimension("maxpool3d needs even spatial dimensions");

    MaxPool3dResult res;
    res.output = Tensor::zeros({c, d / 2, h / 2, w / 2});
    res.argmax.assign(res.output.numel(), 0);

    std::size_t out_idx = 0;
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i + 1 < d; i += 2)
            for (std::size_t j = 0; j + 1 < h; j += 2)
                for (std::size_t k = 0; k + 1 < w; k += 2, ++out_idx) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::size_t best_at = 0;
                    for (std::size_t a = 0; a < 2; ++a)
                        for (std::size_t b = 0; b < 2; ++b)
                            for (std::size_t e = 0; e < 2; ++e) {
                                const std::size_t at =
                                    ((ch * d + i + a) * h + j + b) * w + k + e;
                                if (input.data[at] > best) { // ties keep lowest flat index
                                    best = input.data[at];
                                    best_at = at;
                                }
                            }
                    res.output.data[out_idx] = best;
                    res.argmax[out_idx] = best_at;
                }
    return res;
}

Tensor maxpool3d_backward(const Tensor& grad_out, const std::vector<std::size_t>& argmax,
                          const std::vector<std::size_t>& input_shape) {
    if (grad_out.numel() != argmax.size())
        throw ShapeMismatch("maxpool3d grad_out does not match the cached argmax");
    Tensor gx = Tensor::zeros(input_shape);
    for (std::size_t n = 0; n < argmax.size(); ++n) {
        if (argmax[n] >= gx.numel()) throw ShapeMismatch("maxpool3d argmax out of range");
        gx.data[argmax[n]] += grad_out.data[n];
    }
    return gx;
}

// --- activations ------------------------------------------------------------

Tensor leaky_relu_forward(const Tensor& input, double alpha) {
    Tensor out = input;
    for (double& v : out.data) v = std::max(alpha * v, v);
    return out;
}

Tensor leaky_relu_backward(const Tensor& grad_out, const Tensor& input, double alpha) {
    if (!grad_out.same_shape(input))
        throw ShapeMismatch("leaky_relu grad_out does not match the input");
    Tensor gx = grad_out;
    for (std::size_t n = 0; n < gx.data.size(); ++n)
        if (input.data[n] < 0.0) gx.data[n] *= alpha;
    return gx;
}

// --- dropout ----------------------------------------------------------------

DropoutResult dropout_forward(const Tensor& input, double p, SplitMix64& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw DegenerateRange("dropout rate must be in [0, 1)");
    DropoutResult res;
    res.output = input;
    res.mask.assign(input.numel(), 1);
    if (p == 0.0) return res;
    const double scale = 1.0 / (1.0 - p);
    for (std::size_t n = 0; n < input.numel(); ++n) {
        if (rng.uniform() < p) {
            res.mask[n] = 0;
            res.output.data[n] = 0.0;
        } else {
            res.output.data[n] *= scale;
        }
    }
    return res;
}

Tensor dropout_backward(const Tensor& grad_out, const std::vector<std::uint8_t>& mask,
                        double p) {
    if (grad_out.numel() != mask.size())
        throw ShapeMismatch("dropout grad_out does not match the cached mask");
    Tensor gx = grad_out;
    const double scale = 1.0 / (1.0 - p);
    for (std::size_t n = 0; n < gx.data.size(); ++n)
        gx.data[n] = mask[n] ? gx.data[n] * scale : 0.0;
    return gx;
}

// --- dense ------------------------------------------------------------------

namespace {

void check_dense(const Tensor& input, const Tensor& weight, const Tensor* bias) {
    if (weight.shape.size() != 2) throw ShapeMismatch("dense weight must be [n_out, n_in]");
    if (input.numel() != weight.shape[1])
        throw ShapeMismatch("dense input width does not match the weight");
    if (bias != nullptr && bias->numel() != weight.shape[0])
        throw ShapeMismatch("dense bias width does not match the weight");
}

} // namespace

Tensor dense_forward(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    check_dense(input, weight, &bias);
    const std::size_t n_out = weight.shape[0], n_in = weight.shape[1];
    Tensor out = Tensor::zeros({n_out});
    ConstMatMap w(weight.data.data(), static_cast<Eigen::Index>(n_out),
                  static_cast<Eigen::Index>(n_in));
    Eigen::Map<const Eigen::VectorXd> x(input.data.data(), static_cast<Eigen::Index>(n_in));
    Eigen::Map<Eigen::VectorXd> y(out.data.data(), static_cast<Eigen::Index>(n_out));
    y.noalias() = w * x;
    for (std::size_t o = 0; o < n_out; ++o) out.data[o] += bias.data[o];
    return out;
}

DenseGrads dense_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weight) {
    check_dense(input, weight, nullptr);
    const std::size_t n_out = weight.shape[0], n_in = weight.shape[1];
    if (grad_out.numel() != n_out)
        throw ShapeMismatch("dense grad_out width does not match the weight");

    DenseGrads g;
    g.weight = Tensor::zeros(weight.shape);
    g.bias = grad_out;
    g.bias.shape = {n_out};
    {
        MatMap gw(g.weight.data.data(), static_cast<Eigen::Index>(n_out),
                  static_cast<Eigen::Index>(n_in));
        Eigen::Map<const Eigen::VectorXd> gy(grad_out.data.data(),
                                             static_cast<Eigen::Index>(n_out));
        Eigen::Map<const Eigen::VectorXd> x(input.data.data(),
                                            static_cast<Eigen::Index>(n_in));
        gw.noalias() = gy * x.transpose();
    }
    g.input = dense_backward_input(grad_out, weight);
    g.input.shape = input.shape;
    return g;
}

Tensor dense_backward_input(const Tensor& grad_out, const Tensor& weight) {
    if (weight.shape.size() != 2) throw ShapeMismatch("dense weight must be [n_out, n_in]");
    const std::size_t n_out = weight.shape[0], n_in = weight.shape[1];
    if (grad_out.numel() != n_out)
        throw ShapeMismatch("dense grad_out width does not match the weight");
    Tensor gx = Tensor::zeros({n_in});
    ConstMatMap w(weight.data.data(), static_cast<Eigen::Index>(n_out),
                  static_cast<Eigen::Index>(n_in));
    Eigen::Map<const Eigen::VectorXd> gy(grad_out.data.data(),
                                         static_cast<Eigen::Index>(n_out));
    Eigen::Map<Eigen::VectorXd> x(gx.data.data(), static_cast<Eigen::Index>(n_in));
    x.noalias() = w.transpose() * gy;
    return gx;
}

// --- initialization ---------------------------------------------------------

Tensor xavier_normal_init(std::vector<std::size_t> shape, std::size_t fan_in,
                          std::size_t fan_out, SplitMix64& rng) {
    if (fan_in == 0 || fan_out == 0) throw ShapeMismatch("xavier fans must be >= 1");
    Tensor t = Tensor::zeros(std::move(shape));
    const double sigma = std::sqrt(2.0 / (static_cast<double>(fan_in) + fan_out));
    for (double& v : t.data) v = sigma * rng.normal();
    return t;
}

// --- losses and metrics -----------------------------------------------------

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::mse: return "mse";
        case LossKind::mae: return "mae";
        case LossKind::msle: return "msle";
    }
    throw MalformedToken("bad loss kind value");
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "mse") return LossKind::mse;
    if (s == "mae") return LossKind::mae;
    if (s == "msle") return LossKind::msle;
    throw MalformedToken("unknown loss kind: " + s);
}

std::pair<double, Tensor> loss(LossKind kind, const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw ShapeMismatch("loss pred/target shapes differ");
    if (pred.numel() == 0) throw EmptyDataset("loss needs at least one element");
    const double n = static_cast<double>(pred.numel());
    Tensor grad = Tensor::zeros(pred.shape);
    double total = 0.0;

    switch (kind) {
        case LossKind::mse:
            for (std::size_t i = 0; i < pred.numel(); ++i) {
                const double d = pred.data[i] - target.data[i];
                total += d * d;
                grad.data[i] = 2.0 * d / n;
            }
            break;
        case LossKind::mae:
            for (std::size_t i = 0; i < pred.numel(); ++i) {
                const double d = pred.data[i] - target.data[i];
                total += std::abs(d);
                grad.data[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / n;
            }
            break;
        case LossKind::msle:
            for (std::size_t i = 0; i < pred.numel(); ++i) {
                if (!(pred.data[i] > -1.0) || !(target.data[i] > -1.0))
                    throw MsleDomain("MSLE needs pred and target > -1");
                const double d = std::log1p(pred.data[i]) - std::log1p(target.data[i]);
                total += d * d;
                grad.data[i] = 2.0 * d / ((1.0 + pred.data[i]) * n);
            }
            break;
    }
    return {total / n, std::move(grad)};
}

double metric_rmse(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size() || pred.empty())
        throw ShapeMismatch("metric inputs must be nonempty and equally sized");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        total += d * d;
    }
    return std::sqrt(total / static_cast<double>(pred.size()));
}

double metric_mape(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size() || pred.empty())
        throw ShapeMismatch("metric inputs must be nonempty and equally sized");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (target[i] == 0.0) throw ZeroTarget("MAPE is undefined for a zero target");
        total += std::abs(pred[i] - target[i]) / std::abs(target[i]);
    }
    return 100.0 * total / static_cast<double>(pred.size());
}

// --- optimizer --------------------------------------------------------------

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const AdamConfig& cfg) {
    if (!param.same_shape(grad)) throw ShapeMismatch("adam param/grad shapes differ");
    if (state.t == 0) {
        state.m = Tensor::zeros(param.shape);
        state.v = Tensor::zeros(param.shape);
    } else if (!state.m.same_shape(param)) {
        throw ShapeMismatch("adam state does not match the parameter");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < param.numel(); ++i) {
        const double g = grad.data[i];
        state.m.data[i] = cfg.beta1 * state.m.data[i] + (1.0 - cfg.beta1) * g;
        state.v.data[i] = cfg.beta2 * state.v.data[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m.data[i] / bc1;
        const double v_hat = state.v.data[i] / bc2;
        param.data[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

} // namespace cncost::nn
