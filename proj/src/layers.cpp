#include "spamnet/layers.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace spamnet {

namespace {

void check_rank4(const Tensor& x, const char* who) {
    if (x.rank() != 4)
        throw std::invalid_argument(std::string(who) + ": expected [N,C,H,W], got " +
                                    shape_str(x.shape()));
}

// One sample [C,H,W] -> patch matrix [C*9, OH*OW] for a 3x3 stride-1 kernel.
void im2col(const float* x, std::size_t C, std::size_t H, std::size_t W,
            std::size_t pad, float* col, std::size_t OH, std::size_t OW) {
    const std::size_t ohw = OH * OW;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t kh = 0; kh < 3; ++kh) {
            for (std::size_t kw = 0; kw < 3; ++kw) {
                float* row = col + (c * 9 + kh * 3 + kw) * ohw;
                for (std::size_t oh = 0; oh < OH; ++oh) {
                    const std::ptrdiff_t ih =
                        static_cast<std::ptrdiff_t>(oh + kh) -
                        static_cast<std::ptrdiff_t>(pad);
                    if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) {
                        std::memset(row + oh * OW, 0, OW * sizeof(float));
                        continue;
                    }
                    const float* src = x + (c * H + ih) * W;
                    for (std::size_t ow = 0; ow < OW; ++ow) {
                        const std::ptrdiff_t iw =
                            static_cast<std::ptrdiff_t>(ow + kw) -
                            static_cast<std::ptrdiff_t>(pad);
                        row[oh * OW + ow] =
                            (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W))
                                ? 0.0f
                                : src[iw];
                    }
                }
            }
        }
    }
}

// Scatter-add of a patch-matrix gradient back onto the input grid.
void col2im(const float* col, std::size_t C, std::size_t H, std::size_t W,
            std::size_t pad, float* x, std::size_t OH, std::size_t OW) {
    const std::size_t ohw = OH * OW;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t kh = 0; kh < 3; ++kh) {
            for (std::size_t kw = 0; kw < 3; ++kw) {
                const float* row = col + (c * 9 + kh * 3 + kw) * ohw;
                for (std::size_t oh = 0; oh < OH; ++oh) {
                    const std::ptrdiff_t ih =
                        static_cast<std::ptrdiff_t>(oh + kh) -
                        static_cast<std::ptrdiff_t>(pad);
                    if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
                    float* dst = x + (c * H + ih) * W;
                    for (std::size_t ow = 0; ow < OW; ++ow) {
                        const std::ptrdiff_t iw =
                            static_cast<std::ptrdiff_t>(ow + kw) -
                            static_cast<std::ptrdiff_t>(pad);
                        if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
                        dst[iw] += row[oh * OW + ow];
                    }
                }
            }
        }
    }
}

}  // namespace

Conv2DLayer::Conv2DLayer(Rng& rng, std::size_t in_channels,
                         std::size_t out_channels, Padding padding)
    : in_channels_(in_channels), out_channels_(out_channels), padding_(padding) {
    weights = glorot_uniform(rng, in_channels * 9, out_channels * 9,
                             {out_channels, in_channels, 3, 3});
    bias = zeros({out_channels});
    grad_weights = zeros(weights.shape());
    grad_bias = zeros(bias.shape());
}

Tensor Conv2DLayer::forward(const Tensor& x) {
    check_rank4(x, "conv2d_forward");
    if (x.dim(1) != in_channels_)
        throw std::invalid_argument("conv2d_forward: input has " +
                                    std::to_string(x.dim(1)) + " channels, layer expects " +
                                    std::to_string(in_channels_));
    const std::size_t N = x.dim(0), H = x.dim(2), W = x.dim(3);
    const std::size_t pad = padding_ == Padding::same ? 1 : 0;
    if (pad == 0 && (H < 3 || W < 3))
        throw std::invalid_argument("conv2d_forward: spatial dims too small for valid padding");
    const std::size_t OH = H + 2 * pad - 2, OW = W + 2 * pad - 2;
    const std::size_t ohw = OH * OW;

    const Tensor w_mat = reshape(weights, {out_channels_, in_channels_ * 9});
    Tensor col({in_channels_ * 9, ohw});
    Tensor out({N, out_channels_, OH, OW});

    for (std::size_t n = 0; n < N; ++n) {
        im2col(x.data() + n * in_channels_ * H * W, in_channels_, H, W, pad,
               col.data(), OH, OW);
        Tensor y = matmul(w_mat, col);  // [C_out, OH*OW]
        float* dst = out.data() + n * out_channels_ * ohw;
        for (std::size_t c = 0; c < out_channels_; ++c) {
            const float b = bias[c];
            const float* src = y.data() + c * ohw;
            for (std::size_t i = 0; i < ohw; ++i) dst[c * ohw + i] = src[i] + b;
        }
    }
    cached_input_ = x;
    return out;
}

Tensor Conv2DLayer::backward(const Tensor& grad_out) {
    if (cached_input_.empty())
        throw std::logic_error("conv2d_backward: no cached forward pass");
    const std::size_t N = cached_input_.dim(0), H = cached_input_.dim(2),
                      W = cached_input_.dim(3);
    const std::size_t pad = padding_ == Padding::same ? 1 : 0;
    const std::size_t OH = H + 2 * pad - 2, OW = W + 2 * pad - 2;
    const std::size_t ohw = OH * OW;
    if (!same_shape(grad_out.shape(), {N, out_channels_, OH, OW}))
        throw std::invalid_argument("conv2d_backward: grad shape " +
                                    shape_str(grad_out.shape()) + " does not match forward output");

    const Tensor w_mat = reshape(weights, {out_channels_, in_channels_ * 9});
    Tensor dw_mat({out_channels_, in_channels_ * 9});
    grad_bias.fill(0.0f);
    Tensor grad_in(cached_input_.shape());
    Tensor col({in_channels_ * 9, ohw});

    for (std::size_t n = 0; n < N; ++n) {
        im2col(cached_input_.data() + n * in_channels_ * H * W, in_channels_, H,
               W, pad, col.data(), OH, OW);
        Tensor g_n({out_channels_, ohw},
                   std::vector<float>(grad_out.data() + n * out_channels_ * ohw,
                                      grad_out.data() + (n + 1) * out_channels_ * ohw));
        Tensor dw_n = matmul_nt(g_n, col);  // [C_out, C_in*9]
        for (std::size_t i = 0; i < dw_mat.size(); ++i) dw_mat[i] += dw_n[i];
        for (std::size_t c = 0; c < out_channels_; ++c) {
            float acc = 0.0f;
            const float* row = g_n.data() + c * ohw;
            for (std::size_t i = 0; i < ohw; ++i) acc += row[i];
            grad_bias[c] += acc;
        }
        Tensor dcol = matmul_tn(w_mat, g_n);  // [C_in*9, OH*OW]
        col2im(dcol.data(), in_channels_, H, W, pad,
               grad_in.data() + n * in_channels_ * H * W, OH, OW);
    }
    grad_weights = reshape(dw_mat, weights.shape());
    return grad_in;
}

Tensor MaxPool2DLayer::forward(const Tensor& x) {
    check_rank4(x, "maxpool_forward");
    const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (H < 2 || W < 2)
        throw std::invalid_argument("maxpool_forward: spatial dims must be >= 2");
    const std::size_t OH = H / 2, OW = W / 2;
    Tensor out({N, C, OH, OW});
    input_shape_ = x.shape();
    argmax_.assign(out.size(), 0);

    std::size_t o = 0;
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t base = (n * C + c) * H * W;
            for (std::size_t oh = 0; oh < OH; ++oh)
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    std::size_t best = base + (2 * oh) * W + 2 * ow;
                    float best_v = x[best];
                    // strict > keeps the first row-major element on ties
                    const std::size_t cand[3] = {best + 1, best + W, best + W + 1};
                    for (std::size_t idx : cand)
                        if (x[idx] > best_v) {
                            best_v = x[idx];
                            best = idx;
                        }
                    out[o] = best_v;
                    argmax_[o] = best;
                    ++o;
                }
        }
    return out;
}

Tensor MaxPool2DLayer::backward(const Tensor& grad_out) {
    if (argmax_.empty())
        throw std::logic_error("maxpool_backward: no cached forward pass");
    if (grad_out.size() != argmax_.size())
        throw std::invalid_argument("maxpool_backward: grad shape " +
                                    shape_str(grad_out.shape()) + " does not match forward output");
    Tensor grad_in(input_shape_);
    for (std::size_t i = 0; i < argmax_.size(); ++i)
        grad_in[argmax_[i]] += grad_out[i];
    return grad_in;
}

DropoutLayer::DropoutLayer(float rate) : rate_(rate) {
    if (rate < 0.0f || rate >= 1.0f)
        throw std::invalid_argument("dropout rate must be in [0,1)");
}

Tensor DropoutLayer::forward(const Tensor& x, Rng& rng) {
    if (!training_) {
        mask_ = Tensor();
        return x;
    }
    const float scale = 1.0f / (1.0f - rate_);
    mask_ = Tensor(x.shape());
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const float m = rng.next_float() >= rate_ ? scale : 0.0f;
        mask_[i] = m;
        out[i] = x[i] * m;
    }
    return out;
}

Tensor DropoutLayer::backward(const Tensor& grad_out) {
    if (mask_.empty()) return grad_out;  // eval pass was the identity
    return mul(grad_out, mask_);
}

DenseLayer::DenseLayer(Rng& rng, std::size_t in_width, std::size_t out_width) {
    weights = glorot_uniform(rng, in_width, out_width, {in_width, out_width});
    bias = zeros({out_width});
    grad_weights = zeros(weights.shape());
    grad_bias = zeros(bias.shape());
}

Tensor DenseLayer::forward(const Tensor& x) {
    if (x.rank() != 2 || x.dim(1) != weights.dim(0))
        throw std::invalid_argument("dense_forward: input " + shape_str(x.shape()) +
                                    " incompatible with weights " + shape_str(weights.shape()));
    Tensor y = matmul(x, weights);  // [N, out]
    const std::size_t N = y.dim(0), out_w = y.dim(1);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < out_w; ++j) y[n * out_w + j] += bias[j];
    cached_input_ = x;
    return y;
}

Tensor DenseLayer::backward(const Tensor& grad_out) {
    if (cached_input_.empty())
        throw std::logic_error("dense_backward: no cached forward pass");
    const std::size_t N = cached_input_.dim(0), out_w = weights.dim(1);
    if (!same_shape(grad_out.shape(), {N, out_w}))
        throw std::invalid_argument("dense_backward: grad shape " +
                                    shape_str(grad_out.shape()) + " does not match forward output");
    grad_weights = matmul_tn(cached_input_, grad_out);  // [in, out]
    grad_bias.fill(0.0f);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < out_w; ++j)
            grad_bias[j] += grad_out[n * out_w + j];
    return matmul_nt(grad_out, weights);  // [N, in]
}

float sigmoid_scalar(float x) {
    float y;
    if (x >= 0.0f) {
        const float e = std::exp(-x);
        y = 1.0f / (1.0f + e);
    } else {
        const float e = std::exp(x);
        y = e / (1.0f + e);
    }
    // keep the output strictly inside (0,1): f32 saturates to exactly 0/1
    // for |x| beyond ~17, which would poison log-loss terms downstream
    const float lo = std::numeric_limits<float>::min();
    const float hi = 1.0f - std::numeric_limits<float>::epsilon() / 2.0f;
    return std::min(std::max(y, lo), hi);
}

Tensor ActivationLayer::forward(const Tensor& x) {
    Tensor y(x.shape());
    if (kind_ == Act::relu) {
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = x[i] > 0.0f ? x[i] : 0.0f;
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid_scalar(x[i]);
    }
    cached_output_ = y;
    return y;
}

Tensor ActivationLayer::backward(const Tensor& grad_out) {
    if (cached_output_.empty())
        throw std::logic_error("activation_backward: no cached forward pass");
    if (!same_shape(grad_out.shape(), cached_output_.shape()))
        throw std::invalid_argument("activation_backward: shape mismatch");
    Tensor grad_in(grad_out.shape());
    if (kind_ == Act::relu) {
        for (std::size_t i = 0; i < grad_in.size(); ++i)
            grad_in[i] = cached_output_[i] > 0.0f ? grad_out[i] : 0.0f;
    } else {
        for (std::size_t i = 0; i < grad_in.size(); ++i) {
            const float y = cached_output_[i];
            grad_in[i] = grad_out[i] * y * (1.0f - y);
        }
    }
    return grad_in;
}

}  // namespace spamnet
