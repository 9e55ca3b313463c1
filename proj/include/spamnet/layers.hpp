#pragma once

#include <cstddef>
#include <vector>

#include "spamnet/rng.hpp"
#include "spamnet/tensor.hpp"

namespace spamnet {

enum class Padding { same, valid };
enum class Act { relu, sigmoid };

// 3x3 kernels, stride 1, cross-correlation. Backward fills grad_weights /
// grad_bias for the whole batch and returns the input gradient.
class Conv2DLayer {
public:
    Conv2DLayer(Rng& rng, std::size_t in_channels, std::size_t out_channels,
                Padding padding);

    Tensor forward(const Tensor& x);          // x: [N,C_in,H,W]
    Tensor backward(const Tensor& grad_out);  // grad_out: forward output shape

    std::size_t in_channels() const { return in_channels_; }
    std::size_t out_channels() const { return out_channels_; }
    Padding padding() const { return padding_; }

    Tensor weights;  // [C_out, C_in, 3, 3]
    Tensor bias;     // [C_out]
    Tensor grad_weights;
    Tensor grad_bias;

private:
    std::size_t in_channels_;
    std::size_t out_channels_;
    Padding padding_;
    Tensor cached_input_;
};

// 2x2 window, stride 2, trailing odd row/column dropped. Ties go to the
// first element in row-major window order so backward is reproducible.
class MaxPool2DLayer {
public:
    Tensor forward(const Tensor& x);          // [N,C,H,W] -> [N,C,H/2,W/2]
    Tensor backward(const Tensor& grad_out);

private:
    Shape input_shape_;
    std::vector<std::size_t> argmax_;  // flat input index per output cell
};

// Inverted dropout: kept entries scaled by 1/(1-rate) at train time so
// eval mode is the exact identity.
class DropoutLayer {
public:
    explicit DropoutLayer(float rate);

    Tensor forward(const Tensor& x, Rng& rng);
    Tensor backward(const Tensor& grad_out);

    void set_training(bool on) { training_ = on; }
    bool training() const { return training_; }
    float rate() const { return rate_; }

private:
    float rate_;
    bool training_ = true;
    Tensor mask_;  // already scaled by 1/(1-rate); empty in eval passes
};

class DenseLayer {
public:
    DenseLayer(Rng& rng, std::size_t in_width, std::size_t out_width);

    Tensor forward(const Tensor& x);          // [N,in] -> [N,out]
    Tensor backward(const Tensor& grad_out);

    Tensor weights;  // [in, out]
    Tensor bias;     // [out]
    Tensor grad_weights;
    Tensor grad_bias;

private:
    Tensor cached_input_;
};

class ActivationLayer {
public:
    explicit ActivationLayer(Act kind) : kind_(kind) {}

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);

    Act kind() const { return kind_; }

private:
    Act kind_;
    Tensor cached_output_;
};

float sigmoid_scalar(float x);

}  // namespace spamnet
