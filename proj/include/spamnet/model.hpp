#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spamnet/data.hpp"
#include "spamnet/layers.hpp"
#include "spamnet/loss_optim.hpp"
#include "spamnet/rng.hpp"
#include "spamnet/tensor.hpp"

namespace spamnet {

// conv(3>32,same) relu conv(32>32,valid) relu pool drop
// conv(32>64,same) relu conv(64>64,valid) relu pool drop
// flatten dense(9216>128) relu drop dense(128>1) sigmoid
class SpamNet {
public:
    explicit SpamNet(Rng& rng, float dropout_rate = 0.25f);

    Tensor forward(const Tensor& x, Rng& rng);  // x: [N,3,56,56] -> [N,1]
    Tensor backward(const Tensor& grad_out);    // grad wrt the sigmoid output

    void set_training(bool on);
    bool training() const { return training_; }

    std::vector<Tensor*> params();
    std::vector<const Tensor*> grads() const;
    std::size_t param_count() const;

    // output shape of every layer from the last forward, in stack order
    const std::vector<Shape>& last_layer_shapes() const { return layer_shapes_; }

    Conv2DLayer conv1, conv2, conv3, conv4;
    ActivationLayer act1, act2, act3, act4, act5;
    MaxPool2DLayer pool1, pool2;
    DropoutLayer drop1, drop2, drop3;
    DenseLayer fc1, fc2;
    ActivationLayer out_act;

private:
    bool training_ = true;
    Shape pre_flatten_;  // to unflatten the gradient on the way back
    std::vector<Shape> layer_shapes_;
};

SpamNet build_spamnet(Rng& rng, float dropout_rate = 0.25f);

struct StepResult {
    float loss;    // pre-update loss of this batch
    Tensor probs;  // train-mode forward outputs, [B,1]
};

// forward + BCE + backward + one Adam step over every parameter
StepResult train_step_ex(SpamNet& net, const Tensor& images,
                         const Tensor& labels, AdamState& adam, Rng& rng);
float train_step(SpamNet& net, const Tensor& images, const Tensor& labels,
                 AdamState& adam, Rng& rng);

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t epochs = 1000;
    float dropout_rate = 0.25f;
    std::uint64_t seed = 42;
    std::size_t checkpoint_every = 0;  // 0 disables periodic saving
    std::string checkpoint_path;       // used when checkpoint_every > 0
    float threshold = 0.5f;
};

struct TrainLogEntry {
    std::size_t epoch;  // 1-based
    float loss;         // mean over batches, weighted by batch size
    float accuracy;     // train-mode accuracy at threshold 0.5
};

std::vector<TrainLogEntry> fit(SpamNet& net, const Dataset& train_set,
                               const TrainConfig& config, AdamState& adam);

struct Prediction {
    Tensor probs;             // [N,1]
    std::vector<int> labels;  // 1 iff prob >= threshold
};

// Eval-mode inference; the network is left in eval mode afterwards.
Prediction predict(SpamNet& net, const Tensor& images, float threshold = 0.5f);

enum class CheckpointErrorKind {
    io,
    bad_magic,
    version_mismatch,
    truncated,
    inconsistent,
};

struct CheckpointError : std::runtime_error {
    CheckpointError(CheckpointErrorKind k, const std::string& msg)
        : std::runtime_error(msg), kind(k) {}
    CheckpointErrorKind kind;
};

// Binary checkpoint: magic "DISC", u32 version, u32 tensor count, then per
// tensor u16 name length + name + u8 rank + u32 dims + little-endian f32
// payload. Tensor order is fixed, so identical state gives identical bytes.
void save_checkpoint(const SpamNet& net, const AdamState* adam,
                     std::uint64_t epoch, std::uint64_t seed,
                     const std::string& path);

struct LoadedCheckpoint {
    SpamNet net;
    AdamState adam;
    bool has_adam = false;
    std::uint64_t epoch = 0;
    std::uint64_t seed = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace spamnet
