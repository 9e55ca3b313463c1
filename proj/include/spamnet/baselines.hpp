#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "spamnet/tensor.hpp"

namespace spamnet {

// 4x4x4 uniform RGB quantization of a [3,H,W] image in [0,1]; bins sum to 1
struct ColorHistogram {
    std::array<float, 64> bins{};
};

ColorHistogram color_histogram(const Tensor& chw);

// mass held by the top_k heaviest bins; text rendered on flat fills piles
// nearly everything into a handful of bins, photographs spread out
float peak_spam_score(const ColorHistogram& h, std::size_t top_k = 8);

// 1 (spam) iff peak_spam_score >= tau
int histogram_label(const Tensor& chw, std::size_t top_k = 8, float tau = 0.6f);

// Gradient-orientation descriptor of a [3,56,56] image:
//   gray = 0.299 R + 0.587 G + 0.114 B
//   central differences with replicated edges
//   unsigned angle (mod 180 deg) voted into 9 bins, centers at 0,20,...,160,
//   magnitude split linearly between the two nearest centers (wrapping)
//   8x8-pixel cells (7x7 of them), 2x2-cell blocks at cell stride 1 (6x6),
//   each 36-value block scaled by 1/sqrt(sum of squares + 1e-6)
// Layout: block row-major, then cell row-major within the block, then bins.
struct HogDescriptor {
    std::vector<float> values;  // 6*6*4*9 = 1296
};

HogDescriptor hog_features(const Tensor& chw);

struct LinearClassifier {
    std::vector<float> weights;
    float bias = 0.0f;

    float score(const std::vector<float>& x) const;
    int decide(const std::vector<float>& x) const;  // +1 iff score >= 0
};

// Per-sample subgradient descent on (1/n) sum hinge(y (w.x + b)) +
// (reg/2) |w|^2 with a seeded reshuffle every epoch. Labels are -1 / +1.
// When objective_log is given it receives the post-epoch objective values.
LinearClassifier train_linear(const std::vector<std::vector<float>>& features,
                              const std::vector<int>& labels,
                              std::size_t epochs, float lr, float reg,
                              std::uint64_t seed = 42,
                              std::vector<float>* objective_log = nullptr);

}  // namespace spamnet
