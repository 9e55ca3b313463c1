#pragma once

#include <cstdint>
#include <vector>

#include "spamnet/tensor.hpp"

namespace spamnet {

struct BceResult {
    float loss;
    Tensor grad;  // d loss / d pred, same shape as pred
};

// Mean binary cross-entropy over the batch. Predictions are clamped to
// [1e-7, 1-1e-7] before the logs; targets must be exactly 0 or 1.
BceResult bce_loss(const Tensor& pred, const Tensor& target);

struct AdamState {
    float lr = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
    std::uint64_t t = 0;
    std::vector<Tensor> m;  // first moments, parallel to the param list
    std::vector<Tensor> v;  // second moments
};

// One bias-corrected Adam update over all parameter tensors. Moments are
// allocated lazily on the first step and must stay aligned with `params`
// afterwards.
void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads);

void sgd_step(const std::vector<Tensor*>& params,
              const std::vector<const Tensor*>& grads, float lr);

}  // namespace spamnet
