#include "spamnet/loss_optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spamnet {

namespace {
constexpr float kClamp = 1e-7f;
}

BceResult bce_loss(const Tensor& pred, const Tensor& target) {
    if (!same_shape(pred.shape(), target.shape()))
        throw std::invalid_argument("bce_loss: pred " + shape_str(pred.shape()) +
                                    " vs target " + shape_str(target.shape()));
    const std::size_t n = pred.size();
    if (n == 0) throw std::invalid_argument("bce_loss: empty batch");

    Tensor grad(pred.shape());
    double acc = 0.0;
    const float inv_n = 1.0f / static_cast<float>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float t = target[i];
        if (t != 0.0f && t != 1.0f)
            throw std::invalid_argument("bce_loss: target entries must be 0 or 1");
        const float p =
            std::min(std::max(pred[i], kClamp), 1.0f - kClamp);
        acc -= t * std::log(static_cast<double>(p)) +
               (1.0 - t) * std::log(1.0 - static_cast<double>(p));
        grad[i] = inv_n * (p - t) / (p * (1.0f - p));
    }
    return {static_cast<float>(acc / static_cast<double>(n)), std::move(grad)};
}

void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam_step: params/grads count mismatch");
    if (state.m.empty()) {
        for (const Tensor* p : params) {
            state.m.push_back(zeros(p->shape()));
            state.v.push_back(zeros(p->shape()));
        }
    }
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam_step: optimizer state tracks a different parameter list");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(static_cast<double>(state.beta1),
                                      static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(static_cast<double>(state.beta2),
                                      static_cast<double>(state.t));

    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        if (!same_shape(p.shape(), g.shape()) || !same_shape(p.shape(), m.shape()))
            throw std::invalid_argument("adam_step: shape mismatch in parameter group " +
                                        std::to_string(k));
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0f - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0f - state.beta2) * g[i] * g[i];
            const float mhat = static_cast<float>(m[i] / bc1);
            const float vhat = static_cast<float>(v[i] / bc2);
            p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

void sgd_step(const std::vector<Tensor*>& params,
              const std::vector<const Tensor*>& grads, float lr) {
    if (params.size() != grads.size())
        throw std::invalid_argument("sgd_step: params/grads count mismatch");
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        if (!same_shape(p.shape(), g.shape()))
            throw std::invalid_argument("sgd_step: shape mismatch in parameter group " +
                                        std::to_string(k));
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
    }
}

}  // namespace spamnet
