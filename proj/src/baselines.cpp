#include "spamnet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spamnet/rng.hpp"

namespace spamnet {

namespace {

int quant4(float c) {
    const int q = static_cast<int>(c * 4.0f);
    return std::clamp(q, 0, 3);
}

void require_chw(const Tensor& t) {
    if (t.rank() != 3 || t.dim(0) != 3)
        throw std::invalid_argument("expected a [3,H,W] image, got " +
                                    shape_str(t.shape()));
}

}  // namespace

ColorHistogram color_histogram(const Tensor& chw) {
    require_chw(chw);
    const std::size_t hw = chw.dim(1) * chw.dim(2);
    ColorHistogram h;
    for (std::size_t i = 0; i < hw; ++i) {
        const int r = quant4(chw[i]);
        const int g = quant4(chw[hw + i]);
        const int b = quant4(chw[2 * hw + i]);
        h.bins[r * 16 + g * 4 + b] += 1.0f;
    }
    const float inv = 1.0f / static_cast<float>(hw);
    for (float& v : h.bins) v *= inv;
    return h;
}

float peak_spam_score(const ColorHistogram& h, std::size_t top_k) {
    std::array<float, 64> sorted = h.bins;
    const std::size_t k = std::min<std::size_t>(top_k, sorted.size());
    std::partial_sort(sorted.begin(), sorted.begin() + k, sorted.end(),
                      std::greater<float>());
    double mass = 0.0;
    for (std::size_t i = 0; i < k; ++i) mass += sorted[i];
    return static_cast<float>(mass);
}

int histogram_label(const Tensor& chw, std::size_t top_k, float tau) {
    return peak_spam_score(color_histogram(chw), top_k) >= tau ? 1 : 0;
}

HogDescriptor hog_features(const Tensor& chw) {
    require_chw(chw);
    if (chw.dim(1) != 56 || chw.dim(2) != 56)
        throw std::invalid_argument("descriptor geometry assumes 56x56 input, got " +
                                    shape_str(chw.shape()));
    constexpr int kSide = 56, kCell = 8, kCells = 7, kBins = 9, kBlocks = 6;
    const std::size_t hw = kSide * kSide;

    std::vector<float> gray(hw);
    for (std::size_t i = 0; i < hw; ++i)
        gray[i] = 0.299f * chw[i] + 0.587f * chw[hw + i] + 0.114f * chw[2 * hw + i];

    float cells[kCells][kCells][kBins] = {};
    for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
            const int xl = std::max(x - 1, 0), xr = std::min(x + 1, kSide - 1);
            const int yu = std::max(y - 1, 0), yd = std::min(y + 1, kSide - 1);
            const float gx = gray[y * kSide + xr] - gray[y * kSide + xl];
            const float gy = gray[yd * kSide + x] - gray[yu * kSide + x];
            const float mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0f) continue;

            float deg = std::atan2(gy, gx) * (180.0f / 3.14159265358979323846f);
            if (deg < 0.0f) deg += 180.0f;
            if (deg >= 180.0f) deg -= 180.0f;
            const float pos = deg / 20.0f;  // [0,9)
            const int lo = static_cast<int>(pos);
            const float t = pos - static_cast<float>(lo);

            float* hist = cells[y / kCell][x / kCell];
            hist[lo % kBins] += mag * (1.0f - t);
            hist[(lo + 1) % kBins] += mag * t;
        }
    }

    HogDescriptor out;
    out.values.reserve(kBlocks * kBlocks * 4 * kBins);
    for (int by = 0; by < kBlocks; ++by) {
        for (int bx = 0; bx < kBlocks; ++bx) {
            double sum_sq = 0.0;
            for (int cy = 0; cy < 2; ++cy)
                for (int cx = 0; cx < 2; ++cx)
                    for (int b = 0; b < kBins; ++b) {
                        const float v = cells[by + cy][bx + cx][b];
                        sum_sq += static_cast<double>(v) * v;
                    }
            const float inv = 1.0f / std::sqrt(static_cast<float>(sum_sq) + 1e-6f);
            for (int cy = 0; cy < 2; ++cy)
                for (int cx = 0; cx < 2; ++cx)
                    for (int b = 0; b < kBins; ++b)
                        out.values.push_back(cells[by + cy][bx + cx][b] * inv);
        }
    }
    return out;
}

float LinearClassifier::score(const std::vector<float>& x) const {
    if (x.size() != weights.size())
        throw std::invalid_argument("feature length does not match the classifier");
    double acc = bias;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += static_cast<double>(weights[i]) * x[i];
    return static_cast<float>(acc);
}

int LinearClassifier::decide(const std::vector<float>& x) const {
    return score(x) >= 0.0f ? 1 : -1;
}

LinearClassifier train_linear(const std::vector<std::vector<float>>& features,
                              const std::vector<int>& labels,
                              std::size_t epochs, float lr, float reg,
                              std::uint64_t seed,
                              std::vector<float>* objective_log) {
    if (features.empty() || features.size() != labels.size())
        throw std::invalid_argument("train_linear: features and labels must pair up");
    const std::size_t dim = features.front().size();
    if (dim == 0) throw std::invalid_argument("train_linear: empty feature vectors");
    bool saw_pos = false, saw_neg = false;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != dim)
            throw std::invalid_argument("train_linear: ragged feature lengths");
        if (labels[i] == 1)
            saw_pos = true;
        else if (labels[i] == -1)
            saw_neg = true;
        else
            throw std::invalid_argument("train_linear: labels must be -1 or +1");
    }
    if (!saw_pos || !saw_neg)
        throw std::invalid_argument("train_linear: need both classes present");

    LinearClassifier clf;
    clf.weights.assign(dim, 0.0f);
    Rng rng(seed);
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (const std::size_t i : order) {
            const std::vector<float>& x = features[i];
            const float y = static_cast<float>(labels[i]);
            double wx = clf.bias;
            for (std::size_t d = 0; d < dim; ++d)
                wx += static_cast<double>(clf.weights[d]) * x[d];
            const bool in_margin = y * wx < 1.0;
            const float shrink = 1.0f - lr * reg;
            for (std::size_t d = 0; d < dim; ++d) {
                clf.weights[d] *= shrink;
                if (in_margin) clf.weights[d] += lr * y * x[d];
            }
            if (in_margin) clf.bias += lr * y;
        }
        if (objective_log != nullptr) {
            double hinge = 0.0, w2 = 0.0;
            for (std::size_t i = 0; i < features.size(); ++i) {
                const double m = static_cast<double>(labels[i]) *
                                 clf.score(features[i]);
                hinge += std::max(0.0, 1.0 - m);
            }
            for (const float w : clf.weights) w2 += static_cast<double>(w) * w;
            objective_log->push_back(static_cast<float>(
                hinge / static_cast<double>(features.size()) + 0.5 * reg * w2));
        }
    }
    return clf;
}

}  // namespace spamnet
