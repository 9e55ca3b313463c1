#include "spamnet/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace spamnet {

namespace {

void check_shape(const Shape& shape) {
    if (shape.empty())
        throw std::invalid_argument("tensor shape must have at least one dimension");
    for (std::size_t d : shape)
        if (d == 0)
            throw std::invalid_argument("tensor dimensions must be >= 1");
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_numel(shape_), 0.0f);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_numel(shape_))
        throw std::invalid_argument("tensor data length does not match shape " +
                                    shape_str(shape_));
}

void Tensor::fill(float value) {
    for (float& x : data_) x = value;
}

Tensor zeros(const Shape& shape) { return Tensor(shape); }

Tensor full(const Shape& shape, float value) {
    Tensor t(shape);
    t.fill(value);
    return t;
}

Tensor glorot_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out,
                      const Shape& shape) {
    if (fan_in == 0 || fan_out == 0)
        throw std::invalid_argument("glorot_uniform: fans must be positive");
    const float limit =
        std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = rng.uniform(-limit, limit);
    return t;
}

namespace {

void check_rank2(const Tensor& t, const char* who) {
    if (t.rank() != 2)
        throw std::invalid_argument(std::string(who) + ": rank-2 tensors required");
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_rank2(a, "matmul");
    check_rank2(b, "matmul");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k)
        throw std::invalid_argument("matmul: inner dimensions differ: " +
                                    shape_str(a.shape()) + " x " + shape_str(b.shape()));
    Tensor c({m, n});
    const float* pa = a.data();
    const float* pb = b.data();
    float* pc = c.data();
    // i-k-j order: unit-stride inner loop, fixed summation order.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            const float aik = pa[i * k + kk];
            const float* brow = pb + kk * n;
            float* crow = pc + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    check_rank2(a, "matmul_nt");
    check_rank2(b, "matmul_nt");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
    if (b.dim(1) != k)
        throw std::invalid_argument("matmul_nt: inner dimensions differ: " +
                                    shape_str(a.shape()) + " x " + shape_str(b.shape()) + "^T");
    Tensor c({m, n});
    const float* pa = a.data();
    const float* pb = b.data();
    float* pc = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = pa + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const float* brow = pb + j * k;
            float acc = 0.0f;
            for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
            pc[i * n + j] = acc;
        }
    }
    return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    check_rank2(a, "matmul_tn");
    check_rank2(b, "matmul_tn");
    const std::size_t k = a.dim(0), m = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k)
        throw std::invalid_argument("matmul_tn: inner dimensions differ: " +
                                    shape_str(a.shape()) + "^T x " + shape_str(b.shape()));
    Tensor c({m, n});
    const float* pa = a.data();
    const float* pb = b.data();
    float* pc = c.data();
    for (std::size_t kk = 0; kk < k; ++kk) {
        const float* arow = pa + kk * m;
        const float* brow = pb + kk * n;
        for (std::size_t i = 0; i < m; ++i) {
            const float aik = arow[i];
            float* crow = pc + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

namespace {

Tensor ew_check(const Tensor& a, const Tensor& b, const char* who) {
    if (!same_shape(a.shape(), b.shape()))
        throw std::invalid_argument(std::string(who) + ": shape mismatch " +
                                    shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    return Tensor(a.shape());
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    Tensor c = ew_check(a, b, "add");
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    Tensor c = ew_check(a, b, "sub");
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] - b[i];
    return c;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    Tensor c = ew_check(a, b, "mul");
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] * b[i];
    return c;
}

Tensor reshape(const Tensor& t, Shape new_shape) {
    check_shape(new_shape);
    if (shape_numel(new_shape) != t.size())
        throw std::invalid_argument("reshape: element count mismatch: " +
                                    shape_str(t.shape()) + " -> " + shape_str(new_shape));
    return Tensor(std::move(new_shape),
                  std::vector<float>(t.data(), t.data() + t.size()));
}

}  // namespace spamnet
