#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spamnet/rng.hpp"

namespace spamnet {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
bool same_shape(const Shape& a, const Shape& b);
std::string shape_str(const Shape& shape);

// Dense 32-bit float array, row-major (last index fastest). The one value
// type shared by every module: images, activations, weights, gradients.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);                    // zero-filled
    Tensor(Shape shape, std::vector<float> data);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_[i]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    void fill(float value);

private:
    Shape shape_;
    std::vector<float> data_;
};

Tensor zeros(const Shape& shape);
Tensor full(const Shape& shape, float value);

// Entries i.i.d. uniform on [-L, L], L = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out,
                      const Shape& shape);

// C = A * B for rank-2 tensors [m,k] x [k,n] -> [m,n].
Tensor matmul(const Tensor& a, const Tensor& b);
// C = A * B^T for A [m,k], B [n,k] -> [m,n].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// C = A^T * B for A [k,m], B [k,n] -> [m,n].
Tensor matmul_tn(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

// Same flat buffer, new shape; element counts must match.
Tensor reshape(const Tensor& t, Shape new_shape);

}  // namespace spamnet
