#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "common/error.hpp"

namespace advkit::nn {

// Dense row-major tensor, rank 1..4. Image batches are [B, C, H, W].
template <class S>
struct Tensor {
    std::vector<int> shape;
    std::vector<S> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> sh) : shape(std::move(sh)), data(checked_numel(shape), S(0)) {}
    Tensor(std::initializer_list<int> sh) : Tensor(std::vector<int>(sh)) {}

    static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

    static std::int64_t checked_numel(const std::vector<int>& sh) {
        require(!sh.empty() && sh.size() <= 4, ErrorCode::invalid_input, "tensor rank must be 1..4");
        std::int64_t n = 1;
        for (int d : sh) {
            require(d >= 0, ErrorCode::invalid_input, "negative tensor dimension");
            n *= d;
        }
        return n;
    }

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    S& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    const S& operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    // rank-4 accessors
    S& at(int b, int c, int h, int w) {
        return data[((static_cast<std::int64_t>(b) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    const S& at(int b, int c, int h, int w) const {
        return data[((static_cast<std::int64_t>(b) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    // rank-2 accessors
    S& at(int r, int c) { return data[static_cast<std::int64_t>(r) * shape[1] + c]; }
    const S& at(int r, int c) const { return data[static_cast<std::int64_t>(r) * shape[1] + c]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void fill(S v) { std::fill(data.begin(), data.end(), v); }

    Tensor& operator+=(const Tensor& o) {
        require(same_shape(o), ErrorCode::invalid_input, "tensor shape mismatch in +=");
        for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
        return *this;
    }

    S max_abs() const {
        S m = 0;
        for (S v : data) {
            const S a = v < 0 ? -v : v;
            if (a > m) m = a;
        }
        return m;
    }

    bool all_finite() const {
        for (S v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <class T>
    Tensor<T> cast() const {
        Tensor<T> out(shape);
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
        return out;
    }
};

template <class S>
Tensor<S> clamp01(const Tensor<S>& x) {
    Tensor<S> y = x;
    for (auto& v : y.data) v = v < S(0) ? S(0) : (v > S(1) ? S(1) : v);
    return y;
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace advkit::nn
