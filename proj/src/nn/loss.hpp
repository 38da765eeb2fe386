#pragma once

#include <cmath>
#include <vector>

#include "nn/tensor.hpp"

namespace advkit::nn {

template <class S>
struct LossResult {
    double value = 0.0;
    Tensor<S> grad;  // d loss / d input, same shape as the input
};

template <class S>
inline Tensor<S> softmax_rows(const Tensor<S>& logits) {
    require(logits.rank() == 2, ErrorCode::invalid_input, "softmax expects [batch, classes]");
    const int b = logits.dim(0), k = logits.dim(1);
    Tensor<S> probs(logits.shape);
    for (int i = 0; i < b; ++i) {
        double mx = logits.at(i, 0);
        for (int j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(logits.at(i, j)));
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += std::exp(static_cast<double>(logits.at(i, j)) - mx);
        for (int j = 0; j < k; ++j)
            probs.at(i, j) = static_cast<S>(std::exp(static_cast<double>(logits.at(i, j)) - mx) / sum);
    }
    return probs;
}

// Mean cross-entropy toward the requested target class of each row.
template <class S>
inline LossResult<S> targeted_cross_entropy(const Tensor<S>& logits, const std::vector<int>& targets) {
    require(logits.rank() == 2, ErrorCode::invalid_input, "cross entropy expects [batch, classes]");
    const int b = logits.dim(0), k = logits.dim(1);
    require(static_cast<int>(targets.size()) == b, ErrorCode::invalid_input, "one target per row required");
    LossResult<S> out;
    out.grad = Tensor<S>(logits.shape);
    double total = 0.0;
    for (int i = 0; i < b; ++i) {
        const int t = targets[i];
        require(t >= 0 && t < k, ErrorCode::invalid_input, "target class out of range");
        double mx = logits.at(i, 0);
        for (int j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(logits.at(i, j)));
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += std::exp(static_cast<double>(logits.at(i, j)) - mx);
        const double lse = mx + std::log(sum);
        total += lse - logits.at(i, t);
        for (int j = 0; j < k; ++j) {
            const double p = std::exp(static_cast<double>(logits.at(i, j)) - mx) / sum;
            out.grad.at(i, j) = static_cast<S>((p - (j == t ? 1.0 : 0.0)) / b);
        }
    }
    out.value = total / b;
    return out;
}

// Negative mean target logit; a margin-free alternative to cross-entropy that
// keeps pushing the target logit up even when softmax has saturated.
template <class S>
inline LossResult<S> targeted_logit_loss(const Tensor<S>& logits, const std::vector<int>& targets) {
    require(logits.rank() == 2, ErrorCode::invalid_input, "logit loss expects [batch, classes]");
    const int b = logits.dim(0), k = logits.dim(1);
    require(static_cast<int>(targets.size()) == b, ErrorCode::invalid_input, "one target per row required");
    LossResult<S> out;
    out.grad = Tensor<S>(logits.shape);
    double total = 0.0;
    for (int i = 0; i < b; ++i) {
        const int t = targets[i];
        require(t >= 0 && t < k, ErrorCode::invalid_input, "target class out of range");
        total -= logits.at(i, t);
        out.grad.at(i, t) = static_cast<S>(-1.0 / b);
    }
    out.value = total / b;
    return out;
}

// Mean squared distance between embedding rows and per-row reference rows.
template <class S>
inline LossResult<S> embedding_distance(const Tensor<S>& emb, const Tensor<S>& ref) {
    require(emb.rank() == 2 && emb.same_shape(ref), ErrorCode::invalid_input,
            "embedding loss expects matching [batch, dim] tensors");
    const int b = emb.dim(0), d = emb.dim(1);
    LossResult<S> out;
    out.grad = Tensor<S>(emb.shape);
    double total = 0.0;
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < d; ++j) {
            const double diff = static_cast<double>(emb.at(i, j)) - ref.at(i, j);
            total += diff * diff;
            out.grad.at(i, j) = static_cast<S>(2.0 * diff / b);
        }
    out.value = total / b;
    return out;
}

template <class S>
inline int argmax_row(const Tensor<S>& logits, int row) {
    const int k = logits.dim(1);
    int best = 0;
    for (int j = 1; j < k; ++j)
        if (logits.at(row, j) > logits.at(row, best)) best = j;
    return best;
}

}  // namespace advkit::nn
