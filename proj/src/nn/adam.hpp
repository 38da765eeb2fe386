#pragma once

#include <cmath>
#include <vector>

#include "nn/layers.hpp"

namespace advkit::nn {

template <class S>
class Adam {
public:
    Adam(std::vector<Param<S>*> params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (auto* p : params_) {
            m_.emplace_back(p->trainable ? Tensor<S>(p->value.shape) : Tensor<S>{});
            v_.emplace_back(p->trainable ? Tensor<S>(p->value.shape) : Tensor<S>{});
        }
    }

    void zero_grad() { zero_grads(params_); }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Param<S>* p = params_[i];
            if (!p->trainable) continue;
            for (std::size_t j = 0; j < p->value.data.size(); ++j) {
                const double g = p->grad.data[j];
                const double mj = beta1_ * m_[i].data[j] + (1.0 - beta1_) * g;
                const double vj = beta2_ * v_[i].data[j] + (1.0 - beta2_) * g * g;
                m_[i].data[j] = static_cast<S>(mj);
                v_[i].data[j] = static_cast<S>(vj);
                const double mhat = mj / bc1;
                const double vhat = vj / bc2;
                p->value.data[j] -= static_cast<S>(lr_ * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }

private:
    std::vector<Param<S>*> params_;
    std::vector<Tensor<S>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

}  // namespace advkit::nn
