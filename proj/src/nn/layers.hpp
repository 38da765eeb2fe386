#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "common/rng.hpp"
#include "nn/tensor.hpp"

namespace advkit::nn {

template <class S>
struct Param {
    std::string name;
    Tensor<S> value;
    Tensor<S> grad;
    bool trainable = true;
};

template <class S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MapRM = Eigen::Map<MatRM<S>>;
template <class S>
using ConstMapRM = Eigen::Map<const MatRM<S>>;

template <class S>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<S> forward(const Tensor<S>& x, bool train) = 0;
    virtual Tensor<S> backward(const Tensor<S>& gy) = 0;
    virtual void collect_params(std::vector<Param<S>*>& out) {}
};

// ---------------------------------------------------------------------------
// Convolution, zero padding, square kernel. im2col + GEMM per image.

template <class S>
class Conv2d final : public Layer<S> {
public:
    Conv2d(std::string name, int in_ch, int out_ch, int ksize, int stride, int pad, Rng& rng, bool zero_init = false)
        : in_ch_(in_ch), out_ch_(out_ch), k_(ksize), stride_(stride), pad_(pad) {
        weight_.name = name + ".weight";
        weight_.value = Tensor<S>({out_ch, in_ch, ksize, ksize});
        weight_.grad = Tensor<S>(weight_.value.shape);
        bias_.name = name + ".bias";
        bias_.value = Tensor<S>({out_ch});
        bias_.grad = Tensor<S>({out_ch});
        if (!zero_init) {
            const double std = std::sqrt(2.0 / (static_cast<double>(in_ch) * ksize * ksize));
            for (auto& v : weight_.value.data) v = static_cast<S>(rng.normal(0.0, std));
        }
    }

    Tensor<S> forward(const Tensor<S>& x, bool) override {
        require(x.rank() == 4 && x.dim(1) == in_ch_, ErrorCode::invalid_input, "conv input shape mismatch");
        x_ = x;
        const int b = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int ho = (h + 2 * pad_ - k_) / stride_ + 1;
        const int wo = (w + 2 * pad_ - k_) / stride_ + 1;
        require(ho >= 1 && wo >= 1, ErrorCode::invalid_input, "conv output would be empty");
        const int rows = in_ch_ * k_ * k_;
        const std::int64_t cols = static_cast<std::int64_t>(ho) * wo;
        col_.resize(static_cast<std::size_t>(rows) * cols);
        Tensor<S> y({b, out_ch_, ho, wo});
        ConstMapRM<S> wm(weight_.value.ptr(), out_ch_, rows);
        for (int i = 0; i < b; ++i) {
            im2col(x, i, ho, wo);
            ConstMapRM<S> cm(col_.data(), rows, cols);
            MapRM<S> om(y.ptr() + static_cast<std::int64_t>(i) * out_ch_ * cols, out_ch_, cols);
            om.noalias() = wm * cm;
            for (int oc = 0; oc < out_ch_; ++oc) om.row(oc).array() += bias_.value[oc];
        }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& gy) override {
        const int b = x_.dim(0), h = x_.dim(2), w = x_.dim(3);
        const int ho = gy.dim(2), wo = gy.dim(3);
        const int rows = in_ch_ * k_ * k_;
        const std::int64_t cols = static_cast<std::int64_t>(ho) * wo;
        Tensor<S> gx(x_.shape);
        std::vector<S> gcol(static_cast<std::size_t>(rows) * cols);
        ConstMapRM<S> wm(weight_.value.ptr(), out_ch_, rows);
        MapRM<S> gwm(weight_.grad.ptr(), out_ch_, rows);
        for (int i = 0; i < b; ++i) {
            ConstMapRM<S> gm(gy.ptr() + static_cast<std::int64_t>(i) * out_ch_ * cols, out_ch_, cols);
            im2col(x_, i, ho, wo);
            ConstMapRM<S> cm(col_.data(), rows, cols);
            gwm.noalias() += gm * cm.transpose();
            for (int oc = 0; oc < out_ch_; ++oc) bias_.grad[oc] += gm.row(oc).sum();
            MapRM<S> gcm(gcol.data(), rows, cols);
            gcm.noalias() = wm.transpose() * gm;
            col2im(gcol, gx, i, ho, wo, h, w);
        }
        return gx;
    }

    void collect_params(std::vector<Param<S>*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

    const Param<S>& weight() const { return weight_; }

private:
    void im2col(const Tensor<S>& x, int img, int ho, int wo) {
        const int h = x.dim(2), w = x.dim(3);
        S* dst = col_.data();
        for (int c = 0; c < in_ch_; ++c) {
            const S* plane = x.ptr() + ((static_cast<std::int64_t>(img) * in_ch_ + c) * h) * w;
            for (int ki = 0; ki < k_; ++ki)
                for (int kj = 0; kj < k_; ++kj) {
                    for (int i = 0; i < ho; ++i) {
                        const int src_h = i * stride_ - pad_ + ki;
                        if (src_h < 0 || src_h >= h) {
                            for (int j = 0; j < wo; ++j) *dst++ = S(0);
                            continue;
                        }
                        const S* row = plane + static_cast<std::int64_t>(src_h) * w;
                        for (int j = 0; j < wo; ++j) {
                            const int src_w = j * stride_ - pad_ + kj;
                            *dst++ = (src_w >= 0 && src_w < w) ? row[src_w] : S(0);
                        }
                    }
                }
        }
    }

    void col2im(const std::vector<S>& gcol, Tensor<S>& gx, int img, int ho, int wo, int h, int w) {
        const S* src = gcol.data();
        for (int c = 0; c < in_ch_; ++c) {
            S* plane = gx.ptr() + ((static_cast<std::int64_t>(img) * in_ch_ + c) * h) * w;
            for (int ki = 0; ki < k_; ++ki)
                for (int kj = 0; kj < k_; ++kj) {
                    for (int i = 0; i < ho; ++i) {
                        const int src_h = i * stride_ - pad_ + ki;
                        if (src_h < 0 || src_h >= h) {
                            src += wo;
                            continue;
                        }
                        S* row = plane + static_cast<std::int64_t>(src_h) * w;
                        for (int j = 0; j < wo; ++j) {
                            const int src_w = j * stride_ - pad_ + kj;
                            if (src_w >= 0 && src_w < w) row[src_w] += src[j];
                        }
                        src += wo;
                    }
                }
        }
    }

    int in_ch_, out_ch_, k_, stride_, pad_;
    Param<S> weight_, bias_;
    Tensor<S> x_;
    std::vector<S> col_;
};

// ---------------------------------------------------------------------------

template <class S>
class Linear final : public Layer<S> {
public:
    Linear(std::string name, int in, int out, Rng& rng, double gain = 1.4142135623730951)
        : in_(in), out_(out) {
        weight_.name = name + ".weight";
        weight_.value = Tensor<S>({out, in});
        weight_.grad = Tensor<S>({out, in});
        bias_.name = name + ".bias";
        bias_.value = Tensor<S>({out});
        bias_.grad = Tensor<S>({out});
        const double std = gain / std::sqrt(static_cast<double>(in));
        for (auto& v : weight_.value.data) v = static_cast<S>(rng.normal(0.0, std));
    }

    Tensor<S> forward(const Tensor<S>& x, bool) override {
        require(x.rank() == 2 && x.dim(1) == in_, ErrorCode::invalid_input, "linear input shape mismatch");
        x_ = x;
        const int b = x.dim(0);
        Tensor<S> y({b, out_});
        ConstMapRM<S> xm(x.ptr(), b, in_);
        ConstMapRM<S> wm(weight_.value.ptr(), out_, in_);
        MapRM<S> ym(y.ptr(), b, out_);
        ym.noalias() = xm * wm.transpose();
        for (int i = 0; i < b; ++i) ym.row(i) += ConstMapRM<S>(bias_.value.ptr(), 1, out_);
        return y;
    }

    Tensor<S> backward(const Tensor<S>& gy) override {
        const int b = x_.dim(0);
        ConstMapRM<S> gm(gy.ptr(), b, out_);
        ConstMapRM<S> xm(x_.ptr(), b, in_);
        ConstMapRM<S> wm(weight_.value.ptr(), out_, in_);
        MapRM<S>(weight_.grad.ptr(), out_, in_).noalias() += gm.transpose() * xm;
        for (int o = 0; o < out_; ++o) bias_.grad[o] += gm.col(o).sum();
        Tensor<S> gx({b, in_});
        MapRM<S>(gx.ptr(), b, in_).noalias() = gm * wm;
        return gx;
    }

    void collect_params(std::vector<Param<S>*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

    const Param<S>& weight() const { return weight_; }
    Param<S>& weight_mut() { return weight_; }
    Param<S>& bias_mut() { return bias_; }

private:
    int in_, out_;
    Param<S> weight_, bias_;
    Tensor<S> x_;
};

// ---------------------------------------------------------------------------

template <class S>
class ReLU final : public Layer<S> {
public:
    Tensor<S> forward(const Tensor<S>& x, bool) override {
        y_ = x;
        for (auto& v : y_.data)
            if (v < S(0)) v = S(0);
        return y_;
    }
    Tensor<S> backward(const Tensor<S>& gy) override {
        Tensor<S> gx = gy;
        for (std::size_t i = 0; i < gx.data.size(); ++i)
            if (y_.data[i] <= S(0)) gx.data[i] = S(0);
        return gx;
    }

private:
    Tensor<S> y_;
};

template <class S>
class Scale final : public Layer<S> {
public:
    explicit Scale(S factor) : factor_(factor) {}
    Tensor<S> forward(const Tensor<S>& x, bool) override {
        Tensor<S> y = x;
        for (auto& v : y.data) v *= factor_;
        return y;
    }
    Tensor<S> backward(const Tensor<S>& gy) override {
        Tensor<S> gx = gy;
        for (auto& v : gx.data) v *= factor_;
        return gx;
    }

private:
    S factor_;
};

template <class S>
class TanhLayer final : public Layer<S> {
public:
    Tensor<S> forward(const Tensor<S>& x, bool) override {
        y_ = x;
        for (auto& v : y_.data) v = std::tanh(v);
        return y_;
    }
    Tensor<S> backward(const Tensor<S>& gy) override {
        Tensor<S> gx = gy;
        for (std::size_t i = 0; i < gx.data.size(); ++i) gx.data[i] *= S(1) - y_.data[i] * y_.data[i];
        return gx;
    }

private:
    Tensor<S> y_;
};

// ---------------------------------------------------------------------------
// Normalization layers. Batch norm keeps running statistics (buffers, saved in
// checkpoints); instance norm is stateless across the batch dimension.

template <class S>
class BatchNorm2d final : public Layer<S> {
public:
    BatchNorm2d(std::string name, int channels, double momentum = 0.1, double eps = 1e-5)
        : ch_(channels), momentum_(momentum), eps_(eps) {
        gamma_.name = name + ".gamma";
        gamma_.value = Tensor<S>({channels});
        gamma_.grad = Tensor<S>({channels});
        gamma_.value.fill(S(1));
        beta_.name = name + ".beta";
        beta_.value = Tensor<S>({channels});
        beta_.grad = Tensor<S>({channels});
        run_mean_.name = name + ".running_mean";
        run_mean_.value = Tensor<S>({channels});
        run_mean_.trainable = false;
        run_var_.name = name + ".running_var";
        run_var_.value = Tensor<S>({channels});
        run_var_.value.fill(S(1));
        run_var_.trainable = false;
    }

    Tensor<S> forward(const Tensor<S>& x, bool train) override {
        require(x.rank() == 4 && x.dim(1) == ch_, ErrorCode::invalid_input, "batchnorm input shape mismatch");
        train_ = train;
        const int b = x.dim(0), h = x.dim(2), w = x.dim(3);
        const std::int64_t n = static_cast<std::int64_t>(b) * h * w;
        xhat_ = Tensor<S>(x.shape);
        inv_std_.assign(static_cast<std::size_t>(ch_), S(0));
        Tensor<S> y(x.shape);
        for (int c = 0; c < ch_; ++c) {
            double mean, var;
            if (train) {
                double sum = 0.0, sq = 0.0;
                for (int i = 0; i < b; ++i)
                    for (int p = 0; p < h * w; ++p) {
                        const double v = x.ptr()[plane_off(x, i, c) + p];
                        sum += v;
                        sq += v * v;
                    }
                mean = sum / static_cast<double>(n);
                var = sq / static_cast<double>(n) - mean * mean;
                if (var < 0.0) var = 0.0;
                run_mean_.value[c] = static_cast<S>((1.0 - momentum_) * run_mean_.value[c] + momentum_ * mean);
                run_var_.value[c] = static_cast<S>((1.0 - momentum_) * run_var_.value[c] + momentum_ * var);
            } else {
                mean = run_mean_.value[c];
                var = run_var_.value[c];
            }
            const S istd = static_cast<S>(1.0 / std::sqrt(var + eps_));
            inv_std_[static_cast<std::size_t>(c)] = istd;
            const S g = gamma_.value[c], bt = beta_.value[c], m = static_cast<S>(mean);
            for (int i = 0; i < b; ++i) {
                const std::int64_t off = plane_off(x, i, c);
                for (int p = 0; p < h * w; ++p) {
                    const S xh = (x.ptr()[off + p] - m) * istd;
                    xhat_.ptr()[off + p] = xh;
                    y.ptr()[off + p] = g * xh + bt;
                }
            }
        }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& gy) override {
        const int b = gy.dim(0), h = gy.dim(2), w = gy.dim(3);
        const std::int64_t n = static_cast<std::int64_t>(b) * h * w;
        Tensor<S> gx(gy.shape);
        for (int c = 0; c < ch_; ++c) {
            double sum_gy = 0.0, sum_gy_xh = 0.0;
            for (int i = 0; i < b; ++i) {
                const std::int64_t off = plane_off(gy, i, c);
                for (int p = 0; p < h * w; ++p) {
                    sum_gy += gy.ptr()[off + p];
                    sum_gy_xh += gy.ptr()[off + p] * static_cast<double>(xhat_.ptr()[off + p]);
                }
            }
            gamma_.grad[c] += static_cast<S>(sum_gy_xh);
            beta_.grad[c] += static_cast<S>(sum_gy);
            const S g = gamma_.value[c], istd = inv_std_[static_cast<std::size_t>(c)];
            if (train_) {
                const S mg = static_cast<S>(sum_gy / static_cast<double>(n));
                const S mgx = static_cast<S>(sum_gy_xh / static_cast<double>(n));
                for (int i = 0; i < b; ++i) {
                    const std::int64_t off = plane_off(gy, i, c);
                    for (int p = 0; p < h * w; ++p)
                        gx.ptr()[off + p] = g * istd * (gy.ptr()[off + p] - mg - xhat_.ptr()[off + p] * mgx);
                }
            } else {
                for (int i = 0; i < b; ++i) {
                    const std::int64_t off = plane_off(gy, i, c);
                    for (int p = 0; p < h * w; ++p) gx.ptr()[off + p] = g * istd * gy.ptr()[off + p];
                }
            }
        }
        return gx;
    }

    void collect_params(std::vector<Param<S>*>& out) override {
        out.push_back(&gamma_);
        out.push_back(&beta_);
        out.push_back(&run_mean_);
        out.push_back(&run_var_);
    }

private:
    static std::int64_t plane_off(const Tensor<S>& t, int img, int c) {
        return ((static_cast<std::int64_t>(img) * t.dim(1) + c) * t.dim(2)) * t.dim(3);
    }

    int ch_;
    double momentum_, eps_;
    bool train_ = true;
    Param<S> gamma_, beta_, run_mean_, run_var_;
    Tensor<S> xhat_;
    std::vector<S> inv_std_;
};

template <class S>
class InstanceNorm2d final : public Layer<S> {
public:
    InstanceNorm2d(std::string name, int channels, double eps = 1e-5) : ch_(channels), eps_(eps) {
        gamma_.name = name + ".gamma";
        gamma_.value = Tensor<S>({channels});
        gamma_.grad = Tensor<S>({channels});
        gamma_.value.fill(S(1));
        beta_.name = name + ".beta";
        beta_.value = Tensor<S>({channels});
        beta_.grad = Tensor<S>({channels});
    }

    Tensor<S> forward(const Tensor<S>& x, bool) override {
        require(x.rank() == 4 && x.dim(1) == ch_, ErrorCode::invalid_input, "instancenorm input shape mismatch");
        const int b = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int n = h * w;
        xhat_ = Tensor<S>(x.shape);
        inv_std_.assign(static_cast<std::size_t>(b) * ch_, S(0));
        Tensor<S> y(x.shape);
        for (int i = 0; i < b; ++i)
            for (int c = 0; c < ch_; ++c) {
                const std::int64_t off = ((static_cast<std::int64_t>(i) * ch_ + c) * h) * w;
                double sum = 0.0, sq = 0.0;
                for (int p = 0; p < n; ++p) {
                    const double v = x.ptr()[off + p];
                    sum += v;
                    sq += v * v;
                }
                const double mean = sum / n;
                double var = sq / n - mean * mean;
                if (var < 0.0) var = 0.0;
                const S istd = static_cast<S>(1.0 / std::sqrt(var + eps_));
                inv_std_[static_cast<std::size_t>(i) * ch_ + c] = istd;
                const S g = gamma_.value[c], bt = beta_.value[c], m = static_cast<S>(mean);
                for (int p = 0; p < n; ++p) {
                    const S xh = (x.ptr()[off + p] - m) * istd;
                    xhat_.ptr()[off + p] = xh;
                    y.ptr()[off + p] = g * xh + bt;
                }
            }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& gy) override {
        const int b = gy.dim(0), h = gy.dim(2), w = gy.dim(3);
        const int n = h * w;
        Tensor<S> gx(gy.shape);
        for (int i = 0; i < b; ++i)
            for (int c = 0; c < ch_; ++c) {
                const std::int64_t off = ((static_cast<std::int64_t>(i) * ch_ + c) * h) * w;
                double sum_gy = 0.0, sum_gy_xh = 0.0;
                for (int p = 0; p < n; ++p) {
                    sum_gy += gy.ptr()[off + p];
                    sum_gy_xh += gy.ptr()[off + p] * static_cast<double>(xhat_.ptr()[off + p]);
                }
                gamma_.grad[c] += static_cast<S>(sum_gy_xh);
                beta_.grad[c] += static_cast<S>(sum_gy);
                const S g = gamma_.value[c], istd = inv_std_[static_cast<std::size_t>(i) * ch_ + c];
                const S mg = static_cast<S>(sum_gy / n), mgx = static_cast<S>(sum_gy_xh / n);
                for (int p = 0; p < n; ++p)
                    gx.ptr()[off + p] = g * istd * (gy.ptr()[off + p] - mg - xhat_.ptr()[off + p] * mgx);
            }
        return gx;
    }

    void collect_params(std::vector<Param<S>*>& out) override {
        out.push_back(&gamma_);
        out.push_back(&beta_);
    }

private:
    int ch_;
    double eps_;
    Param<S> gamma_, beta_;
    Tensor<S> xhat_;
    std::vector<S> inv_std_;
};

// ---------------------------------------------------------------------------

template <class S>
class Upsample2x final : public Layer<S> {
public:
    Tensor<S> forward(const Tensor<S>& x, bool) override {
        const int b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        in_shape_ = x.shape;
        Tensor<S> y({b, c, 2 * h, 2 * w});
        for (int i = 0; i < b; ++i)
            for (int cc = 0; cc < c; ++cc)
                for (int hh = 0; hh < h; ++hh)
                    for (int ww = 0; ww < w; ++ww) {
                        const S v = x.at(i, cc, hh, ww);
                        y.at(i, cc, 2 * hh, 2 * ww) = v;
                        y.at(i, cc, 2 * hh, 2 * ww + 1) = v;
                        y.at(i, cc, 2 * hh + 1, 2 * ww) = v;
                        y.at(i, cc, 2 * hh + 1, 2 * ww + 1) = v;
                    }
        return y;
    }
    Tensor<S> backward(const Tensor<S>& gy) override {
        Tensor<S> gx(in_shape_);
        const int b = gx.dim(0), c = gx.dim(1), h = gx.dim(2), w = gx.dim(3);
        for (int i = 0; i < b; ++i)
            for (int cc = 0; cc < c; ++cc)
                for (int hh = 0; hh < h; ++hh)
                    for (int ww = 0; ww < w; ++ww)
                        gx.at(i, cc, hh, ww) = gy.at(i, cc, 2 * hh, 2 * ww) + gy.at(i, cc, 2 * hh, 2 * ww + 1) +
                                               gy.at(i, cc, 2 * hh + 1, 2 * ww) + gy.at(i, cc, 2 * hh + 1, 2 * ww + 1);
        return gx;
    }

private:
    std::vector<int> in_shape_;
};

template <class S>
class GlobalAvgPool final : public Layer<S> {
public:
    Tensor<S> forward(const Tensor<S>& x, bool) override {
        in_shape_ = x.shape;
        const int b = x.dim(0), c = x.dim(1), n = x.dim(2) * x.dim(3);
        Tensor<S> y({b, c});
        for (int i = 0; i < b; ++i)
            for (int cc = 0; cc < c; ++cc) {
                const std::int64_t off = (static_cast<std::int64_t>(i) * c + cc) * n;
                double sum = 0.0;
                for (int p = 0; p < n; ++p) sum += x.ptr()[off + p];
                y.at(i, cc) = static_cast<S>(sum / n);
            }
        return y;
    }
    Tensor<S> backward(const Tensor<S>& gy) override {
        Tensor<S> gx(in_shape_);
        const int b = gx.dim(0), c = gx.dim(1), n = gx.dim(2) * gx.dim(3);
        for (int i = 0; i < b; ++i)
            for (int cc = 0; cc < c; ++cc) {
                const S v = gy.at(i, cc) / static_cast<S>(n);
                const std::int64_t off = (static_cast<std::int64_t>(i) * c + cc) * n;
                for (int p = 0; p < n; ++p) gx.ptr()[off + p] = v;
            }
        return gx;
    }

private:
    std::vector<int> in_shape_;
};

template <class S>
class Flatten final : public Layer<S> {
public:
    Tensor<S> forward(const Tensor<S>& x, bool) override {
        in_shape_ = x.shape;
        Tensor<S> y({x.dim(0), static_cast<int>(x.numel() / x.dim(0))});
        y.data = x.data;
        return y;
    }
    Tensor<S> backward(const Tensor<S>& gy) override {
        Tensor<S> gx(in_shape_);
        gx.data = gy.data;
        return gx;
    }

private:
    std::vector<int> in_shape_;
};

// Row-wise L2 normalization of [B, D]; the mapping network's output layer.
template <class S>
class L2NormalizeRows final : public Layer<S> {
public:
    Tensor<S> forward(const Tensor<S>& x, bool) override {
        const int b = x.dim(0), d = x.dim(1);
        y_ = Tensor<S>(x.shape);
        norms_.assign(static_cast<std::size_t>(b), S(0));
        for (int i = 0; i < b; ++i) {
            double sq = 0.0;
            for (int j = 0; j < d; ++j) sq += static_cast<double>(x.at(i, j)) * x.at(i, j);
            S norm = static_cast<S>(std::sqrt(sq));
            if (norm < S(1e-12)) norm = S(1e-12);
            norms_[static_cast<std::size_t>(i)] = norm;
            for (int j = 0; j < d; ++j) y_.at(i, j) = x.at(i, j) / norm;
        }
        return y_;
    }
    Tensor<S> backward(const Tensor<S>& gy) override {
        const int b = gy.dim(0), d = gy.dim(1);
        Tensor<S> gx(gy.shape);
        for (int i = 0; i < b; ++i) {
            double dot = 0.0;
            for (int j = 0; j < d; ++j) dot += static_cast<double>(gy.at(i, j)) * y_.at(i, j);
            for (int j = 0; j < d; ++j)
                gx.at(i, j) = (gy.at(i, j) - static_cast<S>(dot) * y_.at(i, j)) / norms_[static_cast<std::size_t>(i)];
        }
        return gx;
    }

private:
    Tensor<S> y_;
    std::vector<S> norms_;
};

// ---------------------------------------------------------------------------
// Same-size zero-padded 2-D correlation of every channel with a fixed kernel.
// Free function (used on raw perturbation fields and attack gradients) plus a
// non-trainable layer form whose backward correlates with the flipped kernel.

template <class S>
Tensor<S> correlate2d_same(const Tensor<S>& x, const Tensor<S>& kernel) {
    require(x.rank() == 4, ErrorCode::invalid_input, "correlate2d_same expects a rank-4 tensor");
    require(kernel.rank() == 2 && kernel.dim(0) == kernel.dim(1) && kernel.dim(0) % 2 == 1,
            ErrorCode::invalid_parameter, "kernel must be square with odd size");
    const int b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int k = kernel.dim(0), r = k / 2;
    Tensor<S> y(x.shape);
    for (int i = 0; i < b; ++i)
        for (int cc = 0; cc < c; ++cc) {
            const std::int64_t off = ((static_cast<std::int64_t>(i) * c + cc) * h) * w;
            const S* src = x.ptr() + off;
            S* dst = y.ptr() + off;
            for (int hh = 0; hh < h; ++hh)
                for (int ww = 0; ww < w; ++ww) {
                    double acc = 0.0;
                    for (int ki = 0; ki < k; ++ki) {
                        const int sh = hh + ki - r;
                        if (sh < 0 || sh >= h) continue;
                        for (int kj = 0; kj < k; ++kj) {
                            const int sw = ww + kj - r;
                            if (sw < 0 || sw >= w) continue;
                            acc += static_cast<double>(kernel.at(ki, kj)) * src[static_cast<std::int64_t>(sh) * w + sw];
                        }
                    }
                    dst[static_cast<std::int64_t>(hh) * w + ww] = static_cast<S>(acc);
                }
        }
    return y;
}

template <class S>
class FixedBlur2d final : public Layer<S> {
public:
    explicit FixedBlur2d(Tensor<S> kernel) : kernel_(std::move(kernel)) {
        const int k = kernel_.dim(0);
        flipped_ = Tensor<S>(kernel_.shape);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) flipped_.at(i, j) = kernel_.at(k - 1 - i, k - 1 - j);
    }
    Tensor<S> forward(const Tensor<S>& x, bool) override { return correlate2d_same(x, kernel_); }
    Tensor<S> backward(const Tensor<S>& gy) override { return correlate2d_same(gy, flipped_); }
    const Tensor<S>& kernel() const { return kernel_; }

private:
    Tensor<S> kernel_, flipped_;
};

// ---------------------------------------------------------------------------

template <class S>
class Sequential final : public Layer<S> {
public:
    Sequential() = default;

    template <class L, class... Args>
    L* add(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L* raw = layer.get();
        layers_.push_back(std::move(layer));
        return raw;
    }

    Tensor<S> forward(const Tensor<S>& x, bool train) override {
        Tensor<S> cur = x;
        for (auto& l : layers_) cur = l->forward(cur, train);
        return cur;
    }
    Tensor<S> backward(const Tensor<S>& gy) override {
        Tensor<S> cur = gy;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
        return cur;
    }
    void collect_params(std::vector<Param<S>*>& out) override {
        for (auto& l : layers_) l->collect_params(out);
    }
    std::size_t size() const { return layers_.size(); }

private:
    std::vector<std::unique_ptr<Layer<S>>> layers_;
};

template <class S>
class Residual final : public Layer<S> {
public:
    explicit Residual(std::unique_ptr<Sequential<S>> body) : body_(std::move(body)) {}
    Tensor<S> forward(const Tensor<S>& x, bool train) override {
        Tensor<S> y = body_->forward(x, train);
        y += x;
        return y;
    }
    Tensor<S> backward(const Tensor<S>& gy) override {
        Tensor<S> gx = body_->backward(gy);
        gx += gy;
        return gx;
    }
    void collect_params(std::vector<Param<S>*>& out) override { body_->collect_params(out); }

private:
    std::unique_ptr<Sequential<S>> body_;
};

// ---------------------------------------------------------------------------

template <class S>
inline Tensor<S> one_hot(const std::vector<int>& ids, int num_classes) {
    Tensor<S> out({static_cast<int>(ids.size()), num_classes});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        require(ids[i] >= 0 && ids[i] < num_classes, ErrorCode::invalid_input,
                "class id out of range: " + std::to_string(ids[i]));
        out.at(static_cast<int>(i), ids[i]) = S(1);
    }
    return out;
}

template <class S>
inline void zero_grads(const std::vector<Param<S>*>& params) {
    for (auto* p : params)
        if (p->trainable) p->grad.fill(S(0));
}

}  // namespace advkit::nn
