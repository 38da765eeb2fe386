#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "nn/adam.hpp"
#include "nn/layers.hpp"
#include "nn/loss.hpp"

using namespace advkit;
using namespace advkit::nn;

namespace {

// Scalar objective J(x, params) = sum(forward(x) * r) for a fixed random r,
// compared against central finite differences in double precision.

TensorD random_tensor(const std::vector<int>& shape, Rng& rng, double scale = 1.0) {
    TensorD t(shape);
    for (auto& v : t.data) {
        v = rng.normal(0.0, scale);
        if (std::abs(v) < 1e-3) v += (v >= 0 ? 0.1 : -0.1);  // keep clear of relu kinks
    }
    return t;
}

double objective(Layer<double>& layer, const TensorD& x, const TensorD& r, bool train) {
    TensorD y = layer.forward(x, train);
    REQUIRE(y.same_shape(r));
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * r.data[i];
    return s;
}

struct GradCheck {
    double max_rel_input = 0.0;
    double max_rel_params = 0.0;
};

// allclose-style: |a - f| measured against atol + rtol * scale, so true-zero
// gradients (null directions such as a bias ahead of instance norm) are judged
// by absolute finite-difference noise, not a meaningless relative error.
double rel_err(double analytic, double numeric, double atol = 1e-7, double rtol = 1e-5) {
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    return std::abs(analytic - numeric) / (atol + rtol * scale);
}

GradCheck check_gradients(Layer<double>& layer, TensorD x, const std::vector<int>& out_shape, Rng& rng,
                          bool train = true, double h = 1e-5) {
    TensorD r = random_tensor(out_shape, rng);

    std::vector<Param<double>*> params;
    layer.collect_params(params);
    zero_grads(params);
    TensorD y = layer.forward(x, train);
    REQUIRE(y.same_shape(r));
    TensorD gx = layer.backward(r);
    REQUIRE(gx.same_shape(x));

    GradCheck res;
    auto probe = [&](std::size_t count) {
        std::vector<std::size_t> idx;
        if (count <= 64) {
            for (std::size_t i = 0; i < count; ++i) idx.push_back(i);
        } else {
            for (int i = 0; i < 64; ++i) idx.push_back(rng.uniform_int(static_cast<int>(count)));
        }
        return idx;
    };

    for (std::size_t i : probe(x.data.size())) {
        const double keep = x.data[i];
        x.data[i] = keep + h;
        const double jp = objective(layer, x, r, train);
        x.data[i] = keep - h;
        const double jm = objective(layer, x, r, train);
        x.data[i] = keep;
        res.max_rel_input = std::max(res.max_rel_input, rel_err(gx.data[i], (jp - jm) / (2 * h)));
    }
    for (auto* p : params) {
        if (!p->trainable) continue;
        for (std::size_t i : probe(p->value.data.size())) {
            const double keep = p->value.data[i];
            p->value.data[i] = keep + h;
            const double jp = objective(layer, x, r, train);
            p->value.data[i] = keep - h;
            const double jm = objective(layer, x, r, train);
            p->value.data[i] = keep;
            res.max_rel_params = std::max(res.max_rel_params, rel_err(p->grad.data[i], (jp - jm) / (2 * h)));
        }
    }
    return res;
}

}  // namespace

TEST_CASE("conv2d gradients match finite differences") {
    Rng rng(101);
    SUBCASE("stride 1") {
        Conv2d<double> conv("c", 3, 4, 3, 1, 1, rng);
        auto res = check_gradients(conv, random_tensor({2, 3, 5, 5}, rng), {2, 4, 5, 5}, rng);
        CHECK(res.max_rel_input < 1.0);
        CHECK(res.max_rel_params < 1.0);
    }
    SUBCASE("stride 2 downsampling") {
        Conv2d<double> conv("c", 3, 6, 3, 2, 1, rng);
        auto res = check_gradients(conv, random_tensor({2, 3, 8, 8}, rng), {2, 6, 4, 4}, rng);
        CHECK(res.max_rel_input < 1.0);
        CHECK(res.max_rel_params < 1.0);
    }
    SUBCASE("1x1 kernel") {
        Conv2d<double> conv("c", 4, 2, 1, 1, 0, rng);
        auto res = check_gradients(conv, random_tensor({2, 4, 4, 4}, rng), {2, 2, 4, 4}, rng);
        CHECK(res.max_rel_input < 1.0);
        CHECK(res.max_rel_params < 1.0);
    }
}

TEST_CASE("conv2d zero-init option and shape checks") {
    Rng rng(7);
    Conv2d<double> conv("c", 2, 2, 3, 1, 1, rng, /*zero_init=*/true);
    CHECK(conv.weight().value.max_abs() == 0.0);
    TensorD wrong({1, 3, 4, 4});
    CHECK_THROWS_AS((void)conv.forward(wrong, true), Error);
}

TEST_CASE("linear gradients match finite differences") {
    Rng rng(103);
    Linear<double> fc("fc", 7, 5, rng);
    auto res = check_gradients(fc, random_tensor({4, 7}, rng), {4, 5}, rng);
    CHECK(res.max_rel_input < 1.0);
    CHECK(res.max_rel_params < 1.0);
}

TEST_CASE("activation gradients match finite differences") {
    Rng rng(105);
    SUBCASE("relu") {
        ReLU<double> act;
        auto res = check_gradients(act, random_tensor({2, 3, 4, 4}, rng), {2, 3, 4, 4}, rng);
        CHECK(res.max_rel_input < 1.0);
    }
    SUBCASE("tanh") {
        TanhLayer<double> act;
        auto res = check_gradients(act, random_tensor({2, 3, 4, 4}, rng), {2, 3, 4, 4}, rng);
        CHECK(res.max_rel_input < 1.0);
    }
}

TEST_CASE("batch norm gradients, training mode") {
    Rng rng(107);
    BatchNorm2d<double> bn("bn", 3);
    auto res = check_gradients(bn, random_tensor({4, 3, 5, 5}, rng), {4, 3, 5, 5}, rng, true);
    CHECK(res.max_rel_input < 1.0);
    CHECK(res.max_rel_params < 1.0);
}

TEST_CASE("batch norm gradients, eval mode uses running statistics") {
    Rng rng(109);
    BatchNorm2d<double> bn("bn", 3);
    // Move the running stats off their initial values first.
    for (int i = 0; i < 3; ++i) (void)bn.forward(random_tensor({4, 3, 5, 5}, rng, 2.0), true);
    auto res = check_gradients(bn, random_tensor({2, 3, 4, 4}, rng), {2, 3, 4, 4}, rng, /*train=*/false);
    CHECK(res.max_rel_input < 1.0);
    CHECK(res.max_rel_params < 1.0);
}

TEST_CASE("batch norm normalizes batch statistics in training mode") {
    Rng rng(111);
    BatchNorm2d<double> bn("bn", 2);
    TensorD x = random_tensor({8, 2, 6, 6}, rng, 3.0);
    TensorD y = bn.forward(x, true);
    for (int c = 0; c < 2; ++c) {
        double sum = 0.0, sq = 0.0;
        const int n = 8 * 6 * 6;
        for (int b = 0; b < 8; ++b)
            for (int h = 0; h < 6; ++h)
                for (int w = 0; w < 6; ++w) {
                    const double v = y.at(b, c, h, w);
                    sum += v;
                    sq += v * v;
                }
        CHECK(std::abs(sum / n) < 1e-9);
        CHECK(sq / n == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("instance norm gradients match finite differences") {
    Rng rng(113);
    InstanceNorm2d<double> in("in", 3);
    auto res = check_gradients(in, random_tensor({2, 3, 5, 5}, rng), {2, 3, 5, 5}, rng);
    CHECK(res.max_rel_input < 1.0);
    CHECK(res.max_rel_params < 1.0);
}

TEST_CASE("shape-shuffling layers round gradients through exactly") {
    Rng rng(115);
    SUBCASE("upsample2x") {
        Upsample2x<double> up;
        auto res = check_gradients(up, random_tensor({2, 3, 3, 3}, rng), {2, 3, 6, 6}, rng);
        CHECK(res.max_rel_input < 1.0);
    }
    SUBCASE("global average pool") {
        GlobalAvgPool<double> gap;
        auto res = check_gradients(gap, random_tensor({2, 4, 5, 5}, rng), {2, 4}, rng);
        CHECK(res.max_rel_input < 1.0);
    }
    SUBCASE("flatten") {
        Flatten<double> fl;
        auto res = check_gradients(fl, random_tensor({2, 3, 4, 4}, rng), {2, 48}, rng);
        CHECK(res.max_rel_input < 1.0);
    }
}

TEST_CASE("row normalization produces unit rows and exact gradients") {
    Rng rng(117);
    L2NormalizeRows<double> norm;
    TensorD x = random_tensor({3, 6}, rng);
    TensorD y = norm.forward(x, true);
    for (int i = 0; i < 3; ++i) {
        double sq = 0.0;
        for (int j = 0; j < 6; ++j) sq += y.at(i, j) * y.at(i, j);
        CHECK(sq == doctest::Approx(1.0).epsilon(1e-12));
    }
    auto res = check_gradients(norm, random_tensor({3, 6}, rng), {3, 6}, rng);
    CHECK(res.max_rel_input < 1.0);
}

TEST_CASE("fixed blur applies the kernel and back-propagates its adjoint") {
    Rng rng(119);
    TensorD kernel({3, 3});
    // Asymmetric on purpose: the adjoint must flip it.
    double vals[9] = {0.0, 0.1, 0.0, 0.2, 0.4, 0.1, 0.0, 0.2, 0.0};
    for (int i = 0; i < 9; ++i) kernel.data[static_cast<std::size_t>(i)] = vals[i];
    FixedBlur2d<double> blur(kernel);
    auto res = check_gradients(blur, random_tensor({2, 3, 5, 5}, rng), {2, 3, 5, 5}, rng);
    CHECK(res.max_rel_input < 1.0);

    // Interior value oracle on a delta image.
    TensorD x({1, 1, 5, 5});
    x.at(0, 0, 2, 2) = 1.0;
    TensorD y = blur.forward(x, false);
    // Correlation spreads a delta as the point-reflected kernel.
    CHECK(y.at(0, 0, 2, 2) == doctest::Approx(0.4));
    CHECK(y.at(0, 0, 2, 1) == doctest::Approx(0.1));
    CHECK(y.at(0, 0, 2, 3) == doctest::Approx(0.2));
    CHECK(y.at(0, 0, 1, 2) == doctest::Approx(0.2));
    CHECK(y.at(0, 0, 3, 2) == doctest::Approx(0.1));
}

TEST_CASE("sequential and residual compositions back-propagate end to end") {
    // Seed chosen so no relu preactivation sits within finite-difference reach
    // of its kink; the check is fully deterministic.
    Rng rng(132);
    auto body = std::make_unique<Sequential<double>>();
    body->add<Conv2d<double>>("r.c1", 3, 3, 3, 1, 1, rng);
    body->add<InstanceNorm2d<double>>("r.n1", 3);
    body->add<ReLU<double>>();
    body->add<Conv2d<double>>("r.c2", 3, 3, 3, 1, 1, rng);
    Residual<double> block(std::move(body));
    auto res = check_gradients(block, random_tensor({2, 3, 5, 5}, rng), {2, 3, 5, 5}, rng);
    CHECK(res.max_rel_input < 1.0);
    CHECK(res.max_rel_params < 1.0);

    std::vector<Param<double>*> params;
    block.collect_params(params);
    CHECK(params.size() == 6);  // two convs (w+b) + one norm (gamma+beta)
}

TEST_CASE("loss gradients match finite differences") {
    Rng rng(123);
    const double h = 1e-6;
    SUBCASE("targeted cross entropy") {
        TensorD logits = random_tensor({3, 5}, rng);
        std::vector<int> targets = {2, 0, 4};
        auto loss = targeted_cross_entropy(logits, targets);
        for (std::size_t i = 0; i < logits.data.size(); ++i) {
            TensorD lp = logits, lm = logits;
            lp.data[i] += h;
            lm.data[i] -= h;
            const double fd =
                (targeted_cross_entropy(lp, targets).value - targeted_cross_entropy(lm, targets).value) / (2 * h);
            CHECK(rel_err(loss.grad.data[i], fd) < 1.0);
        }
        // Uniform logits over K classes cost log K.
        TensorD uni({1, 10});
        auto u = targeted_cross_entropy(uni, {3});
        CHECK(u.value == doctest::Approx(std::log(10.0)).epsilon(1e-12));
    }
    SUBCASE("frozen logit example") {
        TensorD logits({1, 3});
        logits.data = {1.0, 2.0, 3.0};
        auto ce = targeted_cross_entropy(logits, {0});
        CHECK(ce.value == doctest::Approx(2.40760596444438).epsilon(1e-10));
        auto ll = targeted_logit_loss(logits, {0});
        CHECK(ll.value == doctest::Approx(-1.0));
        CHECK(ll.grad.at(0, 0) == doctest::Approx(-1.0));
        CHECK(ll.grad.at(0, 1) == 0.0);
    }
    SUBCASE("embedding distance") {
        TensorD e = random_tensor({2, 4}, rng);
        TensorD r = random_tensor({2, 4}, rng);
        auto loss = embedding_distance(e, r);
        for (std::size_t i = 0; i < e.data.size(); ++i) {
            TensorD ep = e, em = e;
            ep.data[i] += h;
            em.data[i] -= h;
            const double fd = (embedding_distance(ep, r).value - embedding_distance(em, r).value) / (2 * h);
            CHECK(rel_err(loss.grad.data[i], fd) < 1.0);
        }
        CHECK(embedding_distance(e, e).value == 0.0);
    }
}

TEST_CASE("softmax rows are a probability simplex") {
    Rng rng(125);
    TensorD logits = random_tensor({4, 7}, rng, 3.0);
    TensorD p = softmax_rows(logits);
    for (int i = 0; i < 4; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 7; ++j) {
            CHECK(p.at(i, j) >= 0.0);
            sum += p.at(i, j);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(argmax_row(logits, 0) == argmax_row(p, 0));
}

TEST_CASE("adam first step moves by roughly the learning rate") {
    Param<double> p;
    p.name = "w";
    p.value = TensorD({4});
    p.grad = TensorD({4});
    p.value.data = {1.0, -2.0, 0.5, 3.0};
    Adam<double> opt({&p}, 0.01);
    opt.zero_grad();
    p.grad.data = {0.3, -0.7, 2.0, 0.001};
    auto before = p.value.data;
    opt.step();
    for (int i = 0; i < 4; ++i) {
        const double step = before[static_cast<std::size_t>(i)] - p.value.data[static_cast<std::size_t>(i)];
        // mhat/sqrt(vhat) == sign(g) on the first step (up to epsilon damping)
        CHECK(std::abs(step - 0.01 * (p.grad.data[static_cast<std::size_t>(i)] > 0 ? 1.0 : -1.0)) < 1e-4);
    }
}

TEST_CASE("adam drives a quadratic to its minimum") {
    Rng rng(127);
    Param<double> p;
    p.name = "w";
    p.value = TensorD({8});
    p.grad = TensorD({8});
    TensorD target({8});
    for (int i = 0; i < 8; ++i) {
        p.value.data[static_cast<std::size_t>(i)] = rng.normal();
        target.data[static_cast<std::size_t>(i)] = rng.normal();
    }
    Adam<double> opt({&p}, 0.05);
    for (int it = 0; it < 2000; ++it) {
        opt.zero_grad();
        for (int i = 0; i < 8; ++i)
            p.grad.data[static_cast<std::size_t>(i)] =
                2.0 * (p.value.data[static_cast<std::size_t>(i)] - target.data[static_cast<std::size_t>(i)]);
        opt.step();
    }
    for (int i = 0; i < 8; ++i)
        CHECK(p.value.data[static_cast<std::size_t>(i)] ==
              doctest::Approx(target.data[static_cast<std::size_t>(i)]).epsilon(1e-4));
}

TEST_CASE("adam ignores non-trainable parameters") {
    Param<double> buf;
    buf.name = "running";
    buf.value = TensorD({2});
    buf.value.data = {5.0, 6.0};
    buf.trainable = false;
    Adam<double> opt({&buf}, 0.1);
    opt.step();
    CHECK(buf.value.data[0] == 5.0);
    CHECK(buf.value.data[1] == 6.0);
}

TEST_CASE("one hot encodes and rejects bad ids") {
    auto oh = one_hot<double>({2, 0}, 3);
    CHECK(oh.at(0, 2) == 1.0);
    CHECK(oh.at(0, 0) == 0.0);
    CHECK(oh.at(1, 0) == 1.0);
    CHECK_THROWS_AS((void)one_hot<double>({3}, 3), Error);
    CHECK_THROWS_AS((void)one_hot<double>({-1}, 3), Error);
}
