#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ladderdet/gradcheck.hpp"
#include "ladderdet/net.hpp"

using namespace ladderdet;

namespace {

template <typename T>
Tensor4<T> random_tensor(int n, int c, int h, int w, std::mt19937_64& rng, double scale = 1.0,
                         double margin = 0.0) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Tensor4<T> t(n, c, h, w);
    for (T& v : t.data) {
        double x = unit(rng) * scale;
        if (margin > 0.0 && std::abs(x) < margin) x = x < 0 ? -margin : margin; // keep off kinks
        v = static_cast<T>(x);
    }
    return t;
}

// Finite-difference check of one layer's input gradient via a synthetic
// scalar head: loss = sum(w_out .* y).
template <typename Fwd>
double fd_input_check(Tensor4<double>& x, const Tensor4<double>& w_out, Fwd forward,
                      const Tensor4<double>& grad_x, double step = 1e-5) {
    double max_rel = 0.0;
    for (size_t i = 0; i < x.data.size(); ++i) {
        const double saved = x.data[i];
        x.data[i] = saved + step;
        const Tensor4<double> yp = forward();
        x.data[i] = saved - step;
        const Tensor4<double> ym = forward();
        x.data[i] = saved;
        double lp = 0.0, lm = 0.0;
        for (size_t k = 0; k < yp.data.size(); ++k) {
            lp += w_out.data[k] * yp.data[k];
            lm += w_out.data[k] * ym.data[k];
        }
        const double numeric = (lp - lm) / (2 * step);
        const double analytic = grad_x.data[i];
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-3});
        max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
    }
    return max_rel;
}

} // namespace

TEST_CASE("conv2d identity kernel and constant response") {
    std::mt19937_64 rng(1);
    Tensor4<double> x = random_tensor<double>(2, 3, 6, 7, rng);

    // identity kernel: center 1 on the diagonal channel pairs
    Tensor4<double> w(3, 3, 3, 3);
    for (int c = 0; c < 3; ++c) w(c, c, 1, 1) = 1.0;
    std::vector<double> bias(3, 0.0);
    const Tensor4<double> y = conv2d_forward(x, w, bias);
    REQUIRE(y.same_shape(x));
    for (size_t i = 0; i < x.data.size(); ++i) CHECK(y.data[i] == doctest::Approx(x.data[i]));

    // all-ones kernel on a constant single-channel image: 9c in the interior
    Tensor4<double> flat(1, 1, 5, 5);
    for (double& v : flat.data) v = 0.5;
    Tensor4<double> ones(1, 1, 3, 3);
    for (double& v : ones.data) v = 1.0;
    const Tensor4<double> s = conv2d_forward(flat, ones, {0.0});
    CHECK(s(0, 0, 2, 2) == doctest::Approx(4.5));
    CHECK(s(0, 0, 0, 0) == doctest::Approx(2.0)); // corner sees 4 taps
}

TEST_CASE("conv2d gradients match finite differences") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 3; ++trial) {
        const int n = 1 + trial % 2, ic = 1 + trial, oc = 2, h = 4 + trial, w = 5;
        Tensor4<double> x = random_tensor<double>(n, ic, h, w, rng);
        Tensor4<double> wt = random_tensor<double>(oc, ic, 3, 3, rng);
        std::vector<double> bias(static_cast<size_t>(oc));
        for (double& b : bias) b = 0.1;
        Tensor4<double> w_out = random_tensor<double>(n, oc, h, w, rng);

        Tensor4<double> gx, gw;
        std::vector<double> gb;
        conv2d_backward(x, wt, w_out, gx, gw, gb);

        auto fwd = [&]() { return conv2d_forward(x, wt, bias); };
        CHECK(fd_input_check(x, w_out, fwd, gx) < 1e-6);

        // weight gradient via the same synthetic loss
        double max_rel = 0.0;
        const double step = 1e-5;
        for (size_t i = 0; i < wt.data.size(); ++i) {
            const double saved = wt.data[i];
            wt.data[i] = saved + step;
            const auto yp = conv2d_forward(x, wt, bias);
            wt.data[i] = saved - step;
            const auto ym = conv2d_forward(x, wt, bias);
            wt.data[i] = saved;
            double lp = 0, lm = 0;
            for (size_t k = 0; k < yp.data.size(); ++k) {
                lp += w_out.data[k] * yp.data[k];
                lm += w_out.data[k] * ym.data[k];
            }
            const double numeric = (lp - lm) / (2 * step);
            const double denom = std::max({std::abs(numeric), std::abs(gw.data[i]), 1e-3});
            max_rel = std::max(max_rel, std::abs(numeric - gw.data[i]) / denom);
        }
        CHECK(max_rel < 1e-6);
    }
}

TEST_CASE("batchnorm normalizes and scales") {
    std::mt19937_64 rng(11);
    Tensor4<double> x = random_tensor<double>(4, 2, 5, 5, rng, 3.0);
    std::vector<double> gamma{1.0, 1.0}, beta{0.0, 0.0};
    std::vector<double> rm(2, 0.0), rv(2, 1.0);

    const Tensor4<double> y = batchnorm_forward(x, gamma, beta, rm, rv, RunMode::train);
    for (int c = 0; c < 2; ++c) {
        double mean = 0.0, var = 0.0;
        const long count = 4 * 5 * 5;
        for (int n = 0; n < 4; ++n)
            for (int i = 0; i < 25; ++i) mean += y.plane(n, c)[i];
        mean /= count;
        for (int n = 0; n < 4; ++n)
            for (int i = 0; i < 25; ++i) {
                const double d = y.plane(n, c)[i] - mean;
                var += d * d;
            }
        var /= count;
        CHECK(std::abs(mean) < 1e-12);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }

    // gamma=2, beta=3
    std::vector<double> g2{2.0, 2.0}, b3{3.0, 3.0};
    const Tensor4<double> y2 = batchnorm_forward(x, g2, b3, rm, rv, RunMode::train);
    double mean0 = 0.0;
    for (int n = 0; n < 4; ++n)
        for (int i = 0; i < 25; ++i) mean0 += y2.plane(n, 0)[i];
    mean0 /= 100;
    CHECK(mean0 == doctest::Approx(3.0).epsilon(1e-9));

    // train mode rejects singleton normalization sets
    Tensor4<double> single(1, 2, 1, 1);
    CHECK_THROWS_AS(batchnorm_forward(single, gamma, beta, rm, rv, RunMode::train),
                    std::invalid_argument);
}

TEST_CASE("batchnorm gradients match finite differences") {
    std::mt19937_64 rng(13);
    Tensor4<double> x = random_tensor<double>(3, 2, 4, 4, rng, 2.0);
    std::vector<double> gamma{1.3, 0.8}, beta{0.2, -0.4};
    Tensor4<double> w_out = random_tensor<double>(3, 2, 4, 4, rng);

    std::vector<double> rm(2, 0.0), rv(2, 1.0);
    BatchNormCache<double> cache;
    batchnorm_forward(x, gamma, beta, rm, rv, RunMode::train, &cache);
    Tensor4<double> gx;
    std::vector<double> gg, gb;
    batchnorm_backward(w_out, gamma, cache, gx, gg, gb);

    auto fwd = [&]() {
        std::vector<double> m(2, 0.0), v(2, 1.0);
        return batchnorm_forward(x, gamma, beta, m, v, RunMode::train);
    };
    CHECK(fd_input_check(x, w_out, fwd, gx) < 1e-5);
}

TEST_CASE("maxpool forward and gradient routing") {
    Tensor4<double> x(1, 1, 2, 2);
    x.data = {1, 2, 3, 4};
    MaxPoolCache cache;
    const Tensor4<double> y = maxpool_forward(x, &cache);
    CHECK(y.data.size() == 1);
    CHECK(y.data[0] == 4.0);

    Tensor4<double> flat(2, 3, 6, 6);
    for (double& v : flat.data) v = 0.25;
    const Tensor4<double> half = maxpool_forward(flat);
    CHECK(half.h == 3);
    CHECK(half.w == 3);
    for (double v : half.data) CHECK(v == 0.25);

    // gradient goes to the argmax only
    Tensor4<double> gy(1, 1, 1, 1);
    gy.data = {2.5};
    const Tensor4<double> gx = maxpool_backward(gy, cache);
    CHECK(gx.data[3] == 2.5);
    CHECK(gx.data[0] == 0.0);

    // ties: first occurrence in row-major window order wins
    Tensor4<double> tie(1, 1, 2, 2);
    tie.data = {7, 7, 7, 7};
    MaxPoolCache tc;
    maxpool_forward(tie, &tc);
    CHECK(tc.argmax[0] == 0);
}

TEST_CASE("maxpool gradient matches finite differences on distinct values") {
    std::mt19937_64 rng(17);
    Tensor4<double> x(2, 2, 6, 6);
    // distinct values so the argmax is stable under the FD step
    std::vector<double> vals(x.data.size());
    for (size_t i = 0; i < vals.size(); ++i) vals[i] = static_cast<double>(i) * 0.01;
    std::shuffle(vals.begin(), vals.end(), rng);
    x.data = vals;
    Tensor4<double> w_out = random_tensor<double>(2, 2, 3, 3, rng);

    MaxPoolCache cache;
    maxpool_forward(x, &cache);
    Tensor4<double> gx = maxpool_backward(w_out, cache);
    auto fwd = [&]() { return maxpool_forward(x); };
    CHECK(fd_input_check(x, w_out, fwd, gx, 1e-4) < 1e-6);
}

TEST_CASE("fc and relu basics") {
    // identity weights, zero bias
    Tensor4<double> x(2, 3, 1, 1);
    x.data = {1, 2, 3, 4, 5, 6};
    std::vector<double> w = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    std::vector<double> b(3, 0.0);
    const Tensor4<double> y = fc_forward(x, w, b, 3, 3);
    for (size_t i = 0; i < 6; ++i) CHECK(y.data[i] == doctest::Approx(x.data[i]));

    Tensor4<double> r(1, 2, 1, 1);
    r.data = {-1.0, 2.0};
    const Tensor4<double> rr = relu_forward(r);
    CHECK(rr.data[0] == 0.0);
    CHECK(rr.data[1] == 2.0);

    // relu gradient is zero at negative inputs and at exactly zero
    Tensor4<double> at_zero(1, 3, 1, 1);
    at_zero.data = {-0.5, 0.0, 0.5};
    Tensor4<double> gy(1, 3, 1, 1);
    gy.data = {1.0, 1.0, 1.0};
    const Tensor4<double> gx = relu_backward(gy, at_zero);
    CHECK(gx.data[0] == 0.0);
    CHECK(gx.data[1] == 0.0);
    CHECK(gx.data[2] == 1.0);
}

TEST_CASE("fc gradients match finite differences") {
    std::mt19937_64 rng(19);
    const int in = 7, out = 4, n = 3;
    Tensor4<double> x = random_tensor<double>(n, in, 1, 1, rng);
    std::vector<double> w(static_cast<size_t>(in) * out), b(static_cast<size_t>(out));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (double& v : w) v = unit(rng);
    for (double& v : b) v = unit(rng);
    Tensor4<double> w_out = random_tensor<double>(n, out, 1, 1, rng);

    Tensor4<double> gx;
    std::vector<double> gw, gb;
    fc_backward(x, w, w_out, in, out, gx, gw, gb);
    auto fwd = [&]() { return fc_forward(x, w, b, in, out); };
    CHECK(fd_input_check(x, w_out, fwd, gx) < 1e-6);
}

TEST_CASE("l2_loss values and gradient") {
    Tensor4<double> p(1, 16, 1, 1), t(1, 16, 1, 1);
    for (int i = 0; i < 16; ++i) {
        p.data[i] = 0.3 * i;
        t.data[i] = 0.3 * i;
    }
    CHECK(l2_loss(p, t, static_cast<Tensor4<double>*>(nullptr)) == doctest::Approx(0.0));

    // pred - target = unit vector -> loss 1
    p.data[0] = t.data[0] + 1.0;
    CHECK(l2_loss(p, t, static_cast<Tensor4<double>*>(nullptr)) == doctest::Approx(1.0));

    std::mt19937_64 rng(23);
    Tensor4<double> pr = random_tensor<double>(3, 16, 1, 1, rng, 2.0);
    Tensor4<double> tr = random_tensor<double>(3, 16, 1, 1, rng, 2.0);
    Tensor4<double> grad;
    l2_loss(pr, tr, &grad);
    const double step = 1e-6;
    double max_rel = 0.0;
    for (size_t i = 0; i < pr.data.size(); ++i) {
        const double saved = pr.data[i];
        pr.data[i] = saved + step;
        const double lp = l2_loss(pr, tr, static_cast<Tensor4<double>*>(nullptr));
        pr.data[i] = saved - step;
        const double lm = l2_loss(pr, tr, static_cast<Tensor4<double>*>(nullptr));
        pr.data[i] = saved;
        const double numeric = (lp - lm) / (2 * step);
        const double denom = std::max({std::abs(numeric), std::abs(grad.data[i]), 1e-3});
        max_rel = std::max(max_rel, std::abs(numeric - grad.data[i]) / denom);
    }
    CHECK(max_rel < 1e-6);
}

namespace {

NetConfig tiny_config() {
    NetConfig cfg;
    cfg.input_size = 16;
    cfg.conv_blocks = {{2, true}, {4, true}};
    cfg.fc_sizes = {8, 16};
    return cfg;
}

/// Scalar-parameter Adam fixture: one fc bias.
NetConfig scalar_config() {
    NetConfig cfg;
    cfg.input_size = 1;
    cfg.conv_blocks = {};
    cfg.fc_sizes = {16};
    return cfg;
}

} // namespace

TEST_CASE("adam zero gradient leaves parameters unchanged") {
    const NetConfig cfg = scalar_config();
    NetParams<double> p = init_params<double>(cfg, 1);
    const std::vector<double> w_before = p.fc[0].w;
    NetGrads<double> g = make_grads_like(p);
    AdamConfig ac;
    adam_step(p, g, ac);
    CHECK(p.fc[0].w == w_before);
    CHECK(p.adam.step == 1);
}

TEST_CASE("adam first two steps match the hand-derived values") {
    // Scalar parameter at 0, unit gradient.
    // Step 1: m=0.1, v=0.001, mhat=1, vhat=1 -> delta = -lr/(1+eps)
    // Step 2: m=0.19/0.19=1, vhat=1 -> same delta; param ~ -2 lr.
    const NetConfig cfg = scalar_config();
    NetParams<double> p = init_params<double>(cfg, 1);
    p.fc[0].b[0] = 0.0;
    NetGrads<double> g = make_grads_like(p);
    g.fc[0].b[0] = 1.0;
    AdamConfig ac; // lr 1e-4, betas 0.9/0.999, eps 1e-8

    adam_step(p, g, ac);
    const double expected1 = -1e-4 * 1.0 / (1.0 + 1e-8);
    CHECK(std::abs(p.fc[0].b[0] - expected1) / std::abs(expected1) < 1e-10);

    adam_step(p, g, ac);
    const double m2 = 0.9 * 0.1 + 0.1 * 1.0;
    const double v2 = 0.999 * 0.001 + 0.001 * 1.0;
    const double mhat2 = m2 / (1.0 - 0.9 * 0.9);
    const double vhat2 = v2 / (1.0 - 0.999 * 0.999);
    const double expected2 = expected1 - 1e-4 * mhat2 / (std::sqrt(vhat2) + 1e-8);
    CHECK(std::abs(p.fc[0].b[0] - expected2) / std::abs(expected2) < 1e-10);
    CHECK(p.fc[0].b[0] == doctest::Approx(-2e-4).epsilon(1e-6));
}

TEST_CASE("adam rejects non-finite gradients") {
    const NetConfig cfg = scalar_config();
    NetParams<double> p = init_params<double>(cfg, 1);
    NetGrads<double> g = make_grads_like(p);
    g.fc[0].b[0] = std::nan("");
    AdamConfig ac;
    CHECK_THROWS_AS(adam_step(p, g, ac), NumericalError);
}

TEST_CASE("net forward: zero weights give zero output") {
    const NetConfig cfg = tiny_config();
    NetParams<float> p = init_params<float>(cfg, 3);
    for (auto view : collect_trainables<float>(p))
        if (view.name.find("gamma") == std::string::npos)
            for (size_t i = 0; i < view.size; ++i) view.data[i] = 0.0f;
    std::mt19937_64 rng(29);
    Tensor4<float> batch = random_tensor<float>(2, 1, 16, 16, rng);
    const Tensor4<float> out = net_forward(cfg, p, batch, RunMode::train,
                                           static_cast<ForwardCache<float>*>(nullptr));
    for (float v : out.data) CHECK(v == 0.0f);
}

TEST_CASE("net eval output is batch-size invariant") {
    const NetConfig cfg = tiny_config();
    NetParams<float> p = init_params<float>(cfg, 5);
    std::mt19937_64 rng(31);
    Tensor4<float> batch = random_tensor<float>(3, 1, 16, 16, rng);

    const Tensor4<float> all = net_infer(cfg, p, batch);
    for (int n = 0; n < 3; ++n) {
        Tensor4<float> single(1, 1, 16, 16);
        std::copy(batch.plane(n, 0), batch.plane(n, 0) + 16 * 16, single.plane(0, 0));
        const Tensor4<float> one = net_infer(cfg, p, single);
        for (int k = 0; k < 16; ++k)
            CHECK(one.data[static_cast<size_t>(k)] ==
                  all.data[static_cast<size_t>(n) * 16 + static_cast<size_t>(k)]);
    }
}

TEST_CASE("full-net gradient check on a toy config") {
    const NetConfig cfg = tiny_config();
    NetParams<double> p = init_params<double>(cfg, 7);
    std::mt19937_64 rng(37);
    Tensor4<double> batch = random_tensor<double>(2, 1, 16, 16, rng, 1.0, 1e-3);
    Tensor4<double> targets = random_tensor<double>(2, 16, 1, 1, rng, 8.0);

    const GradCheckReport report = grad_check_network(cfg, p, batch, targets, 1e-5, 40, 41);
    INFO("max rel err ", report.max_rel_err());
    CHECK(report.within(1e-4));
}

TEST_CASE("one training step decreases the loss") {
    const NetConfig cfg = tiny_config();
    NetParams<float> p = init_params<float>(cfg, 9);
    std::mt19937_64 rng(43);
    Tensor4<float> batch = random_tensor<float>(4, 1, 16, 16, rng);
    Tensor4<float> targets = random_tensor<float>(4, 16, 1, 1, rng, 10.0);

    AdamConfig ac;
    ac.lr = 1e-2;
    double prev = -1.0;
    for (int step = 0; step < 3; ++step) {
        ForwardCache<float> cache;
        Tensor4<float> pred = net_forward(cfg, p, batch, RunMode::train, &cache);
        Tensor4<float> grad;
        const double loss = l2_loss(pred, targets, &grad);
        if (step > 0) CHECK(loss < prev);
        prev = loss;
        NetGrads<float> grads = net_backward(cfg, p, cache, grad);
        adam_step(p, grads, ac);
    }
}

TEST_CASE("conv output dims equal input dims for any size") {
    std::mt19937_64 rng(47);
    for (int s = 1; s <= 9; s += 4) {
        Tensor4<double> x = random_tensor<double>(1, 2, s, s + 1, rng);
        Tensor4<double> w = random_tensor<double>(3, 2, 3, 3, rng);
        const Tensor4<double> y = conv2d_forward(x, w, {0.0, 0.0, 0.0});
        CHECK(y.h == s);
        CHECK(y.w == s + 1);
    }
}
