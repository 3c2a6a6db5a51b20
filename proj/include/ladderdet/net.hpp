#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ladderdet/errors.hpp"
#include "ladderdet/layers.hpp"
#include "ladderdet/tensor.hpp"

namespace ladderdet {

struct ConvBlockSpec {
    int out_channels = 0;
    bool pool = true;
};

/// Architecture description: a stack of conv(3x3, stride 1, pad 1) ->
/// batch norm -> ReLU blocks, optionally max-pooled, then FC layers with
/// ReLU between them and a linear 16-output head (8 corner coordinates).
struct NetConfig {
    int input_size = 224;
    std::vector<ConvBlockSpec> conv_blocks;
    std::vector<int> fc_sizes; // last entry must be 16

    /// VGG-F-like widths; structure per the architecture diagram, widths
    /// are an approximation (the reference figure does not fix them).
    static NetConfig paper_preset();
    /// Small net for CPU-scale training on 56x56 patches.
    static NetConfig desk_preset();
    static NetConfig by_name(const std::string& name);

    int spatial_after_convs() const {
        int s = input_size;
        for (const auto& b : conv_blocks)
            if (b.pool) s /= 2;
        return s;
    }
    int flatten_dim() const {
        const int s = spatial_after_convs();
        return conv_blocks.empty() ? input_size * input_size
                                   : conv_blocks.back().out_channels * s * s;
    }
    void validate() const;
};

inline NetConfig NetConfig::paper_preset() {
    NetConfig c;
    c.input_size = 224;
    c.conv_blocks = {{64, true}, {256, true}, {256, true}, {256, true}, {256, true}};
    c.fc_sizes = {4096, 16};
    return c;
}

inline NetConfig NetConfig::desk_preset() {
    NetConfig c;
    c.input_size = 56;
    c.conv_blocks = {{8, true}, {16, true}, {32, true}};
    c.fc_sizes = {64, 16};
    return c;
}

inline NetConfig NetConfig::by_name(const std::string& name) {
    if (name == "paper") return paper_preset();
    if (name == "desk") return desk_preset();
    throw std::invalid_argument("unknown net preset: " + name);
}

inline void NetConfig::validate() const {
    if (input_size < 1) throw std::invalid_argument("NetConfig: input_size must be >= 1");
    if (fc_sizes.empty() || fc_sizes.back() != 16)
        throw std::invalid_argument("NetConfig: fc_sizes must end in 16");
    for (const auto& b : conv_blocks)
        if (b.out_channels < 1) throw std::invalid_argument("NetConfig: bad channel count");
    int s = input_size;
    for (const auto& b : conv_blocks) {
        if (b.pool) {
            if (s < 2) throw std::invalid_argument("NetConfig: input too small for pooling depth");
            s /= 2;
        }
    }
    for (int f : fc_sizes)
        if (f < 1) throw std::invalid_argument("NetConfig: bad fc size");
}

template <typename T>
struct ConvLayerParams {
    Tensor4<T> w; // (out_ch, in_ch, 3, 3)
    std::vector<T> b, gamma, beta;
    std::vector<T> run_mean, run_var;
};

template <typename T>
struct FcLayerParams {
    std::vector<T> w; // row-major (out, in)
    std::vector<T> b;
    int in = 0, out = 0;
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (!(lr > 0)) throw std::invalid_argument("AdamConfig: lr must be > 0");
        if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
            throw std::invalid_argument("AdamConfig: betas must be in [0,1)");
    }
};

template <typename T>
struct AdamState {
    std::vector<std::vector<T>> m, v; // one slot per trainable buffer
    long step = 0;
};

template <typename T>
struct NetParams {
    std::vector<ConvLayerParams<T>> conv;
    std::vector<FcLayerParams<T>> fc;
    AdamState<T> adam;
};

/// Gradients mirror the trainable buffers (no running stats, no Adam state).
template <typename T>
struct NetGrads {
    std::vector<ConvLayerParams<T>> conv; // run_mean/run_var unused
    std::vector<FcLayerParams<T>> fc;
};

template <typename T>
struct ParamView {
    std::string name;
    T* data = nullptr;
    size_t size = 0;
};

/// Trainable buffers in a fixed order (conv w/b/gamma/beta, then fc w/b);
/// the same order indexes the Adam moment slots and the checkpoint layout.
template <typename T, typename Net>
std::vector<ParamView<T>> collect_trainables(Net& net) {
    std::vector<ParamView<T>> out;
    for (size_t i = 0; i < net.conv.size(); ++i) {
        auto& l = net.conv[i];
        const std::string p = "conv" + std::to_string(i) + ".";
        out.push_back({p + "w", l.w.data.data(), l.w.data.size()});
        out.push_back({p + "b", l.b.data(), l.b.size()});
        out.push_back({p + "gamma", l.gamma.data(), l.gamma.size()});
        out.push_back({p + "beta", l.beta.data(), l.beta.size()});
    }
    for (size_t i = 0; i < net.fc.size(); ++i) {
        auto& l = net.fc[i];
        const std::string p = "fc" + std::to_string(i) + ".";
        out.push_back({p + "w", l.w.data(), l.w.size()});
        out.push_back({p + "b", l.b.data(), l.b.size()});
    }
    return out;
}

/// He-normal weights, unit gamma, zero beta/bias, unit running variance.
template <typename T>
NetParams<T> init_params(const NetConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    NetParams<T> p;
    int in_ch = 1;
    for (const auto& blk : cfg.conv_blocks) {
        ConvLayerParams<T> l;
        l.w = Tensor4<T>(blk.out_channels, in_ch, 3, 3);
        const double stddev = std::sqrt(2.0 / (in_ch * 9.0));
        std::normal_distribution<double> dist(0.0, stddev);
        for (T& v : l.w.data) v = static_cast<T>(dist(rng));
        l.b.assign(static_cast<size_t>(blk.out_channels), T(0));
        l.gamma.assign(static_cast<size_t>(blk.out_channels), T(1));
        l.beta.assign(static_cast<size_t>(blk.out_channels), T(0));
        l.run_mean.assign(static_cast<size_t>(blk.out_channels), T(0));
        l.run_var.assign(static_cast<size_t>(blk.out_channels), T(1));
        p.conv.push_back(std::move(l));
        in_ch = blk.out_channels;
    }
    int in_dim = cfg.flatten_dim();
    for (int out_dim : cfg.fc_sizes) {
        FcLayerParams<T> l;
        l.in = in_dim;
        l.out = out_dim;
        const double stddev = std::sqrt(2.0 / in_dim);
        std::normal_distribution<double> dist(0.0, stddev);
        l.w.resize(static_cast<size_t>(in_dim) * out_dim);
        for (T& v : l.w) v = static_cast<T>(dist(rng));
        l.b.assign(static_cast<size_t>(out_dim), T(0));
        p.fc.push_back(std::move(l));
        in_dim = out_dim;
    }
    auto views = collect_trainables<T>(p);
    p.adam.m.resize(views.size());
    p.adam.v.resize(views.size());
    for (size_t i = 0; i < views.size(); ++i) {
        p.adam.m[i].assign(views[i].size, T(0));
        p.adam.v[i].assign(views[i].size, T(0));
    }
    p.adam.step = 0;
    return p;
}

template <typename T>
NetGrads<T> make_grads_like(const NetParams<T>& p) {
    NetGrads<T> g;
    for (const auto& l : p.conv) {
        ConvLayerParams<T> gl;
        gl.w = Tensor4<T>(l.w.n, l.w.c, 3, 3);
        gl.b.assign(l.b.size(), T(0));
        gl.gamma.assign(l.gamma.size(), T(0));
        gl.beta.assign(l.beta.size(), T(0));
        g.conv.push_back(std::move(gl));
    }
    for (const auto& l : p.fc) {
        FcLayerParams<T> gl;
        gl.in = l.in;
        gl.out = l.out;
        gl.w.assign(l.w.size(), T(0));
        gl.b.assign(l.b.size(), T(0));
        g.fc.push_back(std::move(gl));
    }
    return g;
}

template <typename T>
struct ForwardCache {
    struct ConvBlockCache {
        Tensor4<T> x_in;    // conv input
        BatchNormCache<T> bn;
        Tensor4<T> bn_out;  // pre-ReLU
        Tensor4<T> relu_out;
        MaxPoolCache pool;
    };
    struct FcCache {
        Tensor4<T> x_in;
        Tensor4<T> pre_act; // pre-ReLU (hidden layers only)
    };
    std::vector<ConvBlockCache> conv;
    std::vector<FcCache> fc;
};

/// Composed forward pass. Train mode updates batch-norm running stats and
/// (with cache) records what the backward pass needs. The head is linear:
/// outputs are patch-frame pixel coordinates.
template <typename T>
Tensor4<T> net_forward(const NetConfig& cfg, NetParams<T>& params, const Tensor4<T>& batch,
                       RunMode mode, ForwardCache<T>* cache = nullptr) {
    if (batch.c != 1 || batch.h != cfg.input_size || batch.w != cfg.input_size)
        throw std::invalid_argument("net_forward: batch shape mismatch");
    if (cache) {
        cache->conv.assign(params.conv.size(), {});
        cache->fc.assign(params.fc.size(), {});
    }
    Tensor4<T> x = batch;
    for (size_t i = 0; i < params.conv.size(); ++i) {
        auto& l = params.conv[i];
        auto* cc = cache ? &cache->conv[i] : nullptr;
        if (cc) cc->x_in = x;
        Tensor4<T> z = conv2d_forward(x, l.w, l.b);
        Tensor4<T> bn = batchnorm_forward(z, l.gamma, l.beta, l.run_mean, l.run_var, mode,
                                          cc ? &cc->bn : nullptr);
        if (cc) cc->bn_out = bn;
        Tensor4<T> r = relu_forward(bn);
        if (cfg.conv_blocks[i].pool) {
            if (cc) cc->relu_out = r;
            x = maxpool_forward(r, cc ? &cc->pool : nullptr);
        } else {
            x = std::move(r);
        }
    }
    x = x.flattened();
    for (size_t i = 0; i < params.fc.size(); ++i) {
        auto& l = params.fc[i];
        auto* fcache = cache ? &cache->fc[i] : nullptr;
        if (fcache) fcache->x_in = x;
        Tensor4<T> z = fc_forward(x, l.w, l.b, l.in, l.out);
        if (i + 1 < params.fc.size()) {
            if (fcache) fcache->pre_act = z;
            x = relu_forward(z);
        } else {
            x = std::move(z); // linear head
        }
    }
    return x;
}

/// Eval-only convenience that leaves the parameters untouched.
template <typename T>
Tensor4<T> net_infer(const NetConfig& cfg, const NetParams<T>& params, const Tensor4<T>& batch) {
    auto& mut = const_cast<NetParams<T>&>(params); // eval mode does not write
    return net_forward(cfg, mut, batch, RunMode::eval, static_cast<ForwardCache<T>*>(nullptr));
}

template <typename T>
NetGrads<T> net_backward(const NetConfig& cfg, const NetParams<T>& params,
                         const ForwardCache<T>& cache, const Tensor4<T>& grad_out) {
    NetGrads<T> grads = make_grads_like(params);
    Tensor4<T> g = grad_out;
    for (int i = static_cast<int>(params.fc.size()) - 1; i >= 0; --i) {
        const auto& l = params.fc[static_cast<size_t>(i)];
        const auto& fc = cache.fc[static_cast<size_t>(i)];
        if (static_cast<size_t>(i) + 1 < params.fc.size()) g = relu_backward(g, fc.pre_act);
        Tensor4<T> gx;
        fc_backward(fc.x_in, l.w, g, l.in, l.out, gx, grads.fc[static_cast<size_t>(i)].w,
                    grads.fc[static_cast<size_t>(i)].b);
        g = std::move(gx);
    }
    // un-flatten back to the last conv block's output shape
    if (!params.conv.empty()) {
        const int s = cfg.spatial_after_convs();
        g.c = cfg.conv_blocks.back().out_channels;
        g.h = s;
        g.w = s;
    }
    for (int i = static_cast<int>(params.conv.size()) - 1; i >= 0; --i) {
        const auto& l = params.conv[static_cast<size_t>(i)];
        const auto& cc = cache.conv[static_cast<size_t>(i)];
        if (cfg.conv_blocks[static_cast<size_t>(i)].pool)
            g = maxpool_backward(g, cc.pool);
        g = relu_backward(g, cc.bn_out);
        Tensor4<T> g_bn;
        batchnorm_backward(g, l.gamma, cc.bn, g_bn, grads.conv[static_cast<size_t>(i)].gamma,
                           grads.conv[static_cast<size_t>(i)].beta);
        Tensor4<T> gx;
        conv2d_backward(cc.x_in, l.w, g_bn, gx, grads.conv[static_cast<size_t>(i)].w,
                        grads.conv[static_cast<size_t>(i)].b);
        g = std::move(gx);
    }
    return grads;
}

/// Bias-corrected Adam update; increments the step counter. Rejects
/// non-finite gradients.
template <typename T>
void adam_step(NetParams<T>& params, const NetGrads<T>& grads, const AdamConfig& cfg) {
    cfg.validate();
    auto pv = collect_trainables<T>(params);
    auto gv = collect_trainables<const T>(grads);
    if (pv.size() != gv.size() || params.adam.m.size() != pv.size())
        throw std::invalid_argument("adam_step: param/grad layout mismatch");

    params.adam.step += 1;
    const T b1 = static_cast<T>(cfg.beta1);
    const T b2 = static_cast<T>(cfg.beta2);
    const T corr1 = T(1) - static_cast<T>(std::pow(cfg.beta1, params.adam.step));
    const T corr2 = T(1) - static_cast<T>(std::pow(cfg.beta2, params.adam.step));
    const T lr = static_cast<T>(cfg.lr);
    const T eps = static_cast<T>(cfg.epsilon);

    for (size_t i = 0; i < pv.size(); ++i) {
        T* p = pv[i].data;
        const T* g = gv[i].data;
        T* m = params.adam.m[i].data();
        T* v = params.adam.v[i].data();
        for (size_t k = 0; k < pv[i].size; ++k) {
            if (!std::isfinite(static_cast<double>(g[k])))
                throw NumericalError("adam_step: non-finite gradient in " + pv[i].name);
            m[k] = b1 * m[k] + (T(1) - b1) * g[k];
            v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
            const T mhat = m[k] / corr1;
            const T vhat = v[k] / corr2;
            p[k] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

template <typename U, typename T>
NetParams<U> cast_params(const NetParams<T>& in) {
    NetParams<U> out;
    for (const auto& l : in.conv) {
        ConvLayerParams<U> o;
        o.w = l.w.template cast<U>();
        o.b.assign(l.b.begin(), l.b.end());
        o.gamma.assign(l.gamma.begin(), l.gamma.end());
        o.beta.assign(l.beta.begin(), l.beta.end());
        o.run_mean.assign(l.run_mean.begin(), l.run_mean.end());
        o.run_var.assign(l.run_var.begin(), l.run_var.end());
        out.conv.push_back(std::move(o));
    }
    for (const auto& l : in.fc) {
        FcLayerParams<U> o;
        o.in = l.in;
        o.out = l.out;
        o.w.assign(l.w.begin(), l.w.end());
        o.b.assign(l.b.begin(), l.b.end());
        out.fc.push_back(std::move(o));
    }
    out.adam.step = in.adam.step;
    out.adam.m.resize(in.adam.m.size());
    out.adam.v.resize(in.adam.v.size());
    for (size_t i = 0; i < in.adam.m.size(); ++i) {
        out.adam.m[i].assign(in.adam.m[i].begin(), in.adam.m[i].end());
        out.adam.v[i].assign(in.adam.v[i].begin(), in.adam.v[i].end());
    }
    return out;
}

} // namespace ladderdet
