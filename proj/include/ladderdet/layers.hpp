#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ladderdet/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

// Layer kernels for the fixed architecture family: 3x3 convolutions with
// stride (1,1) and padding (1,1), batch norm, 2x2/2 max pooling, ReLU and
// fully connected layers. Forward and backward are hand-derived; all loops
// write disjoint outputs or reduce sequentially, so results do not depend
// on the thread count.

namespace ladderdet {

// ---------------------------------------------------------------- conv 3x3

/// weights shape (out_ch, in_ch, 3, 3); output spatial dims equal input's.
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& x, const Tensor4<T>& w, const std::vector<T>& bias) {
    if (w.h != 3 || w.w != 3) throw std::invalid_argument("conv2d: kernel must be 3x3");
    if (w.c != x.c) throw std::invalid_argument("conv2d: channel mismatch");
    if (bias.size() != static_cast<size_t>(w.n)) throw std::invalid_argument("conv2d: bias size");
    const int N = x.n, C = x.c, H = x.h, W = x.w, OC = w.n;
    Tensor4<T> y(N, OC, H, W);

#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < N; ++n) {
        for (int oc = 0; oc < OC; ++oc) {
            T* yp = y.plane(n, oc);
            const T b = bias[static_cast<size_t>(oc)];
            for (int i = 0; i < H * W; ++i) yp[i] = b;
            for (int ic = 0; ic < C; ++ic) {
                const T* xp = x.plane(n, ic);
                const T* wp = w.plane(oc, ic);
                for (int ky = 0; ky < 3; ++ky) {
                    const int y_lo = std::max(0, 1 - ky);
                    const int y_hi = std::min(H, H + 1 - ky);
                    for (int kx = 0; kx < 3; ++kx) {
                        const T wv = wp[ky * 3 + kx];
                        if (wv == T(0)) continue;
                        const int x_lo = std::max(0, 1 - kx);
                        const int x_hi = std::min(W, W + 1 - kx);
                        for (int yy = y_lo; yy < y_hi; ++yy) {
                            const T* src = xp + (yy + ky - 1) * W + (kx - 1);
                            T* dst = yp + yy * W;
                            for (int xx = x_lo; xx < x_hi; ++xx) dst[xx] += wv * src[xx];
                        }
                    }
                }
            }
        }
    }
    return y;
}

template <typename T>
void conv2d_backward(const Tensor4<T>& x, const Tensor4<T>& w, const Tensor4<T>& grad_y,
                     Tensor4<T>& grad_x, Tensor4<T>& grad_w, std::vector<T>& grad_b) {
    const int N = x.n, C = x.c, H = x.h, W = x.w, OC = w.n;
    if (!grad_y.same_shape(Tensor4<T>(N, OC, H, W)))
        throw std::invalid_argument("conv2d_backward: grad shape mismatch");
    grad_x = Tensor4<T>(N, C, H, W);
    grad_w = Tensor4<T>(OC, C, 3, 3);
    grad_b.assign(static_cast<size_t>(OC), T(0));

    // d/dbias and d/dweights: one accumulator per (oc), sequential over n.
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < OC; ++oc) {
        T bacc = T(0);
        for (int n = 0; n < N; ++n) {
            const T* gp = grad_y.plane(n, oc);
            for (int i = 0; i < H * W; ++i) bacc += gp[i];
        }
        grad_b[static_cast<size_t>(oc)] = bacc;

        for (int ic = 0; ic < C; ++ic) {
            T* gw = grad_w.plane(oc, ic);
            for (int ky = 0; ky < 3; ++ky) {
                const int y_lo = std::max(0, 1 - ky);
                const int y_hi = std::min(H, H + 1 - ky);
                for (int kx = 0; kx < 3; ++kx) {
                    const int x_lo = std::max(0, 1 - kx);
                    const int x_hi = std::min(W, W + 1 - kx);
                    T acc = T(0);
                    for (int n = 0; n < N; ++n) {
                        const T* gp = grad_y.plane(n, oc);
                        const T* xp = x.plane(n, ic);
                        for (int yy = y_lo; yy < y_hi; ++yy) {
                            const T* g = gp + yy * W;
                            const T* src = xp + (yy + ky - 1) * W + (kx - 1);
                            for (int xx = x_lo; xx < x_hi; ++xx) acc += g[xx] * src[xx];
                        }
                    }
                    gw[ky * 3 + kx] = acc;
                }
            }
        }
    }

    // d/dinput: disjoint per (n, ic).
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < N; ++n) {
        for (int ic = 0; ic < C; ++ic) {
            T* gx = grad_x.plane(n, ic);
            for (int oc = 0; oc < OC; ++oc) {
                const T* gp = grad_y.plane(n, oc);
                const T* wp = w.plane(oc, ic);
                for (int ky = 0; ky < 3; ++ky) {
                    const int y_lo = std::max(0, 1 - ky);
                    const int y_hi = std::min(H, H + 1 - ky);
                    for (int kx = 0; kx < 3; ++kx) {
                        const T wv = wp[ky * 3 + kx];
                        if (wv == T(0)) continue;
                        const int x_lo = std::max(0, 1 - kx);
                        const int x_hi = std::min(W, W + 1 - kx);
                        for (int yy = y_lo; yy < y_hi; ++yy) {
                            const T* g = gp + yy * W;
                            T* dst = gx + (yy + ky - 1) * W + (kx - 1);
                            for (int xx = x_lo; xx < x_hi; ++xx) dst[xx] += wv * g[xx];
                        }
                    }
                }
            }
        }
    }
}

// ------------------------------------------------------------- batch norm

enum class RunMode { train, eval };

template <typename T>
struct BatchNormCache {
    Tensor4<T> xhat;
    std::vector<T> invstd;
};

/// Per-channel normalization over (batch, H, W). Train mode updates the
/// running stats in place with momentum; eval mode uses them as constants.
template <typename T>
Tensor4<T> batchnorm_forward(const Tensor4<T>& x, const std::vector<T>& gamma,
                             const std::vector<T>& beta, std::vector<T>& running_mean,
                             std::vector<T>& running_var, RunMode mode,
                             BatchNormCache<T>* cache = nullptr, T momentum = T(0.1),
                             T eps = T(1e-5)) {
    const int N = x.n, C = x.c, H = x.h, W = x.w;
    if (gamma.size() != static_cast<size_t>(C) || beta.size() != static_cast<size_t>(C))
        throw std::invalid_argument("batchnorm: gamma/beta size mismatch");
    const long count = static_cast<long>(N) * H * W;
    if (mode == RunMode::train && count < 2)
        throw std::invalid_argument("batchnorm: train mode needs >= 2 values per channel");

    Tensor4<T> y(N, C, H, W);
    if (cache) {
        cache->xhat = Tensor4<T>(N, C, H, W);
        cache->invstd.assign(static_cast<size_t>(C), T(0));
    }

#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        T mean, invstd;
        if (mode == RunMode::train) {
            T sum = T(0);
            for (int n = 0; n < N; ++n) {
                const T* xp = x.plane(n, c);
                for (int i = 0; i < H * W; ++i) sum += xp[i];
            }
            mean = sum / static_cast<T>(count);
            T ss = T(0);
            for (int n = 0; n < N; ++n) {
                const T* xp = x.plane(n, c);
                for (int i = 0; i < H * W; ++i) {
                    const T d = xp[i] - mean;
                    ss += d * d;
                }
            }
            const T var = ss / static_cast<T>(count);
            invstd = T(1) / std::sqrt(var + eps);
            running_mean[static_cast<size_t>(c)] =
                (T(1) - momentum) * running_mean[static_cast<size_t>(c)] + momentum * mean;
            running_var[static_cast<size_t>(c)] =
                (T(1) - momentum) * running_var[static_cast<size_t>(c)] + momentum * var;
        } else {
            mean = running_mean[static_cast<size_t>(c)];
            invstd = T(1) / std::sqrt(running_var[static_cast<size_t>(c)] + eps);
        }
        const T g = gamma[static_cast<size_t>(c)];
        const T b = beta[static_cast<size_t>(c)];
        for (int n = 0; n < N; ++n) {
            const T* xp = x.plane(n, c);
            T* yp = y.plane(n, c);
            T* hp = cache ? cache->xhat.plane(n, c) : nullptr;
            for (int i = 0; i < H * W; ++i) {
                const T xh = (xp[i] - mean) * invstd;
                if (hp) hp[i] = xh;
                yp[i] = g * xh + b;
            }
        }
        if (cache) cache->invstd[static_cast<size_t>(c)] = invstd;
    }
    return y;
}

/// Train-mode backward (mean/var are functions of the batch).
template <typename T>
void batchnorm_backward(const Tensor4<T>& grad_y, const std::vector<T>& gamma,
                        const BatchNormCache<T>& cache, Tensor4<T>& grad_x,
                        std::vector<T>& grad_gamma, std::vector<T>& grad_beta) {
    const int N = grad_y.n, C = grad_y.c, H = grad_y.h, W = grad_y.w;
    const T count = static_cast<T>(static_cast<long>(N) * H * W);
    grad_x = Tensor4<T>(N, C, H, W);
    grad_gamma.assign(static_cast<size_t>(C), T(0));
    grad_beta.assign(static_cast<size_t>(C), T(0));

#pragma omp parallel for schedule(static)
    for (int c = 0; c < C; ++c) {
        T sum_g = T(0), sum_gx = T(0);
        for (int n = 0; n < N; ++n) {
            const T* gp = grad_y.plane(n, c);
            const T* hp = cache.xhat.plane(n, c);
            for (int i = 0; i < H * W; ++i) {
                sum_g += gp[i];
                sum_gx += gp[i] * hp[i];
            }
        }
        grad_beta[static_cast<size_t>(c)] = sum_g;
        grad_gamma[static_cast<size_t>(c)] = sum_gx;

        const T g = gamma[static_cast<size_t>(c)];
        const T invstd = cache.invstd[static_cast<size_t>(c)];
        const T k = g * invstd / count;
        for (int n = 0; n < N; ++n) {
            const T* gp = grad_y.plane(n, c);
            const T* hp = cache.xhat.plane(n, c);
            T* op = grad_x.plane(n, c);
            for (int i = 0; i < H * W; ++i)
                op[i] = k * (count * gp[i] - sum_g - hp[i] * sum_gx);
        }
    }
    return;
}

// -------------------------------------------------------------- max pool

struct MaxPoolCache {
    std::vector<std::int32_t> argmax; // source linear index within the (h,w) plane
    int in_h = 0, in_w = 0;
};

/// 2x2 window, stride 2; trailing odd row/column is dropped.
template <typename T>
Tensor4<T> maxpool_forward(const Tensor4<T>& x, MaxPoolCache* cache = nullptr) {
    const int N = x.n, C = x.c, H = x.h, W = x.w;
    const int OH = H / 2, OW = W / 2;
    if (OH < 1 || OW < 1) throw std::invalid_argument("maxpool: input too small");
    Tensor4<T> y(N, C, OH, OW);
    if (cache) {
        cache->argmax.assign(y.size(), 0);
        cache->in_h = H;
        cache->in_w = W;
    }
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < N; ++n) {
        for (int c = 0; c < C; ++c) {
            const T* xp = x.plane(n, c);
            T* yp = y.plane(n, c);
            std::int32_t* am =
                cache ? cache->argmax.data() + (static_cast<size_t>(n) * C + c) * OH * OW : nullptr;
            for (int oy = 0; oy < OH; ++oy) {
                for (int ox = 0; ox < OW; ++ox) {
                    // ties go to the first occurrence in row-major window order
                    int best = (2 * oy) * W + 2 * ox;
                    T bv = xp[best];
                    const int cand[3] = {(2 * oy) * W + 2 * ox + 1, (2 * oy + 1) * W + 2 * ox,
                                         (2 * oy + 1) * W + 2 * ox + 1};
                    for (int k = 0; k < 3; ++k) {
                        if (xp[cand[k]] > bv) {
                            bv = xp[cand[k]];
                            best = cand[k];
                        }
                    }
                    yp[oy * OW + ox] = bv;
                    if (am) am[oy * OW + ox] = best;
                }
            }
        }
    }
    return y;
}

template <typename T>
Tensor4<T> maxpool_backward(const Tensor4<T>& grad_y, const MaxPoolCache& cache) {
    const int N = grad_y.n, C = grad_y.c, OH = grad_y.h, OW = grad_y.w;
    Tensor4<T> grad_x(N, C, cache.in_h, cache.in_w);
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < N; ++n) {
        for (int c = 0; c < C; ++c) {
            const T* gp = grad_y.plane(n, c);
            T* op = grad_x.plane(n, c);
            const std::int32_t* am =
                cache.argmax.data() + (static_cast<size_t>(n) * C + c) * OH * OW;
            for (int i = 0; i < OH * OW; ++i) op[am[i]] += gp[i];
        }
    }
    return grad_x;
}

// ------------------------------------------------------------------ relu

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& x) {
    Tensor4<T> y = x;
    for (T& v : y.data) v = std::max(v, T(0));
    return y;
}

/// Gradient is zero at negative inputs and at exactly 0.
template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& grad_y, const Tensor4<T>& x) {
    Tensor4<T> gx = grad_y;
    for (size_t i = 0; i < gx.data.size(); ++i)
        if (!(x.data[i] > T(0))) gx.data[i] = T(0);
    return gx;
}

// ---------------------------------------------------------------------- fc

/// x is (N, in, 1, 1); weights row-major (out, in); output (N, out, 1, 1).
template <typename T>
Tensor4<T> fc_forward(const Tensor4<T>& x, const std::vector<T>& w, const std::vector<T>& b,
                      int in_dim, int out_dim) {
    if (x.c * x.h * x.w != in_dim) throw std::invalid_argument("fc: input dim mismatch");
    if (w.size() != static_cast<size_t>(in_dim) * out_dim || b.size() != static_cast<size_t>(out_dim))
        throw std::invalid_argument("fc: weight shape mismatch");
    const int N = x.n;
    Tensor4<T> y(N, out_dim, 1, 1);
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < N; ++n) {
        for (int o = 0; o < out_dim; ++o) {
            const T* xp = x.data.data() + static_cast<size_t>(n) * in_dim;
            const T* wp = w.data() + static_cast<size_t>(o) * in_dim;
            T acc = b[static_cast<size_t>(o)];
            for (int i = 0; i < in_dim; ++i) acc += wp[i] * xp[i];
            y.data[static_cast<size_t>(n) * out_dim + o] = acc;
        }
    }
    return y;
}

template <typename T>
void fc_backward(const Tensor4<T>& x, const std::vector<T>& w, const Tensor4<T>& grad_y,
                 int in_dim, int out_dim, Tensor4<T>& grad_x, std::vector<T>& grad_w,
                 std::vector<T>& grad_b) {
    const int N = x.n;
    grad_x = Tensor4<T>(N, x.c, x.h, x.w);
    grad_w.assign(static_cast<size_t>(in_dim) * out_dim, T(0));
    grad_b.assign(static_cast<size_t>(out_dim), T(0));

#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_dim; ++o) {
        T bacc = T(0);
        T* gw = grad_w.data() + static_cast<size_t>(o) * in_dim;
        for (int n = 0; n < N; ++n) {
            const T g = grad_y.data[static_cast<size_t>(n) * out_dim + o];
            bacc += g;
            const T* xp = x.data.data() + static_cast<size_t>(n) * in_dim;
            for (int i = 0; i < in_dim; ++i) gw[i] += g * xp[i];
        }
        grad_b[static_cast<size_t>(o)] = bacc;
    }
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n) {
        T* gx = grad_x.data.data() + static_cast<size_t>(n) * in_dim;
        for (int o = 0; o < out_dim; ++o) {
            const T g = grad_y.data[static_cast<size_t>(n) * out_dim + o];
            const T* wp = w.data() + static_cast<size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) gx[i] += g * wp[i];
        }
    }
}

// ------------------------------------------------------------------ loss

/// Mean over the batch of the squared Euclidean distance between the
/// 16-vectors; gradient w.r.t. pred is 2(pred-target)/batch.
template <typename T>
T l2_loss(const Tensor4<T>& pred, const Tensor4<T>& target, Tensor4<T>* grad = nullptr) {
    if (!pred.same_shape(target)) throw std::invalid_argument("l2_loss: shape mismatch");
    const T inv_n = T(1) / static_cast<T>(pred.n);
    if (grad) *grad = Tensor4<T>(pred.n, pred.c, pred.h, pred.w);
    T loss = T(0);
    for (size_t i = 0; i < pred.data.size(); ++i) {
        const T d = pred.data[i] - target.data[i];
        loss += d * d;
        if (grad) grad->data[i] = T(2) * d * inv_n;
    }
    return loss * inv_n;
}

} // namespace ladderdet
