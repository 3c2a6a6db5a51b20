#include "ladderdet/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ladderdet {

GrayImage crop_pad(const GrayImage& img, const Rect& r) {
    if (!(r.width() > 0.0) || !(r.height() > 0.0))
        throw std::invalid_argument("crop_pad: invalid rect");
    const int x0 = static_cast<int>(std::lround(r.x0));
    const int y0 = static_cast<int>(std::lround(r.y0));
    const int out_w = std::max(1, static_cast<int>(std::lround(r.width())));
    const int out_h = std::max(1, static_cast<int>(std::lround(r.height())));

    GrayImage out(out_w, out_h, 0.0);
    const int sx0 = std::max(0, -x0);
    const int sy0 = std::max(0, -y0);
    const int sx1 = std::min(out_w, img.width - x0);
    const int sy1 = std::min(out_h, img.height - y0);
    for (int y = sy0; y < sy1; ++y) {
        const double* src = &img.data[static_cast<size_t>(y + y0) * img.width + (sx0 + x0)];
        double* dst = &out.data[static_cast<size_t>(y) * out_w + sx0];
        std::copy(src, src + std::max(0, sx1 - sx0), dst);
    }
    return out;
}

namespace {

// Keys cubic convolution weights with a = -0.5 (Catmull-Rom).
inline void cubic_weights(double t, double w[4]) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    w[0] = -0.5 * t3 + t2 - 0.5 * t;
    w[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
    w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
    w[3] = 0.5 * t3 - 0.5 * t2;
}

struct ResampleAxis {
    std::vector<int> idx;     // 4 clamped source indices per output sample
    std::vector<double> wgt;  // 4 weights per output sample
};

ResampleAxis plan_axis(int in_n, int out_n) {
    ResampleAxis plan;
    plan.idx.resize(static_cast<size_t>(out_n) * 4);
    plan.wgt.resize(static_cast<size_t>(out_n) * 4);
    const double scale = static_cast<double>(in_n) / out_n;
    for (int o = 0; o < out_n; ++o) {
        const double src = (o + 0.5) * scale - 0.5;
        const double base = std::floor(src);
        const double t = src - base;
        double w[4];
        cubic_weights(t, w);
        for (int k = 0; k < 4; ++k) {
            const int s = static_cast<int>(base) - 1 + k;
            plan.idx[static_cast<size_t>(o) * 4 + k] = std::clamp(s, 0, in_n - 1);
            plan.wgt[static_cast<size_t>(o) * 4 + k] = w[k];
        }
    }
    return plan;
}

} // namespace

GrayImage resize_bicubic(const GrayImage& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1)
        throw std::invalid_argument("resize_bicubic: output dims must be >= 1");
    if (img.width < 1 || img.height < 1)
        throw std::invalid_argument("resize_bicubic: empty input");

    const ResampleAxis px = plan_axis(img.width, out_w);
    const ResampleAxis py = plan_axis(img.height, out_h);

    // Horizontal pass, then vertical.
    GrayImage tmp(out_w, img.height);
    for (int y = 0; y < img.height; ++y) {
        const double* row = &img.data[static_cast<size_t>(y) * img.width];
        double* dst = &tmp.data[static_cast<size_t>(y) * out_w];
        for (int x = 0; x < out_w; ++x) {
            const int* id = &px.idx[static_cast<size_t>(x) * 4];
            const double* w = &px.wgt[static_cast<size_t>(x) * 4];
            dst[x] = row[id[0]] * w[0] + row[id[1]] * w[1] + row[id[2]] * w[2] + row[id[3]] * w[3];
        }
    }
    GrayImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const int* id = &py.idx[static_cast<size_t>(y) * 4];
        const double* w = &py.wgt[static_cast<size_t>(y) * 4];
        const double* r0 = &tmp.data[static_cast<size_t>(id[0]) * out_w];
        const double* r1 = &tmp.data[static_cast<size_t>(id[1]) * out_w];
        const double* r2 = &tmp.data[static_cast<size_t>(id[2]) * out_w];
        const double* r3 = &tmp.data[static_cast<size_t>(id[3]) * out_w];
        double* dst = &out.data[static_cast<size_t>(y) * out_w];
        for (int x = 0; x < out_w; ++x) {
            const double v = r0[x] * w[0] + r1[x] * w[1] + r2[x] * w[2] + r3[x] * w[3];
            dst[x] = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

namespace {

// Mirror index into [0, n); handles offsets larger than n.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

} // namespace

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (sigma < 0.0)
        throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
    if (sigma == 0.0) return img;

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        kernel[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& k : kernel) k /= sum;

    GrayImage tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const double* row = &img.data[static_cast<size_t>(y) * img.width];
        double* dst = &tmp.data[static_cast<size_t>(y) * img.width];
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<size_t>(k + radius)] * row[reflect_index(x + k, img.width)];
            dst[x] = acc;
        }
    }
    GrayImage out(img.width, img.height);
    for (int x = 0; x < img.width; ++x) {
        for (int y = 0; y < img.height; ++y) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[static_cast<size_t>(k + radius)] *
                       tmp.data[static_cast<size_t>(reflect_index(y + k, img.height)) * img.width + x];
            out.data[static_cast<size_t>(y) * img.width + x] = acc;
        }
    }
    return out;
}

GrayImage flip_horizontal(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const double* src = &img.data[static_cast<size_t>(y) * img.width];
        double* dst = &out.data[static_cast<size_t>(y) * img.width];
        for (int x = 0; x < img.width; ++x) dst[x] = src[img.width - 1 - x];
    }
    return out;
}

GrayImage normalize_minmax(const GrayImage& img) {
    if (img.data.empty()) return img;
    const auto [mn_it, mx_it] = std::minmax_element(img.data.begin(), img.data.end());
    const double mn = *mn_it;
    const double mx = *mx_it;
    GrayImage out(img.width, img.height);
    if (mx - mn <= 0.0) return out; // constant image -> zeros
    const double inv = 1.0 / (mx - mn);
    for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = (img.data[i] - mn) * inv;
    return out;
}

} // namespace ladderdet
