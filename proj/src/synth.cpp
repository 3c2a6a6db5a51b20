#include "ladderdet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ladderdet/errors.hpp"

namespace ladderdet {

namespace {

constexpr double kPi = std::numbers::pi;

// Signed distance to a rounded box centered at the origin, half extents
// (hx, hy), corner radius r.
double sd_round_box(double px, double py, double hx, double hy, double r) {
    const double qx = std::abs(px) - (hx - r);
    const double qy = std::abs(py) - (hy - r);
    const double ox = std::max(qx, 0.0);
    const double oy = std::max(qy, 0.0);
    return std::min(std::max(qx, qy), 0.0) + std::hypot(ox, oy) - r;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 step
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

void ChainSpec::validate() const {
    if (count < 2) throw std::invalid_argument("ChainSpec: count must be >= 2");
    if (!(shrink > 0.0) || shrink > 1.0)
        throw std::invalid_argument("ChainSpec: shrink must be in (0,1]");
    if (rotation_jitter < 0 || curve_amplitude < 0 || noise_std < 0 || intensity_std < 0 ||
        gap < 0)
        throw std::invalid_argument("ChainSpec: jitters and spreads must be >= 0");
    if (width < 8 || height < 8) throw std::invalid_argument("ChainSpec: canvas too small");
    if (!(base_size > 0) || !(aspect > 0) || !(curve_period > 0))
        throw std::invalid_argument("ChainSpec: sizes must be positive");
}

std::pair<GrayImage, ChainAnnotation> generate_chain(const ChainSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double phase = unit(rng) * 2.0 * kPi;
    const double grad_dir = unit(rng) * 2.0 * kPi;
    const double grad_phase = unit(rng) * 2.0 * kPi;

    // Per-instance appearance draws, bottom to top.
    std::vector<double> jitter_deg(static_cast<size_t>(spec.count));
    std::vector<double> brightness(static_cast<size_t>(spec.count));
    std::normal_distribution<double> bright_dist(spec.intensity_mean, spec.intensity_std);
    for (int k = 0; k < spec.count; ++k) {
        jitter_deg[static_cast<size_t>(k)] = (unit(rng) * 2.0 - 1.0) * spec.rotation_jitter;
        brightness[static_cast<size_t>(k)] = std::clamp(bright_dist(rng), 0.40, 1.0);
    }

    // Centers along the curve.
    std::vector<Point2> centers(static_cast<size_t>(spec.count));
    std::vector<double> body_w(static_cast<size_t>(spec.count));
    std::vector<double> body_h(static_cast<size_t>(spec.count));
    double w = spec.base_size;
    double h = spec.base_size * spec.aspect;
    double cy = spec.height - 1.5 * h;
    for (int k = 0; k < spec.count; ++k) {
        body_w[static_cast<size_t>(k)] = w;
        body_h[static_cast<size_t>(k)] = h;
        centers[static_cast<size_t>(k)] = {
            spec.width / 2.0 + spec.curve_amplitude * std::sin(2.0 * kPi * k / spec.curve_period + phase),
            cy};
        const double next_h = h * spec.shrink;
        cy -= h * 0.5 + spec.gap * h + next_h * 0.5;
        w *= spec.shrink;
        h = next_h;
    }

    // Body orientation follows the chain direction, plus jitter.
    ChainAnnotation ann;
    std::vector<double> angles(static_cast<size_t>(spec.count));
    for (int k = 0; k < spec.count; ++k) {
        const Point2 d = (k + 1 < spec.count)
                             ? centers[static_cast<size_t>(k + 1)] - centers[static_cast<size_t>(k)]
                             : centers[static_cast<size_t>(k)] - centers[static_cast<size_t>(k - 1)];
        const double tangent = std::atan2(d.x, -d.y); // 0 when pointing straight up
        angles[static_cast<size_t>(k)] =
            tangent + jitter_deg[static_cast<size_t>(k)] * kPi / 180.0;
    }

    for (int k = 0; k < spec.count; ++k) {
        const double hw = body_w[static_cast<size_t>(k)] * 0.5;
        const double hh = body_h[static_cast<size_t>(k)] * 0.5;
        const double ca = std::cos(angles[static_cast<size_t>(k)]);
        const double sa = std::sin(angles[static_cast<size_t>(k)]);
        const Point2 c = centers[static_cast<size_t>(k)];
        auto rot = [&](double lx, double ly) -> Point2 {
            return {c.x + lx * ca - ly * sa, c.y + lx * sa + ly * ca};
        };
        Quad q;
        q.frame = Frame::image;
        q.corners[0] = rot(-hw, -hh);
        q.corners[1] = rot(+hw, -hh);
        q.corners[2] = rot(+hw, +hh);
        q.corners[3] = rot(-hw, +hh);
        for (const Point2& p : q.corners) {
            if (p.x < 2.0 || p.x > spec.width - 3.0 || p.y < 2.0 || p.y > spec.height - 3.0)
                throw DataError("generate_chain: chain does not fit in the image");
        }
        ann.quads.push_back(q);
        ann.labels.push_back("V" + std::to_string(k));
    }
    validate_annotation(ann);

    // Raster: background with a low-frequency gradient, then the bodies
    // with 1 px linear anti-aliasing, then per-pixel noise.
    GrayImage img(spec.width, spec.height);
    const double wavelength = 1.5 * std::max(spec.width, spec.height);
    const double gx = std::cos(grad_dir), gy = std::sin(grad_dir);
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
            img.at(x, y) = spec.background +
                           spec.gradient_amp *
                               0.5 * (1.0 + std::sin(2.0 * kPi * (x * gx + y * gy) / wavelength +
                                                     grad_phase));

    for (int k = 0; k < spec.count; ++k) {
        const double hw = body_w[static_cast<size_t>(k)] * 0.5;
        const double hh = body_h[static_cast<size_t>(k)] * 0.5;
        const double r = spec.corner_radius * std::min(body_w[static_cast<size_t>(k)],
                                                       body_h[static_cast<size_t>(k)]);
        const double ca = std::cos(angles[static_cast<size_t>(k)]);
        const double sa = std::sin(angles[static_cast<size_t>(k)]);
        const Point2 c = centers[static_cast<size_t>(k)];
        const double reach = std::hypot(hw, hh) + 2.0;
        const int x0 = std::max(0, static_cast<int>(std::floor(c.x - reach)));
        const int x1 = std::min(spec.width - 1, static_cast<int>(std::ceil(c.x + reach)));
        const int y0 = std::max(0, static_cast<int>(std::floor(c.y - reach)));
        const int y1 = std::min(spec.height - 1, static_cast<int>(std::ceil(c.y + reach)));
        const double v = brightness[static_cast<size_t>(k)];
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = x - c.x;
                const double dy = y - c.y;
                // rotate into the body frame (inverse rotation)
                const double lx = dx * ca + dy * sa;
                const double ly = -dx * sa + dy * ca;
                const double d = sd_round_box(lx, ly, hw, hh, r);
                const double alpha = std::clamp(0.5 - d, 0.0, 1.0);
                if (alpha > 0.0) img.at(x, y) = img.at(x, y) * (1.0 - alpha) + v * alpha;
            }
        }
    }

    std::normal_distribution<double> noise(0.0, spec.noise_std);
    if (spec.noise_std > 0.0)
        for (double& px : img.data) px = std::clamp(px + noise(rng), 0.0, 1.0);
    else
        for (double& px : img.data) px = std::clamp(px, 0.0, 1.0);

    return {std::move(img), std::move(ann)};
}

ChainSpecRanges ChainSpecRanges::lumbar_like() {
    ChainSpecRanges r;
    r.base.count = 7;
    r.base.width = 320;
    r.base.height = 448;
    return r;
}

ChainSpecRanges ChainSpecRanges::wholespine_like() {
    ChainSpecRanges r;
    r.base.count = 23;
    r.base.width = 320;
    r.base.height = 832;
    r.base_size = {30, 38};
    r.shrink = {0.965, 0.985};
    r.curve_amplitude = {8, 22};
    r.curve_period = {10, 16};
    return r;
}

ChainSpecRanges ChainSpecRanges::by_name(const std::string& name) {
    if (name == "lumbar") return lumbar_like();
    if (name == "wholespine") return wholespine_like();
    throw std::invalid_argument("unknown chain preset: " + name);
}

ChainSpec sample_spec(const ChainSpecRanges& ranges, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0x5eedf00d));
    auto draw = [&rng](ChainSpecRanges::Range r) {
        std::uniform_real_distribution<double> d(r.lo, r.hi);
        return d(rng);
    };
    ChainSpec s = ranges.base;
    s.base_size = draw(ranges.base_size);
    s.shrink = std::min(1.0, draw(ranges.shrink));
    s.gap = draw(ranges.gap);
    s.curve_amplitude = draw(ranges.curve_amplitude);
    s.curve_period = draw(ranges.curve_period);
    s.rotation_jitter = draw(ranges.rotation_jitter);
    s.intensity_mean = draw(ranges.intensity_mean);
    s.intensity_std = draw(ranges.intensity_std);
    s.noise_std = draw(ranges.noise_std);
    s.seed = mix_seed(seed, 0xc0ffee);
    return s;
}

DatasetSplit split_dataset(int n_images, const ChainSpecRanges& ranges, double train_frac,
                           double val_frac, double test_frac, std::uint64_t seed) {
    if (n_images < 1) throw std::invalid_argument("split_dataset: n_images must be >= 1");
    if (train_frac < 0 || val_frac < 0 || test_frac < 0 ||
        std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
        throw std::invalid_argument("split_dataset: fractions must be >= 0 and sum to 1");

    DatasetSplit split;
    split.specs.reserve(static_cast<size_t>(n_images));
    for (int i = 0; i < n_images; ++i)
        split.specs.push_back(sample_spec(ranges, mix_seed(seed, static_cast<std::uint64_t>(i))));

    std::vector<int> order(static_cast<size_t>(n_images));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(seed, 0x511f7ULL));
    std::shuffle(order.begin(), order.end(), rng);

    const int n_val = static_cast<int>(std::floor(val_frac * n_images));
    const int n_test = static_cast<int>(std::floor(test_frac * n_images));
    const int n_train = n_images - n_val - n_test;

    for (int i = 0; i < n_images; ++i) {
        const int idx = order[static_cast<size_t>(i)];
        if (i < n_train)
            split.train.push_back(idx);
        else if (i < n_train + n_val)
            split.val.push_back(idx);
        else
            split.test.push_back(idx);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

} // namespace ladderdet
