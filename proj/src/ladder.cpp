#include "ladderdet/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ladderdet {

namespace {

bool rect_intersects_image(const Rect& r, const GrayImage& img) {
    return r.x1 > 0.0 && r.y1 > 0.0 && r.x0 < static_cast<double>(img.width) &&
           r.y0 < static_cast<double>(img.height);
}

bool raw_is_finite(const std::array<double, 16>& raw) {
    return std::all_of(raw.begin(), raw.end(), [](double v) { return std::isfinite(v); });
}

} // namespace

StepResult ladder_step(const GrayImage& img, const Quad& proposal, const Predictor& predictor,
                       const LadderConfig& cfg) {
    if (!quad_is_finite(proposal))
        throw std::invalid_argument("ladder_step: non-finite proposal");
    const Rect tight = tight_rect(proposal); // throws on degenerate proposals
    const Rect crop = expand_rect(tight, cfg.expansion);
    const PatchTransform t = make_transform(crop, cfg.patch_size);
    const GrayImage patch = resize_bicubic(crop_pad(img, crop), cfg.patch_size, cfg.patch_size);

    StepResult res;
    res.trace.crop = crop;
    res.trace.raw = predictor(patch, t);
    if (!raw_is_finite(res.trace.raw))
        throw NumericalError("ladder_step: predictor produced non-finite outputs");

    const Quad central_p =
        quad_from_flat(std::span<const double>(res.trace.raw).subspan(0, 8), Frame::patch);
    const Quad upper_p =
        quad_from_flat(std::span<const double>(res.trace.raw).subspan(8, 8), Frame::patch);
    res.detection = to_image(t, central_p);
    res.next_proposal = to_image(t, upper_p);
    if (std::abs(quad_signed_area(res.detection)) < 1e-9)
        throw NumericalError("ladder_step: degenerate detected quad");

    res.trace.detection = res.detection;
    res.trace.proposal = res.next_proposal;
    return res;
}

LadderState run_ladder(const GrayImage& img, const Quad& seed, const Predictor& predictor,
                       const LadderConfig& cfg) {
    if (cfg.iterations < 1)
        throw std::invalid_argument("run_ladder: iterations must be >= 1");
    validate_quad(seed);

    LadderState state;
    state.current_proposal = seed;
    for (int i = 0; i < cfg.iterations; ++i) {
        Rect tight;
        try {
            tight = tight_rect(state.current_proposal);
        } catch (const std::invalid_argument& e) {
            throw LadderError("iteration " + std::to_string(i) + ": " + e.what(), state);
        }
        if (!rect_intersects_image(tight, img))
            throw LadderError("iteration " + std::to_string(i) +
                                  ": proposal drifted fully outside the image",
                              state);
        StepResult step;
        try {
            step = ladder_step(img, state.current_proposal, predictor, cfg);
        } catch (const std::exception& e) {
            throw LadderError("iteration " + std::to_string(i) + ": " + e.what(), state);
        }
        state.detections.push_back(step.detection);
        state.trace.push_back(step.trace);
        state.current_proposal = step.next_proposal;
        state.iteration = i + 1;
        if (cfg.stop_hook && cfg.stop_hook(state.trace.back())) break;
    }
    return state;
}

Predictor make_net_predictor(const NetConfig& cfg,
                             std::shared_ptr<const NetParams<float>> params) {
    return [cfg, params](const GrayImage& patch, const PatchTransform&) {
        Tensor4<float> batch(1, 1, patch.height, patch.width);
        for (size_t i = 0; i < patch.data.size(); ++i)
            batch.data[i] = static_cast<float>(patch.data[i]);
        const Tensor4<float> out = net_infer(cfg, *params, batch);
        std::array<double, 16> raw{};
        for (int k = 0; k < 16; ++k) raw[static_cast<size_t>(k)] = out.data[static_cast<size_t>(k)];
        return raw;
    };
}

Predictor make_oracle_predictor(ChainAnnotation ann) {
    return [ann = std::move(ann)](const GrayImage&, const PatchTransform& t) {
        const Point2 center = t.crop.center();
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < ann.count(); ++i) {
            const double d = distance(centroid(ann.quads[static_cast<size_t>(i)]), center);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        const Quad central = ann.quads[static_cast<size_t>(best)];
        Quad upper;
        if (best + 1 < ann.count()) {
            upper = ann.quads[static_cast<size_t>(best + 1)];
        } else {
            // Topmost instance: extrapolate a phantom one body-plus-gap up;
            // the caller never uses this proposal when iterations match the
            // chain length.
            const Point2 top_mid = (central.corners[0] + central.corners[1]) * 0.5;
            const Point2 bot_mid = (central.corners[3] + central.corners[2]) * 0.5;
            const Point2 up = (top_mid - bot_mid) * 1.33;
            upper = central;
            for (Point2& p : upper.corners) p = p + up;
        }
        std::array<double, 16> raw{};
        const auto c = quad_flatten(to_patch(t, central));
        const auto u = quad_flatten(to_patch(t, upper));
        std::copy(c.begin(), c.end(), raw.begin());
        std::copy(u.begin(), u.end(), raw.begin() + 8);
        return raw;
    };
}

Predictor make_constant_predictor(std::array<double, 16> raw) {
    return [raw](const GrayImage&, const PatchTransform&) { return raw; };
}

} // namespace ladderdet
