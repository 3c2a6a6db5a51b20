#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "ladderdet/annotation.hpp"
#include "ladderdet/checkpoint.hpp"
#include "ladderdet/errors.hpp"
#include "ladderdet/geometry.hpp"
#include "ladderdet/image.hpp"

namespace ladderdet {

/// Maps an extracted patch to 16 patch-frame coordinates: the central
/// instance's corners, then the corners of the instance above. The
/// transform that produced the patch is supplied for predictors that need
/// image-frame context (the ground-truth oracle); network predictors
/// ignore it.
using Predictor =
    std::function<std::array<double, 16>(const GrayImage& patch, const PatchTransform& t)>;

struct StepTrace {
    Rect crop;
    std::array<double, 16> raw{};
    Quad detection;
    Quad proposal;
};

struct LadderConfig {
    int iterations = 6;       // 6 for short chains, 23 for full ones
    double expansion = 0.75;  // patch context around the tight rect
    int patch_size = 224;
    std::function<bool(const StepTrace&)> stop_hook; // optional; true = halt after this step

    static LadderConfig lumbar(int patch_size = 224);
    static LadderConfig wholespine(int patch_size = 224);
};

inline LadderConfig LadderConfig::lumbar(int patch_size) {
    return {6, 0.75, patch_size, nullptr};
}
inline LadderConfig LadderConfig::wholespine(int patch_size) {
    return {23, 0.75, patch_size, nullptr};
}

struct LadderState {
    Quad current_proposal;
    std::vector<Quad> detections;
    int iteration = 0;
    std::vector<StepTrace> trace;
};

/// Raised when a step fails; carries the state accumulated so far.
struct LadderError : NumericalError {
    LadderState partial;
    LadderError(const std::string& msg, LadderState state)
        : NumericalError(msg), partial(std::move(state)) {}
};

struct StepResult {
    Quad detection;     // image frame, saved
    Quad next_proposal; // image frame, seeds the next patch
    StepTrace trace;
};

/// One rung: crop around the proposal, resize, predict, split the 16
/// outputs into the central and upper quads, and map both back to the
/// image frame.
StepResult ladder_step(const GrayImage& img, const Quad& proposal, const Predictor& predictor,
                       const LadderConfig& cfg);

/// Iterate ladder_step from the seed, feeding each proposal forward, for
/// cfg.iterations steps or until the stop hook fires.
LadderState run_ladder(const GrayImage& img, const Quad& seed, const Predictor& predictor,
                       const LadderConfig& cfg);

/// Network-backed predictor (frozen weights, eval mode).
Predictor make_net_predictor(const NetConfig& cfg, std::shared_ptr<const NetParams<float>> params);

/// Ground-truth oracle: returns the annotated quad nearest the crop center
/// and the one above it (extrapolated for the topmost instance), both in
/// patch frame.
Predictor make_oracle_predictor(ChainAnnotation ann);

Predictor make_constant_predictor(std::array<double, 16> raw);

} // namespace ladderdet
