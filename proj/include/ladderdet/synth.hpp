#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ladderdet/annotation.hpp"
#include "ladderdet/image.hpp"

namespace ladderdet {

/// Parameters for one rendered chain image. Instances are rounded bright
/// quads stacked bottom-to-top along a sinusoidal curve, shrinking
/// multiplicatively on the way up.
struct ChainSpec {
    int count = 7;             // instances, >= 2
    int width = 320;           // canvas, px
    int height = 448;
    double base_size = 44.0;   // width of the bottom instance, px
    double aspect = 0.72;      // body height / body width
    double shrink = 0.98;      // per-step size ratio, in (0,1]
    double gap = 0.33;         // edge-to-edge gap as a ratio of the lower body height
    double curve_amplitude = 12.0; // px
    double curve_period = 10.0;    // instances per full sine cycle
    double rotation_jitter = 4.0;  // deg, uniform per instance on top of the curve tangent
    double intensity_mean = 0.78;
    double intensity_std = 0.05;
    double noise_std = 0.03;
    double corner_radius = 0.18;   // ratio of the smaller body dimension
    double background = 0.14;
    double gradient_amp = 0.06;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Render a chain and its exact ground truth. Deterministic in the spec;
/// throws DataError when the chain does not fit the canvas.
std::pair<GrayImage, ChainAnnotation> generate_chain(const ChainSpec& spec);

/// Closed ranges the per-image sampler draws from; count and canvas come
/// from `base`.
struct ChainSpecRanges {
    ChainSpec base;
    struct Range {
        double lo = 0.0, hi = 0.0;
    };
    Range base_size{40, 48};
    Range shrink{0.97, 1.0};
    Range gap{0.28, 0.38};
    Range curve_amplitude{6, 18};
    Range curve_period{8, 14};
    Range rotation_jitter{1, 6};
    Range intensity_mean{0.70, 0.85};
    Range intensity_std{0.03, 0.07};
    Range noise_std{0.02, 0.04};

    /// 7 instances on a lumbar-scale canvas (the training regime).
    static ChainSpecRanges lumbar_like();
    /// 23 instances on a tall canvas (the generalization regime).
    static ChainSpecRanges wholespine_like();
    static ChainSpecRanges by_name(const std::string& name);
};

ChainSpec sample_spec(const ChainSpecRanges& ranges, std::uint64_t seed);

/// Deterministic disjoint/exhaustive split of sampled chain specs. Val and
/// test sizes are floored; the remainder goes to train. Index lists refer
/// into `specs` (index = image id).
struct DatasetSplit {
    std::vector<ChainSpec> specs;
    std::vector<int> train, val, test;
};

DatasetSplit split_dataset(int n_images, const ChainSpecRanges& ranges, double train_frac,
                           double val_frac, double test_frac, std::uint64_t seed);

} // namespace ladderdet
