#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ladderdet/annotation.hpp"
#include "ladderdet/image.hpp"
#include "ladderdet/net.hpp"

namespace ladderdet {

/// One supervised example: a square patch and the 16 target values
/// (central quad corners then the quad above, TL,TR,BR,BL, x/y interleaved,
/// patch frame).
struct TrainExample {
    GrayImage patch;
    std::array<double, 16> target{};
};

/// The four augmentations: integer crop translation in the original image,
/// per-side expansion replacing the fixed 75%, horizontal flip with target
/// remap, and Gaussian blur of the resized patch. The blur sigma range is
/// stated for 224 px inputs and scales with the actual input size.
struct AugmentConfig {
    double translate_px = 10.0;
    double expand_lo = 0.60;
    double expand_hi = 0.90;
    double flip_prob = 0.5;
    double blur_sigma_lo = 3.0;
    double blur_sigma_hi = 30.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Build the example for instance `index`; the instance above supplies the
/// second half of the target, so index+1 must exist. Pass aug = nullptr
/// for the deterministic unaugmented pipeline; rng_seed drives all random
/// draws so construction can run in parallel.
TrainExample make_example(const GrayImage& img, const ChainAnnotation& ann, int index,
                          const AugmentConfig* aug, std::uint64_t rng_seed, int input_size);

/// In-memory annotated image plus its enumerable training ordinals.
struct AnnotatedImage {
    GrayImage image;
    ChainAnnotation ann;
    std::string name;
};

struct ExampleRef {
    int image_idx = 0;
    int ordinal = 0;
};

struct DataSubset {
    std::vector<AnnotatedImage> images;
    std::vector<ExampleRef> examples;

    /// Enumerate ordinals 0..count-2 of every image.
    void index_examples();
};

/// Read one split ("train", "val" or "test") of a dataset directory written
/// by the synth command: images/, annotations/, splits.json. Images are
/// min-max normalized on load.
DataSubset load_dataset_split(const std::string& dir, const std::string& split);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainOptions {
    int batch_size = 32;
    int max_epochs = 100;
    int patience = 10;
    double min_rel_improvement = 1e-3; // convergence = no 0.1% val gain for `patience` epochs
    std::uint64_t seed = 0;
    bool augment = true;
    AugmentConfig aug;
    AdamConfig adam;
    std::function<void(const EpochStats&)> on_epoch; // optional progress hook
};

struct TrainResult {
    NetParams<float> params; // best-validation checkpoint
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_val_loss = 0.0;
};

/// Carries the partial loss history out of a diverged run.
struct TrainingDiverged : NumericalError {
    std::vector<EpochStats> history;
    TrainingDiverged(const std::string& msg, std::vector<EpochStats> h)
        : NumericalError(msg), history(std::move(h)) {}
};

/// Mini-batch Adam on the L2 corner loss with early stopping on the
/// validation loss; returns the best-validation parameters. Deterministic
/// for a fixed seed (example RNG streams are split per example identity).
TrainResult train(const NetConfig& cfg, NetParams<float> init, const DataSubset& train_set,
                  const DataSubset& val_set, const TrainOptions& opts);

void write_loss_csv(const std::vector<EpochStats>& history, const std::string& path);

} // namespace ladderdet
