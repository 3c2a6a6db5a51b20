#include "ladderdet/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "ladderdet/errors.hpp"
#include "ladderdet/image_io.hpp"

namespace ladderdet {

namespace fs = std::filesystem;

void AugmentConfig::validate() const {
    if (translate_px < 0) throw std::invalid_argument("AugmentConfig: translate_px < 0");
    if (expand_lo > expand_hi || blur_sigma_lo > blur_sigma_hi)
        throw std::invalid_argument("AugmentConfig: ranges must be ordered");
    if (flip_prob < 0 || flip_prob > 1)
        throw std::invalid_argument("AugmentConfig: flip_prob must be in [0,1]");
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void write_quad_targets(const Quad& q, std::array<double, 16>& out, int offset) {
    const auto flat = quad_flatten(q);
    std::copy(flat.begin(), flat.end(), out.begin() + offset);
}

} // namespace

TrainExample make_example(const GrayImage& img, const ChainAnnotation& ann, int index,
                          const AugmentConfig* aug, std::uint64_t rng_seed, int input_size) {
    if (index < 0 || index + 1 >= ann.count())
        throw std::invalid_argument("make_example: index needs an instance above it");
    if (aug) aug->validate();

    const Quad& central = ann.quads[static_cast<size_t>(index)];
    const Quad& upper = ann.quads[static_cast<size_t>(index + 1)];

    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Crop rect: tight box, per-side expansion, optional integer shift.
    Rect r = tight_rect(central);
    if (aug) {
        std::uniform_real_distribution<double> frac(aug->expand_lo, aug->expand_hi);
        const double l = frac(rng), t = frac(rng), rr = frac(rng), b = frac(rng);
        r = expand_rect_sides(r, l, t, rr, b);
        const int range = static_cast<int>(std::lround(aug->translate_px));
        std::uniform_int_distribution<int> off(-range, range);
        const int dx = off(rng);
        const int dy = off(rng);
        r = {r.x0 + dx, r.y0 + dy, r.x1 + dx, r.y1 + dy};
    } else {
        r = expand_rect(r, 0.75);
    }

    const PatchTransform t = make_transform(r, input_size);
    TrainExample ex;
    ex.patch = resize_bicubic(crop_pad(img, r), input_size, input_size);

    Quad central_p = to_patch(t, central);
    Quad upper_p = to_patch(t, upper);

    if (aug && unit(rng) < aug->flip_prob) {
        ex.patch = flip_horizontal(ex.patch);
        central_p = flip_quad_x(central_p, input_size);
        upper_p = flip_quad_x(upper_p, input_size);
    }
    if (aug) {
        std::uniform_real_distribution<double> sig(aug->blur_sigma_lo, aug->blur_sigma_hi);
        const double sigma = sig(rng) * input_size / 224.0;
        ex.patch = gaussian_blur(ex.patch, sigma);
    }

    write_quad_targets(central_p, ex.target, 0);
    write_quad_targets(upper_p, ex.target, 8);
    return ex;
}

void DataSubset::index_examples() {
    examples.clear();
    for (size_t i = 0; i < images.size(); ++i)
        for (int k = 0; k + 1 < images[i].ann.count(); ++k)
            examples.push_back({static_cast<int>(i), k});
}

DataSubset load_dataset_split(const std::string& dir, const std::string& split) {
    const fs::path root(dir);
    const fs::path splits_path = root / "splits.json";
    std::ifstream in(splits_path);
    if (!in) throw DataError("missing splits.json in dataset dir: " + dir);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad splits.json: " + std::string(e.what()));
    }
    if (!j.contains(split)) throw DataError("splits.json has no subset '" + split + "'");

    DataSubset out;
    for (const auto& name_j : j.at(split)) {
        const std::string name = name_j.get<std::string>();
        AnnotatedImage ai;
        ai.name = name;
        ai.ann = load_annotation((root / "annotations" / (name + ".json")).string());
        ai.image = normalize_minmax(load_image((root / "images" / (name + ".png")).string()));
        out.images.push_back(std::move(ai));
    }
    out.index_examples();
    return out;
}

namespace {

/// Assemble examples into float tensors (N,1,S,S) and (N,16,1,1).
void fill_batch(const DataSubset& set, const std::vector<ExampleRef>& refs, size_t first,
                size_t count, const AugmentConfig* aug, std::uint64_t seed, int epoch,
                int input_size, Tensor4<float>& batch, Tensor4<float>& targets) {
    batch = Tensor4<float>(static_cast<int>(count), 1, input_size, input_size);
    targets = Tensor4<float>(static_cast<int>(count), 16, 1, 1);
#pragma omp parallel for schedule(static)
    for (long b = 0; b < static_cast<long>(count); ++b) {
        const ExampleRef ref = refs[first + static_cast<size_t>(b)];
        const auto& ai = set.images[static_cast<size_t>(ref.image_idx)];
        const std::uint64_t ex_seed =
            mix(mix(aug ? aug->seed : 0, static_cast<std::uint64_t>(epoch)),
                (static_cast<std::uint64_t>(ref.image_idx) << 20) |
                    static_cast<std::uint64_t>(ref.ordinal));
        const TrainExample ex = make_example(ai.image, ai.ann, ref.ordinal, aug, ex_seed, input_size);
        float* dst = batch.plane(static_cast<int>(b), 0);
        for (size_t i = 0; i < ex.patch.data.size(); ++i)
            dst[i] = static_cast<float>(ex.patch.data[i]);
        for (int k = 0; k < 16; ++k)
            targets(static_cast<int>(b), k, 0, 0) = static_cast<float>(ex.target[static_cast<size_t>(k)]);
    }
}

double eval_loss(const NetConfig& cfg, const NetParams<float>& params, const DataSubset& set,
                 const std::vector<Tensor4<float>>& batches,
                 const std::vector<Tensor4<float>>& target_batches) {
    (void)set;
    double total = 0.0;
    long n = 0;
    for (size_t i = 0; i < batches.size(); ++i) {
        Tensor4<float> pred = net_infer(cfg, params, batches[i]);
        const double loss = l2_loss(pred, target_batches[i], static_cast<Tensor4<float>*>(nullptr));
        total += loss * batches[i].n;
        n += batches[i].n;
    }
    return n > 0 ? total / static_cast<double>(n) : 0.0;
}

} // namespace

TrainResult train(const NetConfig& cfg, NetParams<float> init, const DataSubset& train_set,
                  const DataSubset& val_set, const TrainOptions& opts) {
    cfg.validate();
    opts.adam.validate();
    if (train_set.examples.empty() || val_set.examples.empty())
        throw std::invalid_argument("train: empty train or val set");
    if (opts.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");

    TrainResult result;
    result.params = std::move(init);
    result.best_val_loss = std::numeric_limits<double>::infinity();
    if (opts.max_epochs <= 0) return result;

    // Validation examples are fixed (unaugmented) for the whole run.
    std::vector<Tensor4<float>> val_batches, val_targets;
    {
        const auto& refs = val_set.examples;
        for (size_t first = 0; first < refs.size(); first += static_cast<size_t>(opts.batch_size)) {
            const size_t count = std::min(static_cast<size_t>(opts.batch_size), refs.size() - first);
            Tensor4<float> b, t;
            fill_batch(val_set, refs, first, count, nullptr, 0, 0, cfg.input_size, b, t);
            val_batches.push_back(std::move(b));
            val_targets.push_back(std::move(t));
        }
    }

    NetParams<float> params = std::move(result.params);
    NetParams<float> best = params;
    int best_epoch = 0;
    int stall = 0;

    AugmentConfig aug = opts.aug;
    aug.seed = aug.seed == 0 ? opts.seed : aug.seed;

    std::vector<ExampleRef> order = train_set.examples;
    for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(mix(opts.seed, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_loss = 0.0;
        long seen = 0;
        for (size_t first = 0; first < order.size(); first += static_cast<size_t>(opts.batch_size)) {
            const size_t count = std::min(static_cast<size_t>(opts.batch_size), order.size() - first);
            Tensor4<float> batch, targets;
            fill_batch(train_set, order, first, count, opts.augment ? &aug : nullptr, opts.seed,
                       epoch, cfg.input_size, batch, targets);

            ForwardCache<float> cache;
            Tensor4<float> pred = net_forward(cfg, params, batch, RunMode::train, &cache);
            Tensor4<float> grad;
            const double loss = l2_loss(pred, targets, &grad);
            if (!std::isfinite(loss))
                throw TrainingDiverged("train: non-finite loss at epoch " + std::to_string(epoch),
                                       result.history);
            NetGrads<float> grads = net_backward(cfg, params, cache, grad);
            adam_step(params, grads, opts.adam);

            epoch_loss += loss * static_cast<double>(count);
            seen += static_cast<long>(count);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = epoch_loss / static_cast<double>(seen);
        stats.val_loss = eval_loss(cfg, params, val_set, val_batches, val_targets);
        if (!std::isfinite(stats.val_loss))
            throw TrainingDiverged("train: non-finite validation loss at epoch " +
                                       std::to_string(epoch),
                                   result.history);
        result.history.push_back(stats);
        if (opts.on_epoch) opts.on_epoch(stats);

        if (stats.val_loss < result.best_val_loss * (1.0 - opts.min_rel_improvement)) {
            result.best_val_loss = stats.val_loss;
            best = params;
            best_epoch = epoch;
            stall = 0;
        } else {
            if (stats.val_loss < result.best_val_loss) {
                // still keep the best weights even when the gain is below
                // the convergence threshold
                result.best_val_loss = stats.val_loss;
                best = params;
                best_epoch = epoch;
            }
            ++stall;
            if (stall >= opts.patience) break;
        }
    }

    result.params = std::move(best);
    result.best_epoch = best_epoch;
    return result;
}

void write_loss_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write loss history: " + path);
    out << "epoch,train_loss,val_loss\n";
    for (const auto& e : history)
        out << e.epoch << "," << e.train_loss << "," << e.val_loss << "\n";
}

} // namespace ladderdet
