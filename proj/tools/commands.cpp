#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <set>

#include "ladderdet/annotation.hpp"
#include "ladderdet/checkpoint.hpp"
#include "ladderdet/errors.hpp"
#include "ladderdet/eval.hpp"
#include "ladderdet/image_io.hpp"
#include "ladderdet/ladder.hpp"
#include "ladderdet/render.hpp"
#include "ladderdet/synth.hpp"
#include "ladderdet/training.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ladderdet::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Load a JSON config; a run manifest is accepted too (its "config" field
/// is unwrapped), so any command can be replayed from its manifest.
json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("bad JSON config " + path + ": " + e.what());
    }
    if (j.is_object() && j.contains("config")) return j.at("config");
    return j;
}

template <typename T>
void merge(const json& cfg, const char* key, const CLI::Option* opt, T& value) {
    if (opt != nullptr && opt->count() > 0) return; // explicit flag wins
    if (cfg.contains(key)) {
        try {
            value = cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw DataError(std::string("config field '") + key + "': " + e.what());
        }
    }
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

/// Every run drops one manifest with the resolved configuration; re-running
/// with --config <manifest> reproduces the outputs (timestamps aside).
void write_manifest(const fs::path& path, const std::string& command, const json& config) {
    json m{{"command", command},
           {"version", kVersion},
           {"timestamp", timestamp_utc()},
           {"config", config}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest: " + path.string());
    out << m.dump(2) << "\n";
}

void set_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

std::string image_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "chain_%04d", index);
    return buf;
}

// ------------------------------------------------------------------ synth

struct SynthOpts {
    std::string config_path;
    std::string preset = "lumbar";
    int count = 10;
    std::string out;
    std::uint64_t seed = 0;
    std::vector<double> fractions{0.8, 0.1, 0.1};
    int threads = 0;
};

ChainSpecRanges::Range range_from_json(const json& j, const char* key,
                                       ChainSpecRanges::Range fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_number()) return {v.get<double>(), v.get<double>()};
    if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
    throw DataError(std::string("config field '") + key + "' must be a number or [lo,hi]");
}

ChainSpecRanges ranges_from_config(const std::string& preset, const json& cfg) {
    ChainSpecRanges r = ChainSpecRanges::by_name(preset);
    if (cfg.contains("chain")) {
        const json& c = cfg.at("chain");
        if (c.contains("count")) r.base.count = c.at("count").get<int>();
        if (c.contains("width")) r.base.width = c.at("width").get<int>();
        if (c.contains("height")) r.base.height = c.at("height").get<int>();
        if (c.contains("aspect")) r.base.aspect = c.at("aspect").get<double>();
        r.base_size = range_from_json(c, "base_size", r.base_size);
        r.shrink = range_from_json(c, "shrink", r.shrink);
        r.gap = range_from_json(c, "gap", r.gap);
        r.curve_amplitude = range_from_json(c, "curve_amplitude", r.curve_amplitude);
        r.curve_period = range_from_json(c, "curve_period", r.curve_period);
        r.rotation_jitter = range_from_json(c, "rotation_jitter", r.rotation_jitter);
        r.intensity_mean = range_from_json(c, "intensity_mean", r.intensity_mean);
        r.intensity_std = range_from_json(c, "intensity_std", r.intensity_std);
        r.noise_std = range_from_json(c, "noise_std", r.noise_std);
    }
    return r;
}

void run_synth(const SynthOpts& o, const json& cfg) {
    if (o.count < 1) throw UsageError("--count must be >= 1 (empty dataset refused)");
    if (o.fractions.size() != 3) throw UsageError("--fractions needs three values");
    if (o.out.empty()) throw UsageError("--out is required");
    set_threads(o.threads);

    const ChainSpecRanges ranges = ranges_from_config(o.preset, cfg);
    const DatasetSplit split =
        split_dataset(o.count, ranges, o.fractions[0], o.fractions[1], o.fractions[2], o.seed);

    const fs::path root(o.out);
    fs::create_directories(root / "images");
    fs::create_directories(root / "annotations");

    for (int i = 0; i < o.count; ++i) {
        auto [img, ann] = generate_chain(split.specs[static_cast<size_t>(i)]);
        const std::string name = image_name(i);
        ann.image = name + ".png";
        save_png16(img, (root / "images" / (name + ".png")).string());
        save_annotation(ann, (root / "annotations" / (name + ".json")).string());
    }

    auto names = [](const std::vector<int>& idx) {
        json arr = json::array();
        for (int i : idx) arr.push_back(image_name(i));
        return arr;
    };
    json splits{{"train", names(split.train)}, {"val", names(split.val)}, {"test", names(split.test)}};
    std::ofstream sf(root / "splits.json");
    if (!sf) throw DataError("cannot write splits.json");
    sf << splits.dump(2) << "\n";

    json resolved{{"preset", o.preset},
                  {"count", o.count},
                  {"seed", o.seed},
                  {"out", o.out},
                  {"fractions", o.fractions}};
    if (cfg.contains("chain")) resolved["chain"] = cfg.at("chain");
    write_manifest(root / "manifest.json", "synth", resolved);
    std::printf("wrote %d images to %s (train/val/test = %zu/%zu/%zu)\n", o.count,
                o.out.c_str(), split.train.size(), split.val.size(), split.test.size());
}

// ------------------------------------------------------------------ train

struct TrainOpts {
    std::string config_path;
    std::string data;
    std::string net = "desk";
    std::string out;
    std::string loss_csv;
    int epochs = 60;
    int batch_size = 32;
    double lr = 1e-3;
    int patience = 8;
    std::uint64_t seed = 0;
    bool no_augment = false;
    int threads = 0;
};

void run_train(const TrainOpts& o, const json& cfg) {
    (void)cfg;
    if (o.data.empty() || o.out.empty()) throw UsageError("--data and --out are required");
    set_threads(o.threads);

    const NetConfig net = NetConfig::by_name(o.net);
    DataSubset train_set = load_dataset_split(o.data, "train");
    DataSubset val_set = load_dataset_split(o.data, "val");
    if (train_set.examples.empty()) throw DataError("training split has no examples");
    if (val_set.examples.empty()) throw DataError("validation split has no examples");

    TrainOptions opts;
    opts.batch_size = o.batch_size;
    opts.max_epochs = o.epochs;
    opts.patience = o.patience;
    opts.seed = o.seed;
    opts.augment = !o.no_augment;
    opts.adam.lr = o.lr;
    opts.on_epoch = [](const EpochStats& e) {
        std::printf("epoch %3d  train %.4f  val %.4f\n", e.epoch, e.train_loss, e.val_loss);
        std::fflush(stdout);
    };

    NetParams<float> init = init_params<float>(net, o.seed);
    const TrainResult result = train(net, std::move(init), train_set, val_set, opts);
    save_checkpoint(o.out, net, result.params);

    const std::string csv = o.loss_csv.empty() ? o.out + ".loss.csv" : o.loss_csv;
    write_loss_csv(result.history, csv);

    json resolved{{"data", o.data},       {"net", o.net},
                  {"out", o.out},         {"epochs", o.epochs},
                  {"batch_size", o.batch_size}, {"lr", o.lr},
                  {"patience", o.patience},     {"seed", o.seed},
                  {"no_augment", o.no_augment}, {"loss_csv", csv}};
    write_manifest(fs::path(o.out + ".manifest.json"), "train", resolved);
    std::printf("best validation loss %.4f at epoch %d; checkpoint %s\n", result.best_val_loss,
                result.best_epoch, o.out.c_str());
}

// -------------------------------------------------------------------- run

struct RunOpts {
    std::string config_path;
    std::string image;
    std::string checkpoint;
    std::string seed_ann;
    int seed_index = 0;
    std::vector<double> seed_coords;
    int iterations = 6;
    double expansion = 0.75;
    bool oracle = false;
    std::string out;
    std::string trace_path;
    int threads = 0;
};

int ordinal_from_label(const std::string& label) {
    size_t pos = label.find_first_of("0123456789");
    if (pos == std::string::npos) return 0;
    return std::atoi(label.c_str() + pos);
}

void run_run(const RunOpts& o, const json& cfg) {
    (void)cfg;
    if (o.image.empty() || o.out.empty()) throw UsageError("--image and --out are required");
    if (o.iterations < 1) throw UsageError("--iterations must be >= 1");
    if (o.oracle && o.seed_ann.empty())
        throw UsageError("--oracle requires --seed-ann (the ground-truth annotation)");
    if (!o.oracle && o.checkpoint.empty())
        throw UsageError("either --checkpoint or --oracle is required");
    if (o.seed_ann.empty() && o.seed_coords.empty())
        throw UsageError("seed quad needed: --seed-ann or --seed-coords x0,y0,...,y3");
    set_threads(o.threads);

    const GrayImage img = normalize_minmax(load_image(o.image));

    Quad seed;
    std::string seed_label = "V0";
    std::optional<ChainAnnotation> ann;
    if (!o.seed_ann.empty()) {
        ann = load_annotation(o.seed_ann);
        if (o.seed_index < 0 || o.seed_index >= ann->count())
            throw DataError("--seed-index out of range for " + o.seed_ann);
        seed = ann->quads[static_cast<size_t>(o.seed_index)];
        seed_label = ann->labels[static_cast<size_t>(o.seed_index)];
    }
    if (!o.seed_coords.empty()) {
        if (o.seed_coords.size() != 8) throw UsageError("--seed-coords needs 8 values");
        seed = quad_from_flat(o.seed_coords, Frame::image);
    }
    validate_quad(seed);
    {
        const Rect t = tight_rect(seed);
        if (t.x1 <= 0 || t.y1 <= 0 || t.x0 >= img.width || t.y0 >= img.height)
            throw DataError("seed quad lies outside the image");
    }

    LadderConfig lc;
    lc.iterations = o.iterations;
    lc.expansion = o.expansion;

    Predictor predictor;
    if (o.oracle) {
        lc.patch_size = 224;
        predictor = make_oracle_predictor(*ann);
    } else {
        Checkpoint ck = load_checkpoint(o.checkpoint);
        lc.patch_size = ck.config.input_size;
        auto params = std::make_shared<NetParams<float>>(std::move(ck.params));
        predictor = make_net_predictor(ck.config, std::move(params));
    }

    const LadderState state = run_ladder(img, seed, predictor, lc);

    DetectionFile det;
    det.seed = seed;
    det.iterations = state.iteration;
    det.detections = state.detections;
    const int start = ordinal_from_label(seed_label);
    for (size_t i = 0; i < state.detections.size(); ++i)
        det.labels.push_back("V" + std::to_string(start + static_cast<int>(i)));
    save_detections(det, o.out);

    if (!o.trace_path.empty()) {
        json steps = json::array();
        for (const auto& s : state.trace) {
            json raw = json::array();
            for (double v : s.raw) raw.push_back(v);
            json det_c = json::array(), prop_c = json::array();
            for (const Point2& p : s.detection.corners) det_c.push_back({p.x, p.y});
            for (const Point2& p : s.proposal.corners) prop_c.push_back({p.x, p.y});
            steps.push_back({{"crop", {s.crop.x0, s.crop.y0, s.crop.x1, s.crop.y1}},
                             {"raw", raw},
                             {"detection", det_c},
                             {"proposal", prop_c}});
        }
        std::ofstream tf(o.trace_path);
        if (!tf) throw DataError("cannot write trace: " + o.trace_path);
        tf << steps.dump(2) << "\n";
    }

    json resolved{{"image", o.image},
                  {"checkpoint", o.checkpoint},
                  {"seed_ann", o.seed_ann},
                  {"seed_index", o.seed_index},
                  {"seed_coords", o.seed_coords},
                  {"iterations", o.iterations},
                  {"expansion", o.expansion},
                  {"oracle", o.oracle},
                  {"out", o.out},
                  {"trace", o.trace_path}};
    write_manifest(fs::path(o.out + ".manifest.json"), "run", resolved);
    std::printf("saved %zu detections to %s\n", state.detections.size(), o.out.c_str());
}

// ------------------------------------------------------------------- eval

struct EvalOpts {
    std::string config_path;
    std::string dets;
    std::string truth;
    double spacing = 0.0; // 0 = pixel units
    std::string out = "report";
    int threads = 0;
};

std::vector<fs::path> json_files(const fs::path& p) {
    std::vector<fs::path> files;
    if (fs::is_directory(p)) {
        for (const auto& e : fs::directory_iterator(p))
            if (e.path().extension() == ".json" && e.path().filename() != "splits.json" &&
                e.path().filename() != "manifest.json" &&
                e.path().string().find(".manifest.json") == std::string::npos)
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else if (fs::exists(p)) {
        files.push_back(p);
    } else {
        throw DataError("no such file or directory: " + p.string());
    }
    return files;
}

void run_eval(const EvalOpts& o, const json& cfg) {
    (void)cfg;
    if (o.dets.empty() || o.truth.empty()) throw UsageError("--dets and --truth are required");
    set_threads(o.threads);

    const auto det_files = json_files(o.dets);
    const auto truth_files = json_files(o.truth);

    std::map<std::string, fs::path> det_by_stem, truth_by_stem;
    for (const auto& f : det_files) det_by_stem[f.stem().string()] = f;
    for (const auto& f : truth_files) truth_by_stem[f.stem().string()] = f;

    std::vector<std::string> missing_det, missing_truth;
    for (const auto& [stem, _] : truth_by_stem)
        if (!det_by_stem.count(stem)) missing_det.push_back(stem);
    for (const auto& [stem, _] : det_by_stem)
        if (!truth_by_stem.count(stem)) missing_truth.push_back(stem);
    if (!missing_det.empty() || !missing_truth.empty()) {
        std::string msg = "detections and truth do not match;";
        if (!missing_det.empty()) {
            msg += " missing detections for:";
            for (const auto& s : missing_det) msg += " " + s;
        }
        if (!missing_truth.empty()) {
            msg += " missing truth for:";
            for (const auto& s : missing_truth) msg += " " + s;
        }
        throw DataError(msg);
    }

    const std::optional<double> spacing =
        o.spacing > 0.0 ? std::optional<double>(o.spacing) : std::nullopt;

    std::vector<std::pair<std::string, DetectionReport>> per_image;
    std::vector<DetectionReport> all;
    for (const auto& [stem, det_path] : det_by_stem) {
        const DetectionFile det = load_detections(det_path.string());
        const ChainAnnotation truth = load_annotation(truth_by_stem.at(stem).string());
        const Matching m = match_detections(det.detections, truth.quads);
        DetectionReport r = report(m, spacing);
        all.push_back(r);
        per_image.emplace_back(stem, std::move(r));
    }
    const DetectionReport pooled = aggregate(all);

    std::vector<std::pair<std::string, DetectionReport>> rows;
    rows.emplace_back("all", pooled);
    write_report_csv(rows, o.out + ".csv");
    auto json_rows = rows;
    json_rows.insert(json_rows.end(), per_image.begin(), per_image.end());
    write_report_json(json_rows, o.out + ".json");

    json resolved{{"dets", o.dets}, {"truth", o.truth}, {"spacing", o.spacing}, {"out", o.out}};
    write_manifest(fs::path(o.out + ".manifest.json"), "eval", resolved);

    std::printf("%s", report_csv(rows).c_str());
}

// ----------------------------------------------------------------- render

struct RenderOpts {
    std::string config_path;
    std::string image;
    std::string dets;
    std::string truth;
    std::string out;
};

void run_render(const RenderOpts& o, const json& cfg) {
    (void)cfg;
    if (o.image.empty() || o.out.empty()) throw UsageError("--image and --out are required");
    const GrayImage img = load_image(o.image);
    std::vector<Quad> detections, truth;
    if (!o.dets.empty()) detections = load_detections(o.dets).detections;
    if (!o.truth.empty()) truth = load_annotation(o.truth).quads;
    const RgbImage overlay = render_overlay(img, detections, truth);
    save_png_rgb(overlay, o.out);

    json resolved{{"image", o.image}, {"dets", o.dets}, {"truth", o.truth}, {"out", o.out}};
    write_manifest(fs::path(o.out + ".manifest.json"), "render", resolved);
    std::printf("wrote overlay %s\n", o.out.c_str());
}

} // namespace

// ---------------------------------------------------------- registration

void register_synth(CLI::App& app) {
    auto opts = std::make_shared<SynthOpts>();
    CLI::App* cmd = app.add_subcommand("synth", "Generate a synthetic chain dataset");
    cmd->add_option("--config", opts->config_path, "JSON config (or a previous manifest)");
    auto* preset = cmd->add_option("--preset", opts->preset, "Chain preset: lumbar | wholespine");
    auto* count = cmd->add_option("--count", opts->count, "Number of images");
    auto* out = cmd->add_option("--out", opts->out, "Output dataset directory");
    auto* seed = cmd->add_option("--seed", opts->seed, "RNG seed");
    auto* fractions =
        cmd->add_option("--fractions", opts->fractions, "train,val,test fractions")->expected(3);
    auto* threads = cmd->add_option("--threads", opts->threads, "Worker threads (0 = default)");
    cmd->callback([opts, preset, count, out, seed, fractions, threads]() {
        const json cfg = load_config(opts->config_path);
        merge(cfg, "preset", preset, opts->preset);
        merge(cfg, "count", count, opts->count);
        merge(cfg, "out", out, opts->out);
        merge(cfg, "seed", seed, opts->seed);
        merge(cfg, "fractions", fractions, opts->fractions);
        merge(cfg, "threads", threads, opts->threads);
        run_synth(*opts, cfg);
    });
}

void register_train(CLI::App& app) {
    auto opts = std::make_shared<TrainOpts>();
    CLI::App* cmd = app.add_subcommand("train", "Train the corner-regression network");
    cmd->add_option("--config", opts->config_path, "JSON config (or a previous manifest)");
    auto* data = cmd->add_option("--data", opts->data, "Dataset directory from `synth`");
    auto* net = cmd->add_option("--net", opts->net, "Net preset: desk | paper");
    auto* out = cmd->add_option("--out", opts->out, "Output checkpoint path");
    auto* csv = cmd->add_option("--loss-csv", opts->loss_csv, "Loss history CSV path");
    auto* epochs = cmd->add_option("--epochs", opts->epochs, "Max epochs");
    auto* batch = cmd->add_option("--batch-size", opts->batch_size, "Mini-batch size");
    auto* lr = cmd->add_option("--lr", opts->lr, "Adam learning rate");
    auto* patience = cmd->add_option("--patience", opts->patience, "Early-stopping patience");
    auto* seed = cmd->add_option("--seed", opts->seed, "RNG seed");
    auto* noaug = cmd->add_flag("--no-augment", opts->no_augment, "Disable augmentation");
    auto* threads = cmd->add_option("--threads", opts->threads, "Worker threads (0 = default)");
    cmd->callback([opts, data, net, out, csv, epochs, batch, lr, patience, seed, noaug,
                   threads]() {
        const json cfg = load_config(opts->config_path);
        merge(cfg, "data", data, opts->data);
        merge(cfg, "net", net, opts->net);
        merge(cfg, "out", out, opts->out);
        merge(cfg, "loss_csv", csv, opts->loss_csv);
        merge(cfg, "epochs", epochs, opts->epochs);
        merge(cfg, "batch_size", batch, opts->batch_size);
        merge(cfg, "lr", lr, opts->lr);
        merge(cfg, "patience", patience, opts->patience);
        merge(cfg, "seed", seed, opts->seed);
        merge(cfg, "no_augment", noaug, opts->no_augment);
        merge(cfg, "threads", threads, opts->threads);
        run_train(*opts, cfg);
    });
}

void register_run(CLI::App& app) {
    auto opts = std::make_shared<RunOpts>();
    CLI::App* cmd = app.add_subcommand("run", "Run the ladder on one image");
    cmd->add_option("--config", opts->config_path, "JSON config (or a previous manifest)");
    auto* image = cmd->add_option("--image", opts->image, "Input image (PNG or PGM)");
    auto* ckpt = cmd->add_option("--checkpoint", opts->checkpoint, "Trained checkpoint");
    auto* sann = cmd->add_option("--seed-ann", opts->seed_ann, "Annotation file providing the seed quad");
    auto* sidx = cmd->add_option("--seed-index", opts->seed_index, "Instance index in --seed-ann");
    auto* scoords = cmd->add_option("--seed-coords", opts->seed_coords,
                                    "Literal seed quad x0,y0,...,y3 (TL,TR,BR,BL)")
                        ->expected(8)->delimiter(',');
    auto* iters = cmd->add_option("--iterations", opts->iterations, "Ladder iterations (6 short, 23 full)");
    auto* expansion = cmd->add_option("--expansion", opts->expansion, "Patch expansion fraction");
    auto* oracle = cmd->add_flag("--oracle", opts->oracle, "Use the ground-truth oracle predictor");
    auto* out = cmd->add_option("--out", opts->out, "Detections JSON path");
    auto* trace = cmd->add_option("--trace", opts->trace_path, "Per-step trace JSON path");
    auto* threads = cmd->add_option("--threads", opts->threads, "Worker threads (0 = default)");
    cmd->callback([opts, image, ckpt, sann, sidx, scoords, iters, expansion, oracle, out, trace,
                   threads]() {
        const json cfg = load_config(opts->config_path);
        merge(cfg, "image", image, opts->image);
        merge(cfg, "checkpoint", ckpt, opts->checkpoint);
        merge(cfg, "seed_ann", sann, opts->seed_ann);
        merge(cfg, "seed_index", sidx, opts->seed_index);
        merge(cfg, "seed_coords", scoords, opts->seed_coords);
        merge(cfg, "iterations", iters, opts->iterations);
        merge(cfg, "expansion", expansion, opts->expansion);
        merge(cfg, "oracle", oracle, opts->oracle);
        merge(cfg, "out", out, opts->out);
        merge(cfg, "trace", trace, opts->trace_path);
        merge(cfg, "threads", threads, opts->threads);
        run_run(*opts, cfg);
    });
}

void register_eval(CLI::App& app) {
    auto opts = std::make_shared<EvalOpts>();
    CLI::App* cmd = app.add_subcommand("eval", "Score detections against ground truth");
    cmd->add_option("--config", opts->config_path, "JSON config (or a previous manifest)");
    auto* dets = cmd->add_option("--dets", opts->dets, "Detections JSON file or directory");
    auto* truth = cmd->add_option("--truth", opts->truth, "Annotation JSON file or directory");
    auto* spacing = cmd->add_option("--spacing", opts->spacing, "Pixel spacing in mm/px (0 = px units)");
    auto* out = cmd->add_option("--out", opts->out, "Report path prefix");
    auto* threads = cmd->add_option("--threads", opts->threads, "Worker threads (0 = default)");
    cmd->callback([opts, dets, truth, spacing, out, threads]() {
        const json cfg = load_config(opts->config_path);
        merge(cfg, "dets", dets, opts->dets);
        merge(cfg, "truth", truth, opts->truth);
        merge(cfg, "spacing", spacing, opts->spacing);
        merge(cfg, "out", out, opts->out);
        merge(cfg, "threads", threads, opts->threads);
        run_eval(*opts, cfg);
    });
}

void register_render(CLI::App& app) {
    auto opts = std::make_shared<RenderOpts>();
    CLI::App* cmd = app.add_subcommand("render", "Draw detection overlays onto an image");
    cmd->add_option("--config", opts->config_path, "JSON config (or a previous manifest)");
    auto* image = cmd->add_option("--image", opts->image, "Input image");
    auto* dets = cmd->add_option("--dets", opts->dets, "Detections JSON");
    auto* truth = cmd->add_option("--truth", opts->truth, "Optional truth annotation JSON");
    auto* out = cmd->add_option("--out", opts->out, "Output PNG path");
    cmd->callback([opts, image, dets, truth, out]() {
        const json cfg = load_config(opts->config_path);
        merge(cfg, "image", image, opts->image);
        merge(cfg, "dets", dets, opts->dets);
        merge(cfg, "truth", truth, opts->truth);
        merge(cfg, "out", out, opts->out);
        run_render(*opts, cfg);
    });
}

} // namespace ladderdet::cli
