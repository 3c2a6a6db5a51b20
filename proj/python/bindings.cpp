#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "ladderdet/annotation.hpp"
#include "ladderdet/checkpoint.hpp"
#include "ladderdet/eval.hpp"
#include "ladderdet/gradcheck.hpp"
#include "ladderdet/image_io.hpp"
#include "ladderdet/ladder.hpp"
#include "ladderdet/render.hpp"
#include "ladderdet/synth.hpp"
#include "ladderdet/training.hpp"

namespace py = pybind11;
using namespace ladderdet;

namespace {

GrayImage image_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array (h, w)");
    GrayImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
}

py::array_t<double> image_to_numpy(const GrayImage& img) {
    py::array_t<double> out({img.height, img.width});
    std::copy(img.data.begin(), img.data.end(), out.mutable_data());
    return out;
}

Quad quad_from_pylist(const std::vector<std::pair<double, double>>& corners, Frame frame) {
    if (corners.size() != 4) throw std::invalid_argument("quad needs 4 corners");
    Quad q;
    q.frame = frame;
    for (int i = 0; i < 4; ++i) q.corners[i] = {corners[i].first, corners[i].second};
    return q;
}

py::dict report_to_dict(const DetectionReport& r) {
    py::dict d;
    d["tp"] = r.tp;
    d["fp"] = r.fp;
    d["fn"] = r.fn;
    d["recall"] = r.recall;
    d["precision"] = r.precision;
    d["dice"] = r.dice_mean;
    d["le_mean"] = r.le_mean;
    d["le_std"] = r.le_std;
    py::list pairs;
    for (const auto& p : r.per_instance) {
        py::dict e;
        e["pred"] = p.pred_idx;
        e["truth"] = p.truth_idx;
        e["dice"] = p.dice;
        e["le"] = p.le;
        pairs.append(e);
    }
    d["per_instance"] = pairs;
    return d;
}

/// Opaque predictor handle for run_ladder.
struct PyPredictor {
    Predictor fn;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Iterative chain detection: geometry, patch pipeline, CNN training and the "
              "ladder inference loop";
#ifdef LADDERDET_VERSION
    m.attr("__version__") = LADDERDET_VERSION;
#else
    m.attr("__version__") = "dev";
#endif

    // ---------------------------------------------------------- geometry
    py::enum_<Frame>(m, "Frame")
        .value("image", Frame::image)
        .value("patch", Frame::patch);

    py::class_<Point2>(m, "Point2")
        .def(py::init<>())
        .def(py::init([](double x, double y) { return Point2{x, y}; }), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Point2::x)
        .def_readwrite("y", &Point2::y)
        .def("__repr__", [](const Point2& p) {
            std::ostringstream os;
            os << "Point2(" << p.x << ", " << p.y << ")";
            return os.str();
        });

    py::class_<Quad>(m, "Quad")
        .def(py::init<>())
        .def(py::init(&quad_from_pylist), py::arg("corners"), py::arg("frame") = Frame::image)
        .def_readwrite("frame", &Quad::frame)
        .def_property_readonly("corners",
                               [](const Quad& q) {
                                   std::vector<std::pair<double, double>> out;
                                   for (const Point2& p : q.corners) out.emplace_back(p.x, p.y);
                                   return out;
                               })
        .def("__repr__", [](const Quad& q) {
            std::ostringstream os;
            os << "Quad([";
            for (int i = 0; i < 4; ++i)
                os << (i ? ", " : "") << "(" << q.corners[i].x << ", " << q.corners[i].y << ")";
            os << "])";
            return os.str();
        });

    py::class_<Rect>(m, "Rect")
        .def(py::init<>())
        .def(py::init([](double x0, double y0, double x1, double y1) {
                 return Rect{x0, y0, x1, y1};
             }),
             py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"))
        .def_readwrite("x0", &Rect::x0)
        .def_readwrite("y0", &Rect::y0)
        .def_readwrite("x1", &Rect::x1)
        .def_readwrite("y1", &Rect::y1)
        .def_property_readonly("width", &Rect::width)
        .def_property_readonly("height", &Rect::height);

    py::class_<PatchTransform>(m, "PatchTransform")
        .def_readonly("crop", &PatchTransform::crop)
        .def_readonly("out_size", &PatchTransform::out_size)
        .def_readonly("scale_x", &PatchTransform::scale_x)
        .def_readonly("scale_y", &PatchTransform::scale_y);

    m.def("tight_rect", &tight_rect);
    m.def("expand_rect", &expand_rect, py::arg("rect"), py::arg("fraction"));
    m.def("make_transform", &make_transform, py::arg("crop"), py::arg("out_size") = 224.0);
    m.def("to_patch", py::overload_cast<const PatchTransform&, Point2>(&to_patch));
    m.def("to_image", py::overload_cast<const PatchTransform&, Point2>(&to_image));
    m.def("to_patch", py::overload_cast<const PatchTransform&, const Quad&>(&to_patch));
    m.def("to_image", py::overload_cast<const PatchTransform&, const Quad&>(&to_image));
    m.def("centroid", &centroid);
    m.def("point_in_quad", &point_in_quad);
    m.def("quad_dice", &quad_dice);

    // ----------------------------------------------------------- imaging
    py::class_<GrayImage>(m, "GrayImage", py::buffer_protocol())
        .def(py::init(&image_from_numpy), py::arg("array"))
        .def_readonly("width", &GrayImage::width)
        .def_readonly("height", &GrayImage::height)
        .def("numpy", &image_to_numpy)
        .def_buffer([](GrayImage& img) {
            return py::buffer_info(img.data.data(), sizeof(double),
                                   py::format_descriptor<double>::format(), 2,
                                   {img.height, img.width},
                                   {sizeof(double) * static_cast<size_t>(img.width),
                                    sizeof(double)});
        });

    m.def("crop_pad", &crop_pad);
    m.def("resize_bicubic", &resize_bicubic, py::arg("image"), py::arg("out_w"), py::arg("out_h"));
    m.def("gaussian_blur", &gaussian_blur, py::arg("image"), py::arg("sigma"));
    m.def("flip_horizontal", &flip_horizontal);
    m.def("normalize_minmax", &normalize_minmax);
    m.def("load_image", &load_image);
    m.def("save_png16", &save_png16);
    m.def("save_png8", &save_png8);

    // ------------------------------------------------------------- synth
    py::class_<ChainSpec>(m, "ChainSpec")
        .def(py::init<>())
        .def_readwrite("count", &ChainSpec::count)
        .def_readwrite("width", &ChainSpec::width)
        .def_readwrite("height", &ChainSpec::height)
        .def_readwrite("base_size", &ChainSpec::base_size)
        .def_readwrite("aspect", &ChainSpec::aspect)
        .def_readwrite("shrink", &ChainSpec::shrink)
        .def_readwrite("gap", &ChainSpec::gap)
        .def_readwrite("curve_amplitude", &ChainSpec::curve_amplitude)
        .def_readwrite("curve_period", &ChainSpec::curve_period)
        .def_readwrite("rotation_jitter", &ChainSpec::rotation_jitter)
        .def_readwrite("intensity_mean", &ChainSpec::intensity_mean)
        .def_readwrite("intensity_std", &ChainSpec::intensity_std)
        .def_readwrite("noise_std", &ChainSpec::noise_std)
        .def_readwrite("seed", &ChainSpec::seed);

    py::class_<ChainAnnotation>(m, "ChainAnnotation")
        .def(py::init<>())
        .def_readwrite("image", &ChainAnnotation::image)
        .def_readwrite("quads", &ChainAnnotation::quads)
        .def_readwrite("labels", &ChainAnnotation::labels)
        .def_property_readonly("count", &ChainAnnotation::count);

    py::class_<ChainSpecRanges>(m, "ChainSpecRanges")
        .def_static("lumbar_like", &ChainSpecRanges::lumbar_like)
        .def_static("wholespine_like", &ChainSpecRanges::wholespine_like)
        .def_static("by_name", &ChainSpecRanges::by_name);

    m.def("generate_chain", [](const ChainSpec& spec) {
        auto [img, ann] = generate_chain(spec);
        return py::make_tuple(std::move(img), std::move(ann));
    });
    m.def("sample_spec", &sample_spec, py::arg("ranges"), py::arg("seed"));
    m.def("load_annotation", &load_annotation);
    m.def("save_annotation", &save_annotation);

    // ------------------------------------------------------------ neural
    py::class_<NetConfig>(m, "NetConfig")
        .def_static("desk", &NetConfig::desk_preset)
        .def_static("paper", &NetConfig::paper_preset)
        .def_static("by_name", &NetConfig::by_name)
        .def_readonly("input_size", &NetConfig::input_size);

    py::class_<PyPredictor>(m, "Predictor")
        .def("__call__", [](const PyPredictor& p, const GrayImage& patch, const PatchTransform& t) {
            const auto raw = p.fn(patch, t);
            return std::vector<double>(raw.begin(), raw.end());
        });

    m.def("load_predictor", [](const std::string& checkpoint_path) {
        Checkpoint ck = load_checkpoint(checkpoint_path);
        auto params = std::make_shared<NetParams<float>>(std::move(ck.params));
        PyPredictor p;
        p.fn = make_net_predictor(ck.config, std::move(params));
        return py::make_tuple(p, ck.config.input_size);
    });
    m.def("oracle_predictor", [](const ChainAnnotation& ann) {
        PyPredictor p;
        p.fn = make_oracle_predictor(ann);
        return p;
    });

    // ---------------------------------------------------------- training
    py::class_<TrainExample>(m, "TrainExample")
        .def_readonly("patch", &TrainExample::patch)
        .def_property_readonly("target", [](const TrainExample& e) {
            return std::vector<double>(e.target.begin(), e.target.end());
        });

    py::class_<AugmentConfig>(m, "AugmentConfig")
        .def(py::init<>())
        .def_readwrite("translate_px", &AugmentConfig::translate_px)
        .def_readwrite("expand_lo", &AugmentConfig::expand_lo)
        .def_readwrite("expand_hi", &AugmentConfig::expand_hi)
        .def_readwrite("flip_prob", &AugmentConfig::flip_prob)
        .def_readwrite("blur_sigma_lo", &AugmentConfig::blur_sigma_lo)
        .def_readwrite("blur_sigma_hi", &AugmentConfig::blur_sigma_hi)
        .def_readwrite("seed", &AugmentConfig::seed);

    m.def(
        "make_example",
        [](const GrayImage& img, const ChainAnnotation& ann, int index, const AugmentConfig* aug,
           std::uint64_t rng_seed, int input_size) {
            return make_example(img, ann, index, aug, rng_seed, input_size);
        },
        py::arg("image"), py::arg("annotation"), py::arg("index"), py::arg("augment") = nullptr,
        py::arg("rng_seed") = 0, py::arg("input_size") = 56);

    m.def(
        "train_on_images",
        [](const NetConfig& cfg, const std::vector<std::pair<GrayImage, ChainAnnotation>>& train_imgs,
           const std::vector<std::pair<GrayImage, ChainAnnotation>>& val_imgs, int batch_size,
           int max_epochs, int patience, double lr, bool augment, std::uint64_t seed,
           const std::string& checkpoint_out) {
            DataSubset tr, va;
            for (const auto& [img, ann] : train_imgs) tr.images.push_back({img, ann, ""});
            for (const auto& [img, ann] : val_imgs) va.images.push_back({img, ann, ""});
            tr.index_examples();
            va.index_examples();
            TrainOptions opts;
            opts.batch_size = batch_size;
            opts.max_epochs = max_epochs;
            opts.patience = patience;
            opts.adam.lr = lr;
            opts.augment = augment;
            opts.seed = seed;
            TrainResult res = train(cfg, init_params<float>(cfg, seed), tr, va, opts);
            if (!checkpoint_out.empty()) save_checkpoint(checkpoint_out, cfg, res.params);
            py::list history;
            for (const auto& e : res.history)
                history.append(py::make_tuple(e.epoch, e.train_loss, e.val_loss));
            return py::make_tuple(res.best_val_loss, res.best_epoch, history);
        },
        py::arg("config"), py::arg("train_images"), py::arg("val_images"),
        py::arg("batch_size") = 32, py::arg("max_epochs") = 10, py::arg("patience") = 5,
        py::arg("lr") = 1e-3, py::arg("augment") = true, py::arg("seed") = 0,
        py::arg("checkpoint_out") = "");

    // ------------------------------------------------------------ ladder
    py::class_<LadderConfig>(m, "LadderConfig")
        .def(py::init<>())
        .def_readwrite("iterations", &LadderConfig::iterations)
        .def_readwrite("expansion", &LadderConfig::expansion)
        .def_readwrite("patch_size", &LadderConfig::patch_size);

    py::class_<LadderState>(m, "LadderState")
        .def_readonly("detections", &LadderState::detections)
        .def_readonly("iteration", &LadderState::iteration);

    m.def(
        "run_ladder",
        [](const GrayImage& img, const Quad& seed, const PyPredictor& predictor,
           const LadderConfig& cfg) { return run_ladder(img, seed, predictor.fn, cfg); },
        py::arg("image"), py::arg("seed"), py::arg("predictor"), py::arg("config"));

    // -------------------------------------------------------- evaluation
    m.def("match_and_report",
          [](const std::vector<Quad>& predicted, const std::vector<Quad>& truth,
             std::optional<double> spacing) {
              return report_to_dict(report(match_detections(predicted, truth), spacing));
          },
          py::arg("predicted"), py::arg("truth"), py::arg("spacing") = std::nullopt);

    // ------------------------------------------------------------ render
    m.def("render_overlay",
          [](const GrayImage& img, const std::vector<Quad>& detections,
             const std::vector<Quad>& truth, const std::string& out_path) {
              save_png_rgb(render_overlay(img, detections, truth), out_path);
          },
          py::arg("image"), py::arg("detections"), py::arg("truth") = std::vector<Quad>{},
          py::arg("out_path"));
}
