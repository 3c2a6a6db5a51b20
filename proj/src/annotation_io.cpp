#include "ladderdet/annotation.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "ladderdet/errors.hpp"

namespace ladderdet {

namespace {

using json = nlohmann::json;

json quad_to_json(const Quad& q) {
    json corners = json::array();
    for (const Point2& p : q.corners) corners.push_back({p.x, p.y});
    return corners;
}

Quad quad_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4)
        throw DataError("annotation quad must have 4 corners");
    Quad q;
    q.frame = Frame::image;
    for (int i = 0; i < 4; ++i) {
        const auto& c = j[static_cast<size_t>(i)];
        if (!c.is_array() || c.size() != 2) throw DataError("annotation corner must be [x,y]");
        q.corners[static_cast<size_t>(i)] = {c[0].get<double>(), c[1].get<double>()};
    }
    return q;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("bad JSON in " + path + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write: " + path);
    out << j.dump(2) << "\n";
}

} // namespace

void validate_annotation(const ChainAnnotation& ann) {
    if (ann.quads.size() != ann.labels.size())
        throw DataError("annotation: quads/labels length mismatch");
    double prev_y = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < ann.quads.size(); ++i) {
        validate_quad(ann.quads[i]);
        const double cy = centroid(ann.quads[i]).y;
        if (!(cy < prev_y))
            throw DataError("annotation: quads must be ordered bottom-to-top");
        prev_y = cy;
    }
}

void save_annotation(const ChainAnnotation& ann, const std::string& path) {
    json quads = json::array();
    for (const Quad& q : ann.quads) quads.push_back(quad_to_json(q));
    write_json_file(json{{"image", ann.image}, {"quads", quads}, {"labels", ann.labels}}, path);
}

ChainAnnotation load_annotation(const std::string& path) {
    const json j = read_json_file(path);
    ChainAnnotation ann;
    ann.image = j.value("image", "");
    for (const auto& q : j.at("quads")) ann.quads.push_back(quad_from_json(q));
    if (j.contains("labels")) {
        ann.labels = j.at("labels").get<std::vector<std::string>>();
    } else {
        for (size_t i = 0; i < ann.quads.size(); ++i)
            ann.labels.push_back("V" + std::to_string(i));
    }
    validate_annotation(ann);
    return ann;
}

void save_detections(const DetectionFile& det, const std::string& path) {
    json dets = json::array();
    for (const Quad& q : det.detections) dets.push_back(quad_to_json(q));
    write_json_file(json{{"seed", quad_to_json(det.seed)},
                         {"iterations", det.iterations},
                         {"detections", dets},
                         {"labels", det.labels}},
                    path);
}

DetectionFile load_detections(const std::string& path) {
    const json j = read_json_file(path);
    DetectionFile det;
    det.seed = quad_from_json(j.at("seed"));
    det.iterations = j.at("iterations").get<int>();
    for (const auto& q : j.at("detections")) det.detections.push_back(quad_from_json(q));
    if (j.contains("labels")) det.labels = j.at("labels").get<std::vector<std::string>>();
    return det;
}

} // namespace ladderdet
