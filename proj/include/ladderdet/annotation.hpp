#pragma once

#include <string>
#include <vector>

#include "ladderdet/geometry.hpp"

namespace ladderdet {

/// Ordered ground-truth quads for one image; index 0 is the bottom (seed)
/// instance and centroid y decreases strictly with the index.
struct ChainAnnotation {
    std::string image; // associated raster filename, may be empty in memory
    std::vector<Quad> quads;
    std::vector<std::string> labels; // ordinal names "V0", "V1", ...

    int count() const { return static_cast<int>(quads.size()); }
};

void validate_annotation(const ChainAnnotation& ann);

/// One JSON document per image:
/// {"image": name, "quads": [[[x,y] x4], ...], "labels": [...]}
/// with corners in TL,TR,BR,BL order, continuous image-frame pixels.
void save_annotation(const ChainAnnotation& ann, const std::string& path);
ChainAnnotation load_annotation(const std::string& path);

/// Ladder output for one image: the seed quad, the iteration count and
/// the saved detections with ordinal labels.
struct DetectionFile {
    Quad seed;
    int iterations = 0;
    std::vector<Quad> detections;
    std::vector<std::string> labels;
};

void save_detections(const DetectionFile& det, const std::string& path);
DetectionFile load_detections(const std::string& path);

} // namespace ladderdet
