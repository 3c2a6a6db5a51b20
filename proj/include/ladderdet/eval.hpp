#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ladderdet/geometry.hpp"

namespace ladderdet {

struct MatchedPair {
    int pred_idx = -1;
    int truth_idx = -1;
    double dice = 0.0;
    double le = 0.0; // centroid distance, px or mm depending on the report spacing
};

struct Matching {
    std::vector<MatchedPair> tp; // le still in pixels here
    std::vector<int> fp;         // prediction indices
    std::vector<int> fn;         // truth indices
    int n_pred = 0;
    int n_truth = 0;
};

/// Centroid-inside-truth matching: a prediction whose centroid lies inside
/// some truth quad is a TP assigned to that quad; otherwise it is a FP.
/// Truth quads with no assigned prediction are FN. When several
/// predictions land in one truth quad, the highest-Dice one stays a TP and
/// the rest become FP.
Matching match_detections(const std::vector<Quad>& predicted, const std::vector<Quad>& truth);

struct DetectionReport {
    int tp = 0, fp = 0, fn = 0;
    double recall = 0.0;    // tp / (tp + fn); NaN when undefined
    double precision = 0.0; // tp / (tp + fp); NaN when undefined
    double dice_mean = 0.0; // over TPs only; NaN when there are none
    double le_mean = 0.0;   // centroid localization error, population stats
    double le_std = 0.0;
    std::optional<double> pixel_spacing; // mm per px; unset = pixel units
    std::vector<MatchedPair> per_instance;
};

/// Dice and localization error over the matched pairs; LE is scaled by
/// pixel_spacing when given, else stays in pixels.
DetectionReport report(const Matching& matching, std::optional<double> pixel_spacing);

/// Pool per-instance records and counts across images, then recompute the
/// ratios and statistics (instance-level, not image-level averaging).
DetectionReport aggregate(const std::vector<DetectionReport>& reports);

std::string report_csv(const std::vector<std::pair<std::string, DetectionReport>>& rows);
void write_report_csv(const std::vector<std::pair<std::string, DetectionReport>>& rows,
                      const std::string& path);
void write_report_json(const std::vector<std::pair<std::string, DetectionReport>>& rows,
                       const std::string& path);

} // namespace ladderdet
