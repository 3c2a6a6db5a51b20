#include "ladderdet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ladderdet/errors.hpp"

namespace ladderdet {

Matching match_detections(const std::vector<Quad>& predicted, const std::vector<Quad>& truth) {
    Matching m;
    m.n_pred = static_cast<int>(predicted.size());
    m.n_truth = static_cast<int>(truth.size());

    // Candidate truth quad per prediction: the containing quad, best Dice
    // breaking the (rare) tie when several truth quads contain the centroid.
    std::map<int, std::vector<MatchedPair>> by_truth;
    for (int p = 0; p < m.n_pred; ++p) {
        const Point2 c = centroid(predicted[static_cast<size_t>(p)]);
        int best_truth = -1;
        double best_dice = -1.0;
        for (int t = 0; t < m.n_truth; ++t) {
            if (!point_in_quad(c, truth[static_cast<size_t>(t)])) continue;
            const double d = quad_dice(predicted[static_cast<size_t>(p)], truth[static_cast<size_t>(t)]);
            if (d > best_dice) {
                best_dice = d;
                best_truth = t;
            }
        }
        if (best_truth < 0) {
            m.fp.push_back(p);
        } else {
            MatchedPair pair;
            pair.pred_idx = p;
            pair.truth_idx = best_truth;
            pair.dice = best_dice;
            pair.le = distance(c, centroid(truth[static_cast<size_t>(best_truth)]));
            by_truth[best_truth].push_back(pair);
        }
    }

    for (auto& [t, pairs] : by_truth) {
        auto best = std::max_element(pairs.begin(), pairs.end(),
                                     [](const MatchedPair& a, const MatchedPair& b) {
                                         return a.dice < b.dice;
                                     });
        for (const auto& pair : pairs)
            if (&pair != &*best) m.fp.push_back(pair.pred_idx);
        m.tp.push_back(*best);
    }
    std::sort(m.fp.begin(), m.fp.end());

    for (int t = 0; t < m.n_truth; ++t)
        if (!by_truth.count(t)) m.fn.push_back(t);
    return m;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

DetectionReport stats_from_pairs(int tp, int fp, int fn, std::vector<MatchedPair> pairs,
                                 std::optional<double> spacing) {
    DetectionReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.pixel_spacing = spacing;
    r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : kNaN;
    r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : kNaN;
    if (pairs.empty()) {
        r.dice_mean = kNaN;
        r.le_mean = kNaN;
        r.le_std = kNaN;
        return r;
    }
    double dsum = 0.0, lsum = 0.0;
    for (const auto& p : pairs) {
        dsum += p.dice;
        lsum += p.le;
    }
    r.dice_mean = dsum / static_cast<double>(pairs.size());
    r.le_mean = lsum / static_cast<double>(pairs.size());
    double ss = 0.0;
    for (const auto& p : pairs) ss += (p.le - r.le_mean) * (p.le - r.le_mean);
    r.le_std = std::sqrt(ss / static_cast<double>(pairs.size())); // population std
    r.per_instance = std::move(pairs);
    return r;
}

} // namespace

DetectionReport report(const Matching& matching, std::optional<double> pixel_spacing) {
    std::vector<MatchedPair> pairs = matching.tp;
    const double scale = pixel_spacing.value_or(1.0);
    for (auto& p : pairs) p.le *= scale;
    return stats_from_pairs(static_cast<int>(matching.tp.size()),
                            static_cast<int>(matching.fp.size()),
                            static_cast<int>(matching.fn.size()), std::move(pairs),
                            pixel_spacing);
}

DetectionReport aggregate(const std::vector<DetectionReport>& reports) {
    int tp = 0, fp = 0, fn = 0;
    std::vector<MatchedPair> pooled;
    std::optional<double> spacing;
    for (const auto& r : reports) {
        tp += r.tp;
        fp += r.fp;
        fn += r.fn;
        pooled.insert(pooled.end(), r.per_instance.begin(), r.per_instance.end());
        if (r.pixel_spacing) spacing = r.pixel_spacing;
    }
    return stats_from_pairs(tp, fp, fn, std::move(pooled), spacing);
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

std::string report_csv(const std::vector<std::pair<std::string, DetectionReport>>& rows) {
    std::ostringstream os;
    os << "subset,tp,fp,fn,recall,precision,dice,le_mean,le_std,le_units\n";
    for (const auto& [name, r] : rows) {
        os << name << "," << r.tp << "," << r.fp << "," << r.fn << "," << fmt(r.recall) << ","
           << fmt(r.precision) << "," << fmt(r.dice_mean) << "," << fmt(r.le_mean) << ","
           << fmt(r.le_std) << "," << (r.pixel_spacing ? "mm" : "px") << "\n";
    }
    return os.str();
}

void write_report_csv(const std::vector<std::pair<std::string, DetectionReport>>& rows,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    out << report_csv(rows);
}

void write_report_json(const std::vector<std::pair<std::string, DetectionReport>>& rows,
                       const std::string& path) {
    using json = nlohmann::json;
    auto num_or_null = [](double v) {
        return std::isnan(v) ? json(nullptr) : json(v);
    };
    json out = json::array();
    for (const auto& [name, r] : rows) {
        json pairs = json::array();
        for (const auto& p : r.per_instance)
            pairs.push_back({{"pred", p.pred_idx},
                             {"truth", p.truth_idx},
                             {"dice", p.dice},
                             {"le", p.le}});
        out.push_back({{"subset", name},
                       {"tp", r.tp},
                       {"fp", r.fp},
                       {"fn", r.fn},
                       {"recall", num_or_null(r.recall)},
                       {"precision", num_or_null(r.precision)},
                       {"dice", num_or_null(r.dice_mean)},
                       {"le_mean", num_or_null(r.le_mean)},
                       {"le_std", num_or_null(r.le_std)},
                       {"le_units", r.pixel_spacing ? "mm" : "px"},
                       {"per_instance", pairs}});
    }
    std::ofstream f(path);
    if (!f) throw DataError("cannot write report: " + path);
    f << out.dump(2) << "\n";
}

} // namespace ladderdet
