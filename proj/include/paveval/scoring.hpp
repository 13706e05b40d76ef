#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "paveval/dataset.hpp"
#include "paveval/submission.hpp"

namespace paveval {

struct MatchedPair {
    int gt_index;
    int det_index;
    double iou;

    bool operator==(const MatchedPair& o) const {
        return gt_index == o.gt_index && det_index == o.det_index && iou == o.iou;
    }
};

// One-to-one matching outcome for a single image. Indices refer to the input
// ground-truth and detection lists; all three lists are sorted ascending.
struct MatchResult {
    std::vector<MatchedPair> pairs;          // sorted by det_index
    std::vector<int> false_positive_dets;
    std::vector<int> false_negative_gts;

    bool operator==(const MatchResult& o) const {
        return pairs == o.pairs && false_positive_dets == o.false_positive_dets &&
               false_negative_gts == o.false_negative_gts;
    }
};

// Greedy one-to-one matching: detections in descending confidence order (ties
// keep input order) each claim the unmatched ground truth with the highest
// IoU, accepted only when IoU strictly exceeds the threshold. With
// require_same_label a detection only ever claims ground truth of its own
// class.
inline MatchResult match(const std::vector<Annotation>& gts,
                         const std::vector<Detection>& dets, double iou_threshold,
                         bool require_same_label = true) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw ValidationError("iou_threshold must be in (0,1), got " +
                              std::to_string(iou_threshold));
    }

    std::vector<int> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return dets[a].confidence > dets[b].confidence;
    });

    MatchResult result;
    std::vector<bool> gt_taken(gts.size(), false);
    for (int det_index : order) {
        const Detection& det = dets[det_index];
        int best_gt = -1;
        double best_iou = 0.0;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (gt_taken[g]) continue;
            if (require_same_label && gts[g].label != det.label) continue;
            const double v = iou(gts[g].bbox, det.bbox);
            if (v > best_iou) {
                best_iou = v;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0 && best_iou > iou_threshold) {
            gt_taken[best_gt] = true;
            result.pairs.push_back({best_gt, det_index, best_iou});
        } else {
            result.false_positive_dets.push_back(det_index);
        }
    }
    for (size_t g = 0; g < gts.size(); ++g) {
        if (!gt_taken[g]) result.false_negative_gts.push_back(static_cast<int>(g));
    }

    std::sort(result.pairs.begin(), result.pairs.end(),
              [](const MatchedPair& a, const MatchedPair& b) {
                  return a.det_index < b.det_index;
              });
    std::sort(result.false_positive_dets.begin(), result.false_positive_dets.end());
    return result;
}

inline double precision(long long tp, long long fp) {
    return (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

inline double recall(long long tp, long long fn) {
    return (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

inline double f1(double precision, double recall) {
    const double denom = precision + recall;
    return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

// 7 classes plus a trailing "none" bucket for unmatched boxes. Rows index the
// reference (ground-truth) label, columns the candidate (predicted) label.
inline constexpr int kConfusionSize = kNumClasses + 1;
inline constexpr int kNoneIndex = kNumClasses;

using ConfusionMatrix = std::array<std::array<long long, kConfusionSize>, kConfusionSize>;

struct ClassMetrics {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    std::array<ClassMetrics, kNumClasses> per_class{};
    double mean_f1 = 0.0;
    std::vector<DistressClass> classes_evaluated;
    ConfusionMatrix confusion{};

    nlohmann::json to_json() const;
    std::string to_table() const;
};

namespace detail {

// Label-agnostic matching feeds the confusion matrix so that label errors
// show up as off-diagonal mass instead of FP/FN pairs.
inline void accumulate_confusion(const std::vector<Annotation>& gts,
                                 const std::vector<Detection>& dets,
                                 double iou_threshold, ConfusionMatrix& matrix) {
    const MatchResult agnostic = match(gts, dets, iou_threshold, false);
    for (const auto& p : agnostic.pairs) {
        ++matrix[static_cast<int>(gts[p.gt_index].label)]
                [static_cast<int>(dets[p.det_index].label)];
    }
    for (int g : agnostic.false_negative_gts) {
        ++matrix[static_cast<int>(gts[g].label)][kNoneIndex];
    }
    for (int d : agnostic.false_positive_dets) {
        ++matrix[kNoneIndex][static_cast<int>(dets[d].label)];
    }
}

}  // namespace detail

// Scores predictions against ground truth: per-image greedy matching, then
// per-class precision/recall/F1 accumulated over all images. The competition
// metric is the mean F1 over classes that appear in the ground truth or in
// the predictions.
inline EvalReport evaluate(const Dataset& gt, const DetectionMap& predictions,
                           double iou_threshold = 0.5) {
    std::string unknown;
    for (const auto& [image_id, dets] : predictions) {
        if (!gt.contains(image_id)) {
            unknown += unknown.empty() ? image_id : ", " + image_id;
        }
    }
    if (!unknown.empty()) {
        throw ValidationError("prediction image_ids not in ground truth: " + unknown);
    }

    static const std::vector<Detection> kNoDetections;
    EvalReport report;
    for (const auto& record : gt.records()) {
        auto it = predictions.find(record.image_id);
        const std::vector<Detection>& dets =
            (it == predictions.end()) ? kNoDetections : it->second;

        const MatchResult m = match(record.annotations, dets, iou_threshold, true);
        for (const auto& p : m.pairs) {
            ++report.per_class[static_cast<int>(record.annotations[p.gt_index].label)].tp;
        }
        for (int d : m.false_positive_dets) {
            ++report.per_class[static_cast<int>(dets[d].label)].fp;
        }
        for (int g : m.false_negative_gts) {
            ++report.per_class[static_cast<int>(record.annotations[g].label)].fn;
        }
        detail::accumulate_confusion(record.annotations, dets, iou_threshold,
                                     report.confusion);
    }

    double f1_sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        ClassMetrics& cm = report.per_class[c];
        cm.precision = precision(cm.tp, cm.fp);
        cm.recall = recall(cm.tp, cm.fn);
        cm.f1 = f1(cm.precision, cm.recall);
        if (cm.tp + cm.fn > 0 || cm.fp > 0) {
            report.classes_evaluated.push_back(static_cast<DistressClass>(c));
            f1_sum += cm.f1;
        }
    }
    report.mean_f1 = report.classes_evaluated.empty()
                         ? 0.0
                         : f1_sum / static_cast<double>(report.classes_evaluated.size());
    return report;
}

struct AnnotationConfusion {
    ConfusionMatrix matrix{};
    double accuracy_percent = 0.0;  // diagonal mass / reference box count

    nlohmann::json to_json() const;
    std::string to_table() const;
};

// Compares two annotation sets over the same images: label-agnostic greedy
// IoU matching with candidate boxes taken in input order, then cell
// (reference label, candidate label) counts each matched pair.
inline AnnotationConfusion annotation_confusion(const Dataset& reference,
                                                const Dataset& candidate,
                                                double iou_threshold = 0.5) {
    for (const auto& r : reference.records()) {
        if (!candidate.contains(r.image_id)) {
            throw ValidationError("image_id '" + r.image_id + "' missing from candidate");
        }
    }
    for (const auto& r : candidate.records()) {
        if (!reference.contains(r.image_id)) {
            throw ValidationError("image_id '" + r.image_id + "' missing from reference");
        }
    }

    AnnotationConfusion out;
    for (const auto& record : reference.records()) {
        std::vector<Detection> cand;
        for (const auto& a : candidate.at(record.image_id).annotations) {
            cand.emplace_back(a.bbox, a.label, 1.0);
        }
        detail::accumulate_confusion(record.annotations, cand, iou_threshold, out.matrix);
    }

    long long diagonal = 0;
    for (int c = 0; c < kNumClasses; ++c) diagonal += out.matrix[c][c];
    const size_t reference_total = reference.annotation_count();
    out.accuracy_percent = reference_total == 0
                               ? 0.0
                               : 100.0 * static_cast<double>(diagonal) /
                                     static_cast<double>(reference_total);
    return out;
}

namespace detail {

inline nlohmann::json confusion_to_json(const ConfusionMatrix& m) {
    nlohmann::json labels = nlohmann::json::array();
    for (auto name : kClassNames) labels.push_back(std::string(name));
    labels.push_back("none");
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < kConfusionSize; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < kConfusionSize; ++j) row.push_back(m[i][j]);
        rows.push_back(std::move(row));
    }
    return nlohmann::json{{"labels", labels}, {"rows", rows}};
}

inline std::string confusion_to_table(const ConfusionMatrix& m) {
    auto short_name = [](int i) {
        return i == kNoneIndex ? std::string("none")
                               : std::string(kClassNames[i]).substr(0, 6);
    };
    char buf[64];
    std::string out = "ref \\ cand   ";
    for (int j = 0; j < kConfusionSize; ++j) {
        std::snprintf(buf, sizeof(buf), "%8s", short_name(j).c_str());
        out += buf;
    }
    out += '\n';
    for (int i = 0; i < kConfusionSize; ++i) {
        std::snprintf(buf, sizeof(buf), "%-13s", short_name(i).c_str());
        out += buf;
        for (int j = 0; j < kConfusionSize; ++j) {
            std::snprintf(buf, sizeof(buf), "%8lld", m[i][j]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace detail

inline nlohmann::json EvalReport::to_json() const {
    nlohmann::json classes = nlohmann::json::array();
    for (int c = 0; c < kNumClasses; ++c) {
        const ClassMetrics& cm = per_class[c];
        classes.push_back({
            {"name", std::string(kClassNames[c])},
            {"tp", cm.tp},
            {"fp", cm.fp},
            {"fn", cm.fn},
            {"precision", cm.precision},
            {"recall", cm.recall},
            {"f1", cm.f1},
        });
    }
    nlohmann::json evaluated = nlohmann::json::array();
    for (DistressClass c : classes_evaluated) {
        evaluated.push_back(std::string(class_name(c)));
    }
    return nlohmann::json{
        {"classes", classes},
        {"classes_evaluated", evaluated},
        {"mean_f1", mean_f1},
        {"confusion", detail::confusion_to_json(confusion)},
    };
}

inline std::string EvalReport::to_table() const {
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof(buf), "%-13s %6s %6s %6s %10s %10s %10s\n", "class", "tp",
                  "fp", "fn", "precision", "recall", "f1");
    out += buf;
    for (int c = 0; c < kNumClasses; ++c) {
        const ClassMetrics& cm = per_class[c];
        const bool evaluated =
            std::find(classes_evaluated.begin(), classes_evaluated.end(),
                      static_cast<DistressClass>(c)) != classes_evaluated.end();
        if (evaluated) {
            std::snprintf(buf, sizeof(buf), "%-13s %6lld %6lld %6lld %10.6f %10.6f %10.6f\n",
                          std::string(kClassNames[c]).c_str(), cm.tp, cm.fp, cm.fn,
                          cm.precision, cm.recall, cm.f1);
        } else {
            std::snprintf(buf, sizeof(buf), "%-13s %6lld %6lld %6lld %10s %10s %10s\n",
                          std::string(kClassNames[c]).c_str(), cm.tp, cm.fp, cm.fn, "-",
                          "-", "-");
        }
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%-13s %6s %6s %6s %10s %10s %10.6f\n", "mean F1", "",
                  "", "", "", "", mean_f1);
    out += buf;
    return out;
}

inline nlohmann::json AnnotationConfusion::to_json() const {
    nlohmann::json j = detail::confusion_to_json(matrix);
    j["accuracy_percent"] = accuracy_percent;
    return j;
}

inline std::string AnnotationConfusion::to_table() const {
    char buf[64];
    std::string out = detail::confusion_to_table(matrix);
    std::snprintf(buf, sizeof(buf), "accuracy: %.2f%%\n", accuracy_percent);
    out += buf;
    return out;
}

}  // namespace paveval
