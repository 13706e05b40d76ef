#pragma once

#include <cstdio>
#include <string>

#include "paveval/postprocess.hpp"
#include "paveval/scoring.hpp"

namespace paveval {

// Turns detector output on unlabeled images into draft annotations:
// per-image NMS at the default IoU first, then the confidence cut;
// confidences are dropped. Records get envelope dimensions.
inline Dataset draft_labels(const DetectionMap& predictions, double conf_threshold) {
    if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
        throw ValidationError("conf_threshold must be in [0,1], got " +
                              std::to_string(conf_threshold));
    }
    AnnotationMap drafted;
    for (const auto& [image_id, dets] : predictions) {
        auto& anns = drafted[image_id];  // images with no surviving boxes stay present
        for (const auto& d : confidence_filter(nms(dets, kDefaultNmsIou), conf_threshold)) {
            anns.emplace_back(d.bbox, d.label);
        }
    }
    return to_dataset(drafted);
}

// How a human pass changed a drafted annotation set. The five buckets
// partition the union of draft and corrected boxes.
struct CorrectionStats {
    long long kept = 0;       // same label, IoU > keep_iou
    long long relabeled = 0;  // matched but label changed
    long long resized = 0;    // same label, threshold < IoU <= keep_iou
    long long added = 0;      // unmatched in corrected
    long long deleted = 0;    // unmatched in draft
    long long draft_total = 0;
    long long corrected_total = 0;

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"kept", kept},           {"relabeled", relabeled},
            {"resized", resized},     {"added", added},
            {"deleted", deleted},     {"draft_total", draft_total},
            {"corrected_total", corrected_total},
        };
    }

    std::string to_table() const {
        char buf[256];
        std::string out;
        std::snprintf(buf, sizeof(buf), "%-10s %8lld\n", "kept", kept);
        out += buf;
        std::snprintf(buf, sizeof(buf), "%-10s %8lld\n", "relabeled", relabeled);
        out += buf;
        std::snprintf(buf, sizeof(buf), "%-10s %8lld\n", "resized", resized);
        out += buf;
        std::snprintf(buf, sizeof(buf), "%-10s %8lld\n", "added", added);
        out += buf;
        std::snprintf(buf, sizeof(buf), "%-10s %8lld\n", "deleted", deleted);
        out += buf;
        std::snprintf(buf, sizeof(buf), "draft boxes %lld, corrected boxes %lld\n",
                      draft_total, corrected_total);
        out += buf;
        return out;
    }
};

// Quantifies the human corrections between a drafted annotation set and its
// corrected version via per-image label-agnostic greedy matching. The
// keep_iou boundary between "kept" and "resized" is a convention knob.
inline CorrectionStats diff_annotations(const Dataset& draft, const Dataset& corrected,
                                        double iou_threshold = 0.5,
                                        double keep_iou = 0.9) {
    for (const auto& r : draft.records()) {
        if (!corrected.contains(r.image_id)) {
            throw ValidationError("image_id '" + r.image_id + "' missing from corrected");
        }
    }
    for (const auto& r : corrected.records()) {
        if (!draft.contains(r.image_id)) {
            throw ValidationError("image_id '" + r.image_id + "' missing from draft");
        }
    }

    CorrectionStats stats;
    for (const auto& record : draft.records()) {
        const auto& draft_anns = record.annotations;
        const auto& corr_anns = corrected.at(record.image_id).annotations;
        stats.draft_total += static_cast<long long>(draft_anns.size());
        stats.corrected_total += static_cast<long long>(corr_anns.size());

        std::vector<Detection> cand;
        for (const auto& a : corr_anns) cand.emplace_back(a.bbox, a.label, 1.0);
        const MatchResult m = match(draft_anns, cand, iou_threshold, false);

        for (const auto& p : m.pairs) {
            const bool same_label = draft_anns[p.gt_index].label == corr_anns[p.det_index].label;
            if (!same_label) {
                ++stats.relabeled;
            } else if (p.iou > keep_iou) {
                ++stats.kept;
            } else {
                ++stats.resized;
            }
        }
        stats.added += static_cast<long long>(m.false_positive_dets.size());
        stats.deleted += static_cast<long long>(m.false_negative_gts.size());
    }
    return stats;
}

}  // namespace paveval
