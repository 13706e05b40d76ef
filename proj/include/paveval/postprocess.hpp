#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "paveval/augment.hpp"
#include "paveval/dataset.hpp"
#include "paveval/submission.hpp"
#include "paveval/transform.hpp"

namespace paveval {

// Keeps detections with confidence >= conf_threshold, order preserved.
inline std::vector<Detection> confidence_filter(const std::vector<Detection>& dets,
                                                double conf_threshold) {
    if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
        throw ValidationError("conf_threshold must be in [0,1], got " +
                              std::to_string(conf_threshold));
    }
    std::vector<Detection> out;
    for (const auto& d : dets) {
        if (d.confidence >= conf_threshold) out.push_back(d);
    }
    return out;
}

// Per-class greedy suppression: walk each class in descending confidence
// (ties keep input order) and keep a detection iff its IoU with every
// already-kept detection of that class is strictly below the threshold.
// Output preserves input order.
inline std::vector<Detection> nms(const std::vector<Detection>& dets,
                                  double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw ValidationError("nms iou_threshold must be in (0,1), got " +
                              std::to_string(iou_threshold));
    }
    std::vector<int> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return dets[a].confidence > dets[b].confidence;
    });

    std::vector<bool> keep(dets.size(), false);
    std::vector<int> kept;
    for (int idx : order) {
        bool suppressed = false;
        for (int k : kept) {
            if (dets[k].label != dets[idx].label) continue;
            if (iou(dets[k].bbox, dets[idx].bbox) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) {
            keep[idx] = true;
            kept.push_back(idx);
        }
    }

    std::vector<Detection> out;
    for (size_t i = 0; i < dets.size(); ++i) {
        if (keep[i]) out.push_back(dets[i]);
    }
    return out;
}

// Maps detections from a transformed frame back to the source frame.
// Detections clipped away by the inverse map are dropped; labels and
// confidences pass through. Throws on a non-invertible record (mosaic).
inline std::vector<Detection> inverse_map(const std::vector<Detection>& dets,
                                          const TransformRecord& rec) {
    std::vector<Detection> out;
    for (const auto& d : dets) {
        const auto mapped = map_box_inverse(rec, d.bbox);
        if (mapped) out.emplace_back(*mapped, d.label, d.confidence);
    }
    return out;
}

inline std::vector<Detection> inverse_map(const std::vector<Detection>& dets,
                                          const TransformChain& chain) {
    std::vector<Detection> out;
    for (const auto& d : dets) {
        const auto mapped = map_box_inverse(chain, d.bbox);
        if (mapped) out.emplace_back(*mapped, d.label, d.confidence);
    }
    return out;
}

// One test-time copy of a source image: the transform chain that produced it
// (empty for the identity copy) and the detector output in that frame.
struct TtaCopy {
    TransformChain chain;
    std::vector<Detection> detections;
};

using TtaBundle = std::vector<TtaCopy>;

// Back-projects every copy's detections to the source frame, concatenates in
// bundle order, then confidence-filters and per-class NMS-fuses.
inline std::vector<Detection> tta_fuse(const TtaBundle& bundle, double conf_threshold,
                                       double nms_iou) {
    std::vector<Detection> pooled;
    for (const auto& copy : bundle) {
        const auto mapped = inverse_map(copy.detections, copy.chain);
        pooled.insert(pooled.end(), mapped.begin(), mapped.end());
    }
    return nms(confidence_filter(pooled, conf_threshold), nms_iou);
}

// The 10-copy test-time recipe: identity, the three flip combinations, the
// three inverted flips, and three independently seeded bbox-safe crops.
// Kinds are listed in application order.
inline std::vector<std::vector<TransformKind>> standard_tta_set() {
    using K = TransformKind;
    return {
        {},
        {K::HFLIP},
        {K::VFLIP},
        {K::VFLIP, K::HFLIP},
        {K::INVERT},
        {K::HFLIP, K::INVERT},
        {K::VFLIP, K::INVERT},
        {K::SAFE_CROP},
        {K::SAFE_CROP},
        {K::SAFE_CROP},
    };
}

// A materialized test-time copy: the transformed image and its chain.
struct TtaEmission {
    ImageRecord image;
    TransformChain chain;
};

// Materializes the standard 10-copy set for one image. Copy k gets image_id
// "<source>__tta<k>"; crop randomness comes from the caller's stream.
inline std::vector<TtaEmission> emit_tta_copies(const ImageRecord& source, SplitRng& rng) {
    detail::require_pixels(source, "emit_tta_copies");
    std::vector<TtaEmission> out;
    int copy_index = 0;
    for (const auto& kinds : standard_tta_set()) {
        TtaEmission em;
        em.image = source;
        for (TransformKind kind : kinds) {
            switch (kind) {
                case TransformKind::HFLIP: {
                    auto [img, rec] = hflip(em.image);
                    em.image = std::move(img);
                    em.chain.push_back(rec);
                    break;
                }
                case TransformKind::VFLIP: {
                    auto [img, rec] = vflip(em.image);
                    em.image = std::move(img);
                    em.chain.push_back(rec);
                    break;
                }
                case TransformKind::INVERT: {
                    auto [img, rec] = invert(em.image);
                    em.image = std::move(img);
                    em.chain.push_back(rec);
                    break;
                }
                case TransformKind::SAFE_CROP: {
                    auto [img, rec] = bbox_safe_crop(em.image, rng);
                    em.image = std::move(img);
                    em.chain.push_back(rec);
                    break;
                }
                default:
                    throw ValidationError("unsupported kind in the tta set");
            }
        }
        em.image.image_id = source.image_id + "__tta" + std::to_string(copy_index++);
        out.push_back(std::move(em));
    }
    return out;
}

// Sidecar document describing one image's emitted copies, so detections made
// by an external detector on the copy files can be fused offline.
struct TtaSidecar {
    struct Copy {
        std::string copy_id;
        std::string file;
        TransformChain chain;
    };
    std::string image_id;
    std::vector<Copy> copies;

    nlohmann::json to_json() const {
        nlohmann::json copies_json = nlohmann::json::array();
        for (const auto& c : copies) {
            copies_json.push_back({
                {"copy_id", c.copy_id},
                {"file", c.file},
                {"chain", chain_to_json(c.chain)},
            });
        }
        return nlohmann::json{{"image_id", image_id}, {"copies", copies_json}};
    }

    static TtaSidecar from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("image_id") || !j.contains("copies")) {
            throw ParseError("tta sidecar: expected {image_id, copies}");
        }
        TtaSidecar sc;
        sc.image_id = j["image_id"].get<std::string>();
        for (const auto& c : j["copies"]) {
            sc.copies.push_back({c.at("copy_id").get<std::string>(),
                                 c.value("file", std::string()),
                                 chain_from_json(c.at("chain"))});
        }
        return sc;
    }
};

// Assembles the bundle for a sidecar from detections keyed by copy id and
// fuses it. Copies without detections contribute empty lists.
inline std::vector<Detection> fuse_from_sidecar(const TtaSidecar& sidecar,
                                                const DetectionMap& detections_by_copy,
                                                double conf_threshold, double nms_iou) {
    TtaBundle bundle;
    for (const auto& copy : sidecar.copies) {
        TtaCopy entry;
        entry.chain = copy.chain;
        auto it = detections_by_copy.find(copy.copy_id);
        if (it != detections_by_copy.end()) entry.detections = it->second;
        bundle.push_back(std::move(entry));
    }
    return tta_fuse(bundle, conf_threshold, nms_iou);
}

// Paper-era defaults; both are CLI-tunable.
inline constexpr double kDefaultConfThreshold = 0.25;
inline constexpr double kDefaultNmsIou = 0.45;

}  // namespace paveval
