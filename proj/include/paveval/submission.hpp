#pragma once

#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "paveval/dataset.hpp"
#include "paveval/detail/jsonio.hpp"

namespace paveval {

using DetectionMap = std::map<std::string, std::vector<Detection>>;
using AnnotationMap = std::map<std::string, std::vector<Annotation>>;

namespace detail {

struct SubmissionEntry {
    std::string image_id;
    DistressClass label;
    BBox bbox;
    double score;  // NaN when the document carries no scores
};

// Validates one {image_id, category_id, bbox, score} object. `path` names the
// entry in error messages, e.g. "$[3]".
inline SubmissionEntry parse_entry(const nlohmann::json& e, const std::string& path,
                                   bool require_score) {
    if (!e.is_object()) throw ParseError(path + ": expected an object");
    auto field = [&](const char* name) -> const nlohmann::json& {
        auto it = e.find(name);
        if (it == e.end()) throw ParseError(path + "." + name + ": missing field");
        return *it;
    };

    const auto& id = field("image_id");
    if (!id.is_string()) throw ParseError(path + ".image_id: expected a string");

    const auto& cat = field("category_id");
    if (!cat.is_number_integer()) {
        throw ParseError(path + ".category_id: expected an integer");
    }
    const auto label = class_from_index(cat.get<int>());
    if (!label) {
        throw ValidationError(path + ".category_id: unknown class index " +
                              cat.dump());
    }

    const auto& box = field("bbox");
    if (!box.is_array() || box.size() != 4) {
        throw ParseError(path + ".bbox: expected [x, y, width, height]");
    }
    double v[4];
    for (int i = 0; i < 4; ++i) {
        if (!box[i].is_number()) {
            throw ParseError(path + ".bbox[" + std::to_string(i) + "]: expected a number");
        }
        v[i] = box[i].get<double>();
    }
    if (!(v[2] > 0.0) || !(v[3] > 0.0)) {
        throw ValidationError(path + ".bbox: width and height must be positive");
    }

    double score = std::nan("");
    if (require_score) {
        const auto& s = field("score");
        if (!s.is_number()) throw ParseError(path + ".score: expected a number");
        score = s.get<double>();
        if (!(score >= 0.0 && score <= 1.0)) {
            throw ValidationError(path + ".score: must be in [0,1], got " + s.dump());
        }
    }

    BBox bbox(v[0], v[1], v[0] + v[2], v[1] + v[3]);
    return {id.get<std::string>(), *label, bbox, score};
}

inline nlohmann::json entry_json(const std::string& image_id, DistressClass label,
                                 const BBox& b) {
    return nlohmann::json{
        {"image_id", image_id},
        {"category_id", static_cast<int>(label)},
        {"bbox", {b.x_min, b.y_min, b.width(), b.height()}},
    };
}

}  // namespace detail

// Submission document: a flat array of {image_id, category_id,
// bbox: [x, y, width, height], score}. Detections are grouped per image in
// document order.
inline DetectionMap parse_submission(std::string_view json_text) {
    const nlohmann::json doc = detail::parse_json_document(json_text);
    if (!doc.is_array()) throw ParseError("$: expected a top-level array");
    DetectionMap out;
    for (size_t i = 0; i < doc.size(); ++i) {
        const auto entry = detail::parse_entry(doc[i], "$[" + std::to_string(i) + "]",
                                               /*require_score=*/true);
        out[entry.image_id].emplace_back(entry.bbox, entry.label, entry.score);
    }
    return out;
}

inline std::string write_submission(const DetectionMap& detections) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& [image_id, dets] : detections) {
        for (const auto& d : dets) {
            nlohmann::json e = detail::entry_json(image_id, d.label, d.bbox);
            e["score"] = d.confidence;
            doc.push_back(std::move(e));
        }
    }
    return doc.dump();
}

// Ground-truth document: same shape minus "score" (a score field, if present,
// is ignored).
inline AnnotationMap parse_ground_truth(std::string_view json_text) {
    const nlohmann::json doc = detail::parse_json_document(json_text);
    if (!doc.is_array()) throw ParseError("$: expected a top-level array");
    AnnotationMap out;
    for (size_t i = 0; i < doc.size(); ++i) {
        const auto entry = detail::parse_entry(doc[i], "$[" + std::to_string(i) + "]",
                                               /*require_score=*/false);
        out[entry.image_id].emplace_back(entry.bbox, entry.label);
    }
    return out;
}

inline std::string write_ground_truth(const AnnotationMap& annotations) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& [image_id, anns] : annotations) {
        for (const auto& a : anns) {
            doc.push_back(detail::entry_json(image_id, a.label, a.bbox));
        }
    }
    return doc.dump();
}

// Builds a Dataset from bare per-image boxes. When true image dimensions are
// unknown, each record gets the smallest integer envelope that contains its
// boxes, which is all the matching pipeline needs.
inline Dataset to_dataset(const AnnotationMap& annotations) {
    Dataset ds;
    for (const auto& [image_id, anns] : annotations) {
        double max_x = 1.0, max_y = 1.0;
        for (const auto& a : anns) {
            max_x = std::max(max_x, a.bbox.x_max);
            max_y = std::max(max_y, a.bbox.y_max);
        }
        ImageRecord record(image_id, static_cast<int>(std::ceil(max_x)),
                           static_cast<int>(std::ceil(max_y)));
        record.annotations = anns;
        ds.add(std::move(record));
    }
    return ds;
}

}  // namespace paveval
