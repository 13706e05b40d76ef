#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paveval/geometry.hpp"

namespace paveval {

enum class TransformKind {
    HFLIP,
    VFLIP,
    SCALE,
    INVERT,
    SAFE_CROP,
    MOSAIC,
    MEAN_NORM,
    GAUSSIAN,
    HIST_EQ,
    HUE_CONTRAST,
    MEDIAN_BLUR,
    BRIGHTNESS_CONTRAST,
};

inline const char* kind_name(TransformKind k) {
    switch (k) {
        case TransformKind::HFLIP: return "hflip";
        case TransformKind::VFLIP: return "vflip";
        case TransformKind::SCALE: return "scale";
        case TransformKind::INVERT: return "invert";
        case TransformKind::SAFE_CROP: return "safe_crop";
        case TransformKind::MOSAIC: return "mosaic";
        case TransformKind::MEAN_NORM: return "mean_norm";
        case TransformKind::GAUSSIAN: return "gaussian";
        case TransformKind::HIST_EQ: return "hist_eq";
        case TransformKind::HUE_CONTRAST: return "hue_contrast";
        case TransformKind::MEDIAN_BLUR: return "median_blur";
        case TransformKind::BRIGHTNESS_CONTRAST: return "brightness_contrast";
    }
    return "?";
}

inline std::optional<TransformKind> kind_from_name(const std::string& name) {
    static const std::map<std::string, TransformKind> kTable = {
        {"hflip", TransformKind::HFLIP},
        {"vflip", TransformKind::VFLIP},
        {"scale", TransformKind::SCALE},
        {"invert", TransformKind::INVERT},
        {"safe_crop", TransformKind::SAFE_CROP},
        {"mosaic", TransformKind::MOSAIC},
        {"mean_norm", TransformKind::MEAN_NORM},
        {"gaussian", TransformKind::GAUSSIAN},
        {"hist_eq", TransformKind::HIST_EQ},
        {"hue_contrast", TransformKind::HUE_CONTRAST},
        {"median_blur", TransformKind::MEDIAN_BLUR},
        {"brightness_contrast", TransformKind::BRIGHTNESS_CONTRAST},
    };
    auto it = kTable.find(name);
    if (it == kTable.end()) return std::nullopt;
    return it->second;
}

inline bool is_photometric(TransformKind k) {
    switch (k) {
        case TransformKind::INVERT:
        case TransformKind::MEAN_NORM:
        case TransformKind::GAUSSIAN:
        case TransformKind::HIST_EQ:
        case TransformKind::HUE_CONTRAST:
        case TransformKind::MEDIAN_BLUR:
        case TransformKind::BRIGHTNESS_CONTRAST:
            return true;
        default:
            return false;
    }
}

// One applied transform, with enough parameters to map boxes between the
// source frame and the transformed frame. Every kind except MOSAIC has an
// invertible box map (photometric kinds map boxes by identity).
struct TransformRecord {
    TransformKind kind;
    std::map<std::string, double> params;
    bool geometry_invertible = true;
    int src_width = 0;
    int src_height = 0;

    double param(const std::string& name, double fallback) const {
        auto it = params.find(name);
        return it == params.end() ? fallback : it->second;
    }

    double require_param(const std::string& name) const {
        auto it = params.find(name);
        if (it == params.end()) {
            throw ValidationError(std::string(kind_name(kind)) +
                                  " record is missing parameter '" + name + "'");
        }
        return it->second;
    }

    int output_width() const {
        if (kind == TransformKind::SAFE_CROP) {
            return static_cast<int>(require_param("x1") - require_param("x0"));
        }
        return src_width;
    }
    int output_height() const {
        if (kind == TransformKind::SAFE_CROP) {
            return static_cast<int>(require_param("y1") - require_param("y0"));
        }
        return src_height;
    }
};

// Order of application; forward maps run front to back, inverses back to
// front.
using TransformChain = std::vector<TransformRecord>;

// Maps a box from the record's source frame into its output frame. Boxes are
// clipped against the output frame; a box clipped to nothing maps to absent.
inline std::optional<BBox> map_box_forward(const TransformRecord& rec, const BBox& box) {
    const double w = rec.src_width, h = rec.src_height;
    switch (rec.kind) {
        case TransformKind::HFLIP:
            return BBox(w - box.x_max, box.y_min, w - box.x_min, box.y_max);
        case TransformKind::VFLIP:
            return BBox(box.x_min, h - box.y_max, box.x_max, h - box.y_min);
        case TransformKind::SCALE: {
            const double fx = rec.require_param("factor_x");
            const double fy = rec.require_param("factor_y");
            const double ox = rec.require_param("offset_x");
            const double oy = rec.require_param("offset_y");
            return clip_raw(fx * box.x_min + ox, fy * box.y_min + oy,
                            fx * box.x_max + ox, fy * box.y_max + oy, BBox(0, 0, w, h));
        }
        case TransformKind::SAFE_CROP: {
            const double x0 = rec.require_param("x0");
            const double y0 = rec.require_param("y0");
            return clip_raw(box.x_min, box.y_min, box.x_max, box.y_max,
                            BBox(x0, y0, rec.require_param("x1"), rec.require_param("y1")));
        }
        case TransformKind::MOSAIC: {
            const double fx = rec.require_param("factor_x");
            const double fy = rec.require_param("factor_y");
            const double qx0 = rec.require_param("x0");
            const double qy0 = rec.require_param("y0");
            const auto mapped =
                clip_raw(fx * box.x_min, fy * box.y_min, fx * box.x_max, fy * box.y_max,
                         BBox(0, 0, rec.require_param("x1") - qx0,
                              rec.require_param("y1") - qy0));
            if (!mapped) return std::nullopt;
            return BBox(mapped->x_min + qx0, mapped->y_min + qy0, mapped->x_max + qx0,
                        mapped->y_max + qy0);
        }
        default:
            return box;  // photometric: identity geometry
    }
}

// Maps a box from the record's output frame back into its source frame.
// Throws for MOSAIC, whose box map is not invertible.
inline std::optional<BBox> map_box_inverse(const TransformRecord& rec, const BBox& box) {
    if (!rec.geometry_invertible || rec.kind == TransformKind::MOSAIC) {
        throw ValidationError("transform 'mosaic' has no inverse box map");
    }
    const double w = rec.src_width, h = rec.src_height;
    switch (rec.kind) {
        case TransformKind::HFLIP:
            return BBox(w - box.x_max, box.y_min, w - box.x_min, box.y_max);
        case TransformKind::VFLIP:
            return BBox(box.x_min, h - box.y_max, box.x_max, h - box.y_min);
        case TransformKind::SCALE: {
            const double fx = rec.require_param("factor_x");
            const double fy = rec.require_param("factor_y");
            const double ox = rec.require_param("offset_x");
            const double oy = rec.require_param("offset_y");
            return clip_raw((box.x_min - ox) / fx, (box.y_min - oy) / fy,
                            (box.x_max - ox) / fx, (box.y_max - oy) / fy,
                            BBox(0, 0, w, h));
        }
        case TransformKind::SAFE_CROP: {
            const double x0 = rec.require_param("x0");
            const double y0 = rec.require_param("y0");
            return clip_raw(box.x_min + x0, box.y_min + y0, box.x_max + x0,
                            box.y_max + y0, BBox(0, 0, w, h));
        }
        default:
            return box;
    }
}

inline std::optional<BBox> map_box_forward(const TransformChain& chain, const BBox& box) {
    std::optional<BBox> cur = box;
    for (const auto& rec : chain) {
        if (!cur) return std::nullopt;
        cur = map_box_forward(rec, *cur);
    }
    return cur;
}

inline std::optional<BBox> map_box_inverse(const TransformChain& chain, const BBox& box) {
    std::optional<BBox> cur = box;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        if (!cur) return std::nullopt;
        cur = map_box_inverse(*it, *cur);
    }
    return cur;
}

inline nlohmann::json record_to_json(const TransformRecord& rec) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : rec.params) params[k] = v;
    return nlohmann::json{
        {"kind", kind_name(rec.kind)},
        {"params", params},
        {"geometry_invertible", rec.geometry_invertible},
        {"src_width", rec.src_width},
        {"src_height", rec.src_height},
    };
}

inline TransformRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw ParseError("transform record: missing 'kind'");
    }
    const auto kind = kind_from_name(j["kind"].get<std::string>());
    if (!kind) {
        throw ValidationError("unknown transform kind '" + j["kind"].get<std::string>() + "'");
    }
    TransformRecord rec;
    rec.kind = *kind;
    if (j.contains("params")) {
        for (const auto& [k, v] : j["params"].items()) {
            if (!v.is_number()) throw ParseError("transform param '" + k + "' must be a number");
            rec.params[k] = v.get<double>();
        }
    }
    rec.geometry_invertible = j.value("geometry_invertible", rec.kind != TransformKind::MOSAIC);
    rec.src_width = j.value("src_width", 0);
    rec.src_height = j.value("src_height", 0);
    return rec;
}

inline nlohmann::json chain_to_json(const TransformChain& chain) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rec : chain) arr.push_back(record_to_json(rec));
    return arr;
}

inline TransformChain chain_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("transform chain: expected an array");
    TransformChain chain;
    for (const auto& e : j) chain.push_back(record_from_json(e));
    return chain;
}

}  // namespace paveval
