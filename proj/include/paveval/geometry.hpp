#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "paveval/errors.hpp"

namespace paveval {

// Axis-aligned box in continuous pixel coordinates, corners (x_min,y_min)
// and (x_max,y_max). Construction rejects degenerate or negative boxes.
struct BBox {
    double x_min;
    double y_min;
    double x_max;
    double y_max;

    BBox(double x0, double y0, double x1, double y1)
        : x_min(x0), y_min(y0), x_max(x1), y_max(y1) {
        if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) ||
            !std::isfinite(y1)) {
            throw ValidationError("bbox coordinates must be finite");
        }
        if (x0 < 0.0 || y0 < 0.0) {
            throw ValidationError("bbox coordinates must be non-negative");
        }
        if (!(x0 < x1) || !(y0 < y1)) {
            throw ValidationError("bbox must have strictly positive area: [" +
                                  std::to_string(x0) + "," + std::to_string(y0) +
                                  "," + std::to_string(x1) + "," +
                                  std::to_string(y1) + "]");
        }
    }

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }

    bool operator==(const BBox& o) const {
        return x_min == o.x_min && y_min == o.y_min && x_max == o.x_max &&
               y_max == o.y_max;
    }
};

inline double area(const BBox& b) { return b.width() * b.height(); }

// Overlap rectangle, absent when the overlap has zero area (edge or corner
// contact does not count).
inline std::optional<BBox> intersect(const BBox& a, const BBox& b) {
    const double x0 = std::max(a.x_min, b.x_min);
    const double y0 = std::max(a.y_min, b.y_min);
    const double x1 = std::min(a.x_max, b.x_max);
    const double y1 = std::min(a.y_max, b.y_max);
    if (x0 < x1 && y0 < y1) return BBox(x0, y0, x1, y1);
    return std::nullopt;
}

inline double iou(const BBox& a, const BBox& b) {
    const auto inter = intersect(a, b);
    if (!inter) return 0.0;
    const double ai = area(*inter);
    return ai / (area(a) + area(b) - ai);
}

// Clip of raw corners (may lie outside the valid-BBox domain, e.g. negative
// after an affine remap) against a window, translated into window-local
// coordinates; absent when the overlap has zero area.
inline std::optional<BBox> clip_raw(double x0, double y0, double x1, double y1,
                                    const BBox& window) {
    const double cx0 = std::max(x0, window.x_min);
    const double cy0 = std::max(y0, window.y_min);
    const double cx1 = std::min(x1, window.x_max);
    const double cy1 = std::min(y1, window.y_max);
    if (!(cx0 < cx1 && cy0 < cy1)) return std::nullopt;
    return BBox(cx0 - window.x_min, cy0 - window.y_min, cx1 - window.x_min,
                cy1 - window.y_min);
}

// b ∩ window, translated into window-local coordinates; absent when empty.
inline std::optional<BBox> clip(const BBox& b, const BBox& window) {
    return clip_raw(b.x_min, b.y_min, b.x_max, b.y_max, window);
}

}  // namespace paveval
