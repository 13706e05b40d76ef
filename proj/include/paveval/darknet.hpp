#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "paveval/dataset.hpp"
#include "paveval/detail/numfmt.hpp"

namespace paveval {

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

// DarkNet lines are quantized to 6 decimals; denormalized corners may
// overshoot the image by that quantization error. Clamp within tolerance,
// reject anything larger.
inline double clamp_coord(double v, double limit, double tol, int line_no) {
    if (v < 0.0) {
        if (v < -tol) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": box extends outside the image");
        }
        return 0.0;
    }
    if (v > limit) {
        if (v > limit + tol) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": box extends outside the image");
        }
        return limit;
    }
    return v;
}

}  // namespace detail

// Reads DarkNet annotation text: one "class cx cy w h" line per box, values
// normalized to [0,1]. Corners are denormalized against the given image size.
inline ImageRecord parse_darknet(std::string_view text, int width, int height,
                                 const std::string& image_id) {
    ImageRecord record(image_id, width, height);
    const double w_tol = 1e-6 * width;
    const double h_tol = 1e-6 * height;

    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        const auto fields = detail::split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 5) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                             std::to_string(fields.size()));
        }
        const std::string where = "line " + std::to_string(line_no);
        const long long index = detail::parse_int(fields[0], where + " class index");
        const auto label = class_from_index(static_cast<int>(index));
        if (!label) {
            throw ValidationError(where + ": unknown class index " + std::to_string(index));
        }
        double vals[4];
        static const char* kFieldNames[4] = {"cx", "cy", "w", "h"};
        for (int i = 0; i < 4; ++i) {
            vals[i] = detail::parse_number(fields[i + 1], where + " " + kFieldNames[i]);
            if (!(vals[i] >= 0.0 && vals[i] <= 1.0)) {
                throw ValidationError(where + ": " + kFieldNames[i] +
                                      " must be normalized to [0,1], got " +
                                      std::string(fields[i + 1]));
            }
        }
        const double cx = vals[0], cy = vals[1], bw = vals[2], bh = vals[3];
        record.annotations.emplace_back(
            BBox(detail::clamp_coord((cx - bw / 2.0) * width, width, w_tol, line_no),
                 detail::clamp_coord((cy - bh / 2.0) * height, height, h_tol, line_no),
                 detail::clamp_coord((cx + bw / 2.0) * width, width, w_tol, line_no),
                 detail::clamp_coord((cy + bh / 2.0) * height, height, h_tol, line_no)),
            *label);
    }
    record.validate();
    return record;
}

// Inverse of parse_darknet up to the 6-decimal quantization.
inline std::string write_darknet(const ImageRecord& record) {
    record.validate();
    std::string out;
    char buf[128];
    for (const auto& a : record.annotations) {
        const double cx = (a.bbox.x_min + a.bbox.x_max) / 2.0 / record.width;
        const double cy = (a.bbox.y_min + a.bbox.y_max) / 2.0 / record.height;
        const double bw = a.bbox.width() / record.width;
        const double bh = a.bbox.height() / record.height;
        std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f\n",
                      static_cast<int>(a.label), cx, cy, bw, bh);
        out += buf;
    }
    return out;
}

}  // namespace paveval
