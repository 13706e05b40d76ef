#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paveval/errors.hpp"

namespace paveval {

// Interleaved 8-bit RGB image, row-major.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // size = width * height * 3

    Raster() = default;
    Raster(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h),
          data(static_cast<size_t>(w) * static_cast<size_t>(h) * 3, fill) {
        if (w <= 0 || h <= 0) throw ValidationError("raster dimensions must be positive");
    }

    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }

    bool operator==(const Raster& o) const {
        return width == o.width && height == o.height && data == o.data;
    }
};

}  // namespace paveval
