#pragma once

#include <filesystem>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "paveval/errors.hpp"
#include "paveval/raster.hpp"

namespace paveval {

// PNG/JPEG file decode into interleaved RGB. Grayscale files are expanded to
// three channels by the codec.
inline Raster read_image(const std::filesystem::path& path) {
    const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw IoError("cannot read image " + path.string());
    Raster out(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            out.at(x, y, 0) = row[x][2];
            out.at(x, y, 1) = row[x][1];
            out.at(x, y, 2) = row[x][0];
        }
    }
    return out;
}

inline std::pair<int, int> read_image_size(const std::filesystem::path& path) {
    const cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (img.empty()) throw IoError("cannot read image " + path.string());
    return {img.cols, img.rows};
}

// Encodes by file extension (.png, .jpg, .jpeg).
inline void write_image(const std::filesystem::path& path, const Raster& raster) {
    cv::Mat bgr(raster.height, raster.width, CV_8UC3);
    for (int y = 0; y < raster.height; ++y) {
        cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < raster.width; ++x) {
            row[x][2] = raster.at(x, y, 0);
            row[x][1] = raster.at(x, y, 1);
            row[x][0] = raster.at(x, y, 2);
        }
    }
    if (!cv::imwrite(path.string(), bgr)) {
        throw IoError("cannot write image " + path.string());
    }
}

}  // namespace paveval
