#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "paveval/darknet.hpp"
#include "paveval/image_io.hpp"
#include "paveval/voc.hpp"

namespace paveval {

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

inline const std::vector<std::string>& image_extensions() {
    static const std::vector<std::string> kExts = {".png", ".jpg", ".jpeg", ".PNG",
                                                   ".JPG", ".JPEG"};
    return kExts;
}

// Sibling image file sharing the annotation file's stem, if any.
inline std::optional<std::filesystem::path> find_image_for(
    const std::filesystem::path& dir, const std::string& stem) {
    for (const auto& ext : image_extensions()) {
        const auto candidate = dir / (stem + ext);
        if (std::filesystem::exists(candidate)) return candidate;
    }
    return std::nullopt;
}

inline std::vector<std::filesystem::path> files_with_extension(
    const std::filesystem::path& dir, std::string_view ext) {
    if (!std::filesystem::is_directory(dir)) {
        throw IoError("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

// Loads a directory of Pascal VOC .xml files; image_id is the file stem.
// With load_pixels, sibling .png/.jpg files are decoded and must match the
// declared size.
inline Dataset load_voc_dir(const std::filesystem::path& dir, bool load_pixels = false) {
    Dataset ds;
    for (const auto& path : detail::files_with_extension(dir, ".xml")) {
        const std::string stem = path.stem().string();
        ImageRecord record;
        try {
            record = parse_voc(detail::read_file(path), stem);
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
        if (load_pixels) {
            const auto image_path = detail::find_image_for(dir, stem);
            if (!image_path) throw IoError("no image file for " + path.string());
            record.pixels = read_image(*image_path);
            record.validate();
        }
        ds.add(std::move(record));
    }
    return ds;
}

// Loads a directory of DarkNet .txt files. Image dimensions come from the
// sibling image file, which must exist.
inline Dataset load_darknet_dir(const std::filesystem::path& dir, bool load_pixels = false) {
    Dataset ds;
    for (const auto& path : detail::files_with_extension(dir, ".txt")) {
        const std::string stem = path.stem().string();
        const auto image_path = detail::find_image_for(dir, stem);
        if (!image_path) {
            throw IoError("no image file for " + path.string() +
                          " (DarkNet needs image dimensions)");
        }
        ImageRecord record;
        if (load_pixels) {
            Raster px = read_image(*image_path);
            try {
                record = parse_darknet(detail::read_file(path), px.width, px.height, stem);
            } catch (const std::exception& e) {
                throw ParseError(path.string() + ": " + e.what());
            }
            record.pixels = std::move(px);
            record.validate();
        } else {
            const auto [w, h] = read_image_size(*image_path);
            try {
                record = parse_darknet(detail::read_file(path), w, h, stem);
            } catch (const std::exception& e) {
                throw ParseError(path.string() + ": " + e.what());
            }
        }
        ds.add(std::move(record));
    }
    return ds;
}

inline Dataset load_annotation_dir(const std::filesystem::path& dir,
                                   const std::string& format, bool load_pixels = false) {
    if (format == "voc") return load_voc_dir(dir, load_pixels);
    if (format == "darknet") return load_darknet_dir(dir, load_pixels);
    throw ValidationError("unknown annotation format '" + format + "'");
}

// Writes one record's annotations (and optionally pixels, as PNG) into dir.
inline void save_record(const std::filesystem::path& dir, const ImageRecord& record,
                        const std::string& format, bool write_pixels) {
    if (format == "voc") {
        detail::write_file(dir / (record.image_id + ".xml"), write_voc(record));
    } else if (format == "darknet") {
        detail::write_file(dir / (record.image_id + ".txt"), write_darknet(record));
    } else {
        throw ValidationError("unknown annotation format '" + format + "'");
    }
    if (write_pixels) {
        if (!record.pixels) {
            throw ValidationError("record '" + record.image_id + "' has no pixels to write");
        }
        write_image(dir / (record.image_id + ".png"), *record.pixels);
    }
}

inline void save_dataset(const std::filesystem::path& dir, const Dataset& dataset,
                         const std::string& format, bool write_pixels) {
    std::filesystem::create_directories(dir);
    std::vector<const ImageRecord*> ordered;
    for (const auto& r : dataset.records()) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const ImageRecord* a, const ImageRecord* b) {
                  return a->image_id < b->image_id;
              });
    for (const auto* r : ordered) save_record(dir, *r, format, write_pixels);
}

}  // namespace paveval
