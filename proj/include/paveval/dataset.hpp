#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "paveval/classes.hpp"
#include "paveval/geometry.hpp"
#include "paveval/raster.hpp"
#include "paveval/rng.hpp"

namespace paveval {

struct Annotation {
    BBox bbox;
    DistressClass label;

    Annotation(BBox b, DistressClass l) : bbox(b), label(l) {}

    bool operator==(const Annotation& o) const {
        return bbox == o.bbox && label == o.label;
    }
};

// A class-labeled box with a model confidence score.
struct Detection {
    BBox bbox;
    DistressClass label;
    double confidence;

    Detection(BBox b, DistressClass l, double conf)
        : bbox(b), label(l), confidence(conf) {
        if (!(conf >= 0.0 && conf <= 1.0)) {
            throw ValidationError("detection confidence must be in [0,1], got " +
                                  std::to_string(conf));
        }
    }

    bool operator==(const Detection& o) const {
        return bbox == o.bbox && label == o.label && confidence == o.confidence;
    }
};

enum class ImageSource { ARAN, STREET_VIEW, SYNTHETIC, UNKNOWN };

// Image metadata plus annotations; pixel data is optional so scoring-only
// workflows never touch rasters.
struct ImageRecord {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::optional<Raster> pixels;
    std::vector<Annotation> annotations;
    ImageSource source = ImageSource::UNKNOWN;

    ImageRecord() = default;
    ImageRecord(std::string id, int w, int h)
        : image_id(std::move(id)), width(w), height(h) {}

    // Checks dimensions, raster shape, and that every box lies inside
    // [0,width] x [0,height].
    void validate() const {
        if (image_id.empty()) throw ValidationError("image_id must be non-empty");
        if (width <= 0 || height <= 0) {
            throw ValidationError("image '" + image_id + "' has non-positive size");
        }
        if (pixels && (pixels->width != width || pixels->height != height)) {
            throw ValidationError("image '" + image_id +
                                  "' raster shape does not match declared size");
        }
        for (const auto& a : annotations) {
            if (a.bbox.x_min < 0.0 || a.bbox.y_min < 0.0 ||
                a.bbox.x_max > static_cast<double>(width) ||
                a.bbox.y_max > static_cast<double>(height)) {
                throw ValidationError("image '" + image_id +
                                      "' has a box outside image bounds");
            }
        }
    }
};

// Ordered collection of ImageRecord with unique ids.
class Dataset {
public:
    Dataset() = default;

    void add(ImageRecord record) {
        record.validate();
        if (index_.count(record.image_id)) {
            throw ValidationError("duplicate image_id '" + record.image_id + "'");
        }
        index_[record.image_id] = records_.size();
        records_.push_back(std::move(record));
    }

    bool contains(const std::string& image_id) const {
        return index_.count(image_id) != 0;
    }

    const ImageRecord& at(const std::string& image_id) const {
        auto it = index_.find(image_id);
        if (it == index_.end()) {
            throw ValidationError("unknown image_id '" + image_id + "'");
        }
        return records_[it->second];
    }

    const std::vector<ImageRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    std::vector<std::string> image_ids() const {
        std::vector<std::string> ids;
        ids.reserve(records_.size());
        for (const auto& r : records_) ids.push_back(r.image_id);
        return ids;
    }

    size_t annotation_count() const {
        size_t n = 0;
        for (const auto& r : records_) n += r.annotations.size();
        return n;
    }

private:
    std::vector<ImageRecord> records_;
    std::map<std::string, size_t> index_;
};

// Deterministic partition of ids into (train1, train2, test). Sizes are
// round(N * f1) and round(N * f2); the remainder goes to the test split.
// The shuffle is keyed by the seed over the sorted id list, so input order
// never matters.
inline std::tuple<std::vector<std::string>, std::vector<std::string>,
                  std::vector<std::string>>
split_ids(std::vector<std::string> ids, double f1, double f2, double f_test,
          std::uint64_t seed) {
    if (!(f1 >= 0.0) || !(f2 >= 0.0) || !(f_test >= 0.0)) {
        throw ValidationError("split fractions must be non-negative");
    }
    if (std::fabs(f1 + f2 + f_test - 1.0) > 1e-9) {
        throw ValidationError("split fractions must sum to 1");
    }

    std::sort(ids.begin(), ids.end());
    SplitRng rng = SplitRng(seed).derive("dataset-split");
    for (size_t i = ids.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(ids[i - 1], ids[j]);
    }

    const auto n = static_cast<std::int64_t>(ids.size());
    std::int64_t n1 = std::llround(static_cast<double>(n) * f1);
    n1 = std::clamp<std::int64_t>(n1, 0, n);
    std::int64_t n2 = std::llround(static_cast<double>(n) * f2);
    n2 = std::clamp<std::int64_t>(n2, 0, n - n1);

    std::vector<std::string> s1(ids.begin(), ids.begin() + n1);
    std::vector<std::string> s2(ids.begin() + n1, ids.begin() + n1 + n2);
    std::vector<std::string> s3(ids.begin() + n1 + n2, ids.end());
    return {std::move(s1), std::move(s2), std::move(s3)};
}

inline std::tuple<Dataset, Dataset, Dataset> split(const Dataset& dataset, double f1,
                                                   double f2, double f_test,
                                                   std::uint64_t seed) {
    auto [ids1, ids2, ids3] = split_ids(dataset.image_ids(), f1, f2, f_test, seed);
    Dataset out1, out2, out3;
    for (const auto& id : ids1) out1.add(dataset.at(id));
    for (const auto& id : ids2) out2.add(dataset.at(id));
    for (const auto& id : ids3) out3.add(dataset.at(id));
    return {std::move(out1), std::move(out2), std::move(out3)};
}

}  // namespace paveval
