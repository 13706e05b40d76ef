#pragma once

#include <atomic>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "paveval/dataset.hpp"
#include "paveval/detail/jsonio.hpp"
#include "paveval/raster_ops.hpp"
#include "paveval/rng.hpp"
#include "paveval/transform.hpp"

namespace paveval {

// After clipping, a remapped box is kept only if it retains at least this
// fraction of its mapped area and both sides stay at least kMinBoxSide px.
inline constexpr double kBoxRetainFraction = 0.25;
inline constexpr double kMinBoxSide = 2.0;

struct AugmentedRecord {
    ImageRecord image;
    std::vector<std::pair<std::string, TransformRecord>> provenance;
};

namespace detail {

inline const Raster& require_pixels(const ImageRecord& r, const char* op) {
    if (!r.pixels) {
        throw ValidationError(std::string(op) + ": image '" + r.image_id +
                              "' has no pixel data");
    }
    return *r.pixels;
}

inline TransformRecord make_record(TransformKind kind, const ImageRecord& src,
                                   std::map<std::string, double> params = {}) {
    TransformRecord rec;
    rec.kind = kind;
    rec.params = std::move(params);
    rec.geometry_invertible = kind != TransformKind::MOSAIC;
    rec.src_width = src.width;
    rec.src_height = src.height;
    return rec;
}

// Applies the record's box map to every annotation, enforcing the retention
// rule against the un-clipped mapped area.
inline std::vector<Annotation> remap_annotations(const std::vector<Annotation>& anns,
                                                 const TransformRecord& rec,
                                                 double area_scale) {
    std::vector<Annotation> out;
    for (const auto& a : anns) {
        const auto mapped = map_box_forward(rec, a.bbox);
        if (!mapped) continue;
        const double full_area = area(a.bbox) * area_scale;
        if (area(*mapped) < kBoxRetainFraction * full_area) continue;
        if (mapped->width() < kMinBoxSide || mapped->height() < kMinBoxSide) continue;
        out.emplace_back(*mapped, a.label);
    }
    return out;
}

}  // namespace detail

inline std::pair<ImageRecord, TransformRecord> hflip(const ImageRecord& r) {
    const Raster& px = detail::require_pixels(r, "hflip");
    const TransformRecord rec = detail::make_record(TransformKind::HFLIP, r);
    ImageRecord out = r;
    out.pixels = hflip_raster(px);
    out.annotations.clear();
    for (const auto& a : r.annotations) {
        out.annotations.emplace_back(*map_box_forward(rec, a.bbox), a.label);
    }
    return {std::move(out), rec};
}

inline std::pair<ImageRecord, TransformRecord> vflip(const ImageRecord& r) {
    const Raster& px = detail::require_pixels(r, "vflip");
    const TransformRecord rec = detail::make_record(TransformKind::VFLIP, r);
    ImageRecord out = r;
    out.pixels = vflip_raster(px);
    out.annotations.clear();
    for (const auto& a : r.annotations) {
        out.annotations.emplace_back(*map_box_forward(rec, a.bbox), a.label);
    }
    return {std::move(out), rec};
}

inline constexpr double kScaleFactorMin = 0.5;
inline constexpr double kScaleFactorMax = 2.0;
inline constexpr std::uint8_t kPadGray = 114;

// Zoom in/out while keeping the output size: upscales then center-crops, or
// downscales then center-pads with gray. Remapped boxes follow the actual
// rasterized factors, which may differ from the nominal factor by rounding.
inline std::pair<ImageRecord, TransformRecord> scale(const ImageRecord& r, double factor) {
    if (!(factor >= kScaleFactorMin && factor <= kScaleFactorMax)) {
        throw ValidationError("scale factor must be in [0.5, 2.0], got " +
                              std::to_string(factor));
    }
    const Raster& px = detail::require_pixels(r, "scale");

    const int sw = static_cast<int>(std::llround(r.width * factor));
    const int sh = static_cast<int>(std::llround(r.height * factor));
    const double fx = static_cast<double>(sw) / r.width;
    const double fy = static_cast<double>(sh) / r.height;

    // copy offsets: source region origin in the resized image, destination
    // origin in the output
    const int src_x = std::max(0, (sw - r.width) / 2);
    const int src_y = std::max(0, (sh - r.height) / 2);
    const int dst_x = std::max(0, (r.width - sw) / 2);
    const int dst_y = std::max(0, (r.height - sh) / 2);
    const int copy_w = std::min(r.width, sw);
    const int copy_h = std::min(r.height, sh);

    const TransformRecord rec = detail::make_record(
        TransformKind::SCALE, r,
        {{"factor", factor},
         {"factor_x", fx},
         {"factor_y", fy},
         {"offset_x", static_cast<double>(dst_x - src_x)},
         {"offset_y", static_cast<double>(dst_y - src_y)}});

    ImageRecord out = r;
    if (factor == 1.0) {
        return {std::move(out), rec};
    }
    const Raster resized = resize_bilinear(px, sw, sh);
    Raster canvas(r.width, r.height, kPadGray);
    for (int y = 0; y < copy_h; ++y) {
        for (int x = 0; x < copy_w; ++x) {
            for (int c = 0; c < 3; ++c) {
                canvas.at(dst_x + x, dst_y + y, c) = resized.at(src_x + x, src_y + y, c);
            }
        }
    }
    out.pixels = std::move(canvas);
    out.annotations = detail::remap_annotations(r.annotations, rec, fx * fy);
    return {std::move(out), rec};
}

// Photometric negative v -> constant - v. With the default 255 this is an
// exact involution.
inline std::pair<ImageRecord, TransformRecord> invert(const ImageRecord& r,
                                                      double constant = 255.0) {
    const Raster& px = detail::require_pixels(r, "invert");
    ImageRecord out = r;
    out.pixels = invert_raster(px, constant);
    return {std::move(out),
            detail::make_record(TransformKind::INVERT, r, {{"constant", constant}})};
}

// Random crop constrained to keep every annotated box fully inside: the
// window always contains the union rectangle of all boxes, with per-side
// margins drawn uniformly from the available slack. With no annotations the
// window is the whole image.
inline std::pair<ImageRecord, TransformRecord> bbox_safe_crop(const ImageRecord& r,
                                                              SplitRng& rng) {
    const Raster& px = detail::require_pixels(r, "bbox_safe_crop");

    int x0 = 0, y0 = 0, x1 = r.width, y1 = r.height;
    if (!r.annotations.empty()) {
        double ux0 = r.width, uy0 = r.height, ux1 = 0.0, uy1 = 0.0;
        for (const auto& a : r.annotations) {
            ux0 = std::min(ux0, a.bbox.x_min);
            uy0 = std::min(uy0, a.bbox.y_min);
            ux1 = std::max(ux1, a.bbox.x_max);
            uy1 = std::max(uy1, a.bbox.y_max);
        }
        const double ml = rng.uniform(0.0, ux0);
        const double mt = rng.uniform(0.0, uy0);
        const double mr = rng.uniform(0.0, r.width - ux1);
        const double mb = rng.uniform(0.0, r.height - uy1);
        x0 = std::clamp(static_cast<int>(std::floor(ux0 - ml)), 0, r.width - 1);
        y0 = std::clamp(static_cast<int>(std::floor(uy0 - mt)), 0, r.height - 1);
        x1 = std::clamp(static_cast<int>(std::ceil(ux1 + mr)), x0 + 1, r.width);
        y1 = std::clamp(static_cast<int>(std::ceil(uy1 + mb)), y0 + 1, r.height);
    }

    const TransformRecord rec = detail::make_record(
        TransformKind::SAFE_CROP, r,
        {{"x0", static_cast<double>(x0)},
         {"y0", static_cast<double>(y0)},
         {"x1", static_cast<double>(x1)},
         {"y1", static_cast<double>(y1)}});

    ImageRecord out = r;
    out.width = x1 - x0;
    out.height = y1 - y0;
    out.pixels = crop_raster(px, x0, y0, x1 - x0, y1 - y0);
    out.annotations.clear();
    for (const auto& a : r.annotations) {
        out.annotations.emplace_back(*map_box_forward(rec, a.bbox), a.label);
    }
    return {std::move(out), rec};
}

// Four images composited around a pivot; each input is stretched to fill its
// quadrant. The pivot lies in the central [0.25,0.75]^2 region of the output
// (which takes r1's size). The result's box map is not invertible.
inline AugmentedRecord mosaic_at(const ImageRecord& r1, const ImageRecord& r2,
                                 const ImageRecord& r3, const ImageRecord& r4,
                                 int pivot_x, int pivot_y) {
    const ImageRecord* inputs[4] = {&r1, &r2, &r3, &r4};
    for (const auto* r : inputs) detail::require_pixels(*r, "mosaic");
    const int w = r1.width, h = r1.height;
    if (pivot_x <= 0 || pivot_x >= w || pivot_y <= 0 || pivot_y >= h) {
        throw ValidationError("mosaic pivot must be strictly inside the output");
    }

    const int quad[4][4] = {
        {0, 0, pivot_x, pivot_y},
        {pivot_x, 0, w, pivot_y},
        {0, pivot_y, pivot_x, h},
        {pivot_x, pivot_y, w, h},
    };

    AugmentedRecord out;
    out.image = ImageRecord(r1.image_id, w, h);
    out.image.source = ImageSource::SYNTHETIC;
    Raster canvas(w, h);
    for (int q = 0; q < 4; ++q) {
        const ImageRecord& src = *inputs[q];
        const int qw = quad[q][2] - quad[q][0];
        const int qh = quad[q][3] - quad[q][1];
        paste_raster(canvas, resize_bilinear(*src.pixels, qw, qh), quad[q][0], quad[q][1]);

        const double fx = static_cast<double>(qw) / src.width;
        const double fy = static_cast<double>(qh) / src.height;
        const TransformRecord rec = detail::make_record(
            TransformKind::MOSAIC, src,
            {{"x0", static_cast<double>(quad[q][0])},
             {"y0", static_cast<double>(quad[q][1])},
             {"x1", static_cast<double>(quad[q][2])},
             {"y1", static_cast<double>(quad[q][3])},
             {"factor_x", fx},
             {"factor_y", fy}});
        auto mapped = detail::remap_annotations(src.annotations, rec, fx * fy);
        out.image.annotations.insert(out.image.annotations.end(), mapped.begin(),
                                     mapped.end());
        out.provenance.emplace_back(src.image_id, rec);
    }
    out.image.pixels = std::move(canvas);
    return out;
}

inline AugmentedRecord mosaic(const ImageRecord& r1, const ImageRecord& r2,
                              const ImageRecord& r3, const ImageRecord& r4,
                              SplitRng& rng) {
    const double u = rng.uniform(0.25, 0.75);
    const double v = rng.uniform(0.25, 0.75);
    const int px = std::clamp(static_cast<int>(std::lround(u * r1.width)), 1, r1.width - 1);
    const int py = std::clamp(static_cast<int>(std::lround(v * r1.height)), 1, r1.height - 1);
    return mosaic_at(r1, r2, r3, r4, px, py);
}

inline std::pair<ImageRecord, TransformRecord> mean_normalize(const ImageRecord& r) {
    const Raster& px = detail::require_pixels(r, "mean_normalize");
    ImageRecord out = r;
    out.pixels = mean_normalize_raster(px);
    return {std::move(out), detail::make_record(TransformKind::MEAN_NORM, r)};
}

inline std::pair<ImageRecord, TransformRecord> gaussian_filter(const ImageRecord& r,
                                                               double sigma = 1.0,
                                                               int ksize = 5) {
    const Raster& px = detail::require_pixels(r, "gaussian_filter");
    ImageRecord out = r;
    out.pixels = gaussian_filter_raster(px, sigma, ksize);
    return {std::move(out),
            detail::make_record(TransformKind::GAUSSIAN, r,
                                {{"sigma", sigma}, {"ksize", static_cast<double>(ksize)}})};
}

inline std::pair<ImageRecord, TransformRecord> hist_equalize(const ImageRecord& r) {
    const Raster& px = detail::require_pixels(r, "hist_equalize");
    ImageRecord out = r;
    out.pixels = hist_equalize_raster(px);
    return {std::move(out), detail::make_record(TransformKind::HIST_EQ, r)};
}

inline std::pair<ImageRecord, TransformRecord> hue_contrast(const ImageRecord& r,
                                                            double dh, double dc) {
    const Raster& px = detail::require_pixels(r, "hue_contrast");
    ImageRecord out = r;
    out.pixels = hue_contrast_raster(px, dh, dc);
    return {std::move(out), detail::make_record(TransformKind::HUE_CONTRAST, r,
                                                {{"dh", dh}, {"dc", dc}})};
}

inline std::pair<ImageRecord, TransformRecord> median_blur(const ImageRecord& r,
                                                           int ksize = 3) {
    const Raster& px = detail::require_pixels(r, "median_blur");
    ImageRecord out = r;
    out.pixels = median_blur_raster(px, ksize);
    return {std::move(out),
            detail::make_record(TransformKind::MEDIAN_BLUR, r,
                                {{"ksize", static_cast<double>(ksize)}})};
}

inline std::pair<ImageRecord, TransformRecord> brightness_contrast(const ImageRecord& r,
                                                                   double db, double dc) {
    const Raster& px = detail::require_pixels(r, "brightness_contrast");
    ImageRecord out = r;
    out.pixels = brightness_contrast_raster(px, db, dc);
    return {std::move(out), detail::make_record(TransformKind::BRIGHTNESS_CONTRAST, r,
                                                {{"db", db}, {"dc", dc}})};
}

// ---------------------------------------------------------------------------
// Pipeline: an ordered list of (kind, params, probability) applied per image
// copy, with all randomness drawn from a substream keyed by
// (seed, image_id, copy_index).

struct PipelineStep {
    TransformKind kind;
    std::map<std::string, double> params;
    double probability = 1.0;
};

inline void validate_pipeline_spec(const std::vector<PipelineStep>& spec) {
    for (const auto& step : spec) {
        if (!(step.probability >= 0.0 && step.probability <= 1.0)) {
            throw ValidationError(std::string(kind_name(step.kind)) +
                                  ": probability must be in [0,1]");
        }
        auto check_factor = [&](const char* name) {
            auto it = step.params.find(name);
            if (it != step.params.end() &&
                !(it->second >= kScaleFactorMin && it->second <= kScaleFactorMax)) {
                throw ValidationError("scale: " + std::string(name) +
                                      " must be in [0.5, 2.0]");
            }
        };
        switch (step.kind) {
            case TransformKind::SCALE:
                check_factor("factor");
                check_factor("factor_min");
                check_factor("factor_max");
                break;
            case TransformKind::GAUSSIAN:
            case TransformKind::MEDIAN_BLUR: {
                auto it = step.params.find("ksize");
                if (it != step.params.end() &&
                    (it->second <= 0 || std::fmod(it->second, 2.0) != 1.0)) {
                    throw ValidationError(std::string(kind_name(step.kind)) +
                                          ": ksize must be odd and positive");
                }
                break;
            }
            default:
                break;
        }
    }
}

// Pipeline spec file: JSON array of {kind, params, probability}.
inline std::vector<PipelineStep> pipeline_spec_from_json(std::string_view json_text) {
    const nlohmann::json doc = detail::parse_json_document(json_text);
    if (!doc.is_array()) throw ParseError("pipeline spec: expected a top-level array");
    std::vector<PipelineStep> spec;
    for (size_t i = 0; i < doc.size(); ++i) {
        const auto& e = doc[i];
        const std::string path = "$[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("kind") || !e["kind"].is_string()) {
            throw ParseError(path + ": expected an object with a 'kind' string");
        }
        const auto kind = kind_from_name(e["kind"].get<std::string>());
        if (!kind) {
            throw ValidationError(path + ": unknown transform kind '" +
                                  e["kind"].get<std::string>() + "'");
        }
        PipelineStep step;
        step.kind = *kind;
        if (e.contains("params")) {
            if (!e["params"].is_object()) throw ParseError(path + ".params: expected an object");
            for (const auto& [k, v] : e["params"].items()) {
                if (!v.is_number()) {
                    throw ParseError(path + ".params." + k + ": expected a number");
                }
                step.params[k] = v.get<double>();
            }
        }
        step.probability = e.value("probability", 1.0);
        spec.push_back(std::move(step));
    }
    validate_pipeline_spec(spec);
    return spec;
}

namespace detail {

inline double sample_param(const PipelineStep& step, SplitRng& rng, const char* name,
                           double fallback) {
    auto lo = step.params.find(std::string(name) + "_min");
    auto hi = step.params.find(std::string(name) + "_max");
    if (lo != step.params.end() && hi != step.params.end()) {
        return rng.uniform(lo->second, hi->second);
    }
    auto fixed = step.params.find(name);
    return fixed == step.params.end() ? fallback : fixed->second;
}

inline void apply_pipeline_step(AugmentedRecord& current, const std::string& source_id,
                                const PipelineStep& step, SplitRng& rng,
                                const Dataset& dataset,
                                const std::vector<std::string>& sorted_ids) {
    switch (step.kind) {
        case TransformKind::HFLIP: {
            auto [img, rec] = hflip(current.image);
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
        case TransformKind::VFLIP: {
            auto [img, rec] = vflip(current.image);
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
        case TransformKind::SCALE: {
            const double factor = sample_param(step, rng, "factor", 1.0);
            auto [img, rec] = scale(current.image, factor);
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
        case TransformKind::INVERT: {
            auto [img, rec] = invert(current.image, step.params.count("constant")
                                                        ? step.params.at("constant")
                                                        : 255.0);
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
        case TransformKind::SAFE_CROP: {
            auto [img, rec] = bbox_safe_crop(current.image, rng);
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
        case TransformKind::MOSAIC: {
            const auto n = static_cast<std::int64_t>(sorted_ids.size());
            const ImageRecord* partners[3];
            for (auto& partner : partners) {
                partner = &dataset.at(sorted_ids[static_cast<size_t>(rng.uniform_int(0, n - 1))]);
            }
            const std::string keep_id = current.image.image_id;
            AugmentedRecord m = mosaic(current.image, *partners[0], *partners[1],
                                       *partners[2], rng);
            m.image.image_id = keep_id;
            m.provenance.insert(m.provenance.begin(), current.provenance.begin(),
                                current.provenance.end());
            current = std::move(m);
            break;
        }
        case TransformKind::MEAN_NORM: {
            auto [img, rec] = mean_normalize(current.image);
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
        case TransformKind::GAUSSIAN: {
            auto [img, rec] = gaussian_filter(
                current.image, step.params.count("sigma") ? step.params.at("sigma") : 1.0,
                static_cast<int>(step.params.count("ksize") ? step.params.at("ksize") : 5));
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
        case TransformKind::HIST_EQ: {
            auto [img, rec] = hist_equalize(current.image);
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
        case TransformKind::HUE_CONTRAST: {
            const double dh = sample_param(step, rng, "dh", 0.0);
            const double dc = sample_param(step, rng, "dc", 0.0);
            auto [img, rec] = hue_contrast(current.image, dh, dc);
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
        case TransformKind::MEDIAN_BLUR: {
            auto [img, rec] = median_blur(
                current.image,
                static_cast<int>(step.params.count("ksize") ? step.params.at("ksize") : 3));
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
        case TransformKind::BRIGHTNESS_CONTRAST: {
            const double db = sample_param(step, rng, "db", 0.0);
            const double dc = sample_param(step, rng, "dc", 0.0);
            auto [img, rec] = brightness_contrast(current.image, db, dc);
            current.image = std::move(img);
            current.provenance.emplace_back(source_id, rec);
            break;
        }
    }
}

}  // namespace detail

// Produces `multiplier` augmented copies of every image. Each copy runs the
// steps in order, each applied with its probability; all draws come from the
// copy's own substream, so outputs are bit-identical regardless of dataset
// order or thread count. Mosaic partners are drawn from the sorted id list.
inline std::vector<AugmentedRecord> run_pipeline(const Dataset& dataset,
                                                 const std::vector<PipelineStep>& spec,
                                                 std::uint64_t seed, int multiplier,
                                                 int n_threads = 1) {
    if (multiplier < 1) throw ValidationError("multiplier must be >= 1");
    if (n_threads < 1) throw ValidationError("n_threads must be >= 1");
    validate_pipeline_spec(spec);

    std::vector<std::string> sorted_ids = dataset.image_ids();
    std::sort(sorted_ids.begin(), sorted_ids.end());

    const size_t n_jobs = dataset.size() * static_cast<size_t>(multiplier);
    std::vector<AugmentedRecord> results(n_jobs);
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const size_t job = next.fetch_add(1);
            if (job >= n_jobs || failed.load()) break;
            const size_t rec_idx = job / static_cast<size_t>(multiplier);
            const int copy = static_cast<int>(job % static_cast<size_t>(multiplier));
            const ImageRecord& src = dataset.records()[rec_idx];
            try {
                SplitRng rng =
                    SplitRng(seed).derive(src.image_id).derive(static_cast<std::uint64_t>(copy));
                AugmentedRecord current;
                current.image = src;
                current.image.image_id = src.image_id + "_aug" + std::to_string(copy);
                for (const auto& step : spec) {
                    const double gate = rng.uniform();
                    if (gate < step.probability) {
                        detail::apply_pipeline_step(current, src.image_id, step, rng,
                                                    dataset, sorted_ids);
                    }
                }
                current.image.validate();
                results[job] = std::move(current);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error_message = e.what();
            }
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw ValidationError("pipeline failed: " + error_message);
    return results;
}

}  // namespace paveval
