// Acceptance suite: one pass/fail line per criterion, non-zero exit if any
// criterion fails. Each criterion pins its stated tolerance and time budget.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "paveval/autolabel.hpp"
#include "paveval/darknet.hpp"
#include "paveval/postprocess.hpp"
#include "paveval/scoring.hpp"
#include "paveval/service.hpp"
#include "paveval/voc.hpp"

using namespace paveval;
namespace fs = std::filesystem;

namespace {

struct Checker {
    bool ok = true;
    std::string first_failure;

    void expect(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            first_failure = what;
        }
    }
};

// --- independent oracle (exhaustive rescan per step, own IoU arithmetic) ---

double oracle_iou(const BBox& a, const BBox& b) {
    const double aw = a.x_max - a.x_min, ah = a.y_max - a.y_min;
    const double bw = b.x_max - b.x_min, bh = b.y_max - b.y_min;
    const double ix = std::min(a.x_min + aw, b.x_min + bw) - std::max(a.x_min, b.x_min);
    const double iy = std::min(a.y_min + ah, b.y_min + bh) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    return inter / (aw * ah + bw * bh - inter);
}

MatchResult oracle_match(const std::vector<Annotation>& gts,
                         const std::vector<Detection>& dets, double threshold) {
    MatchResult result;
    std::vector<bool> det_done(dets.size(), false);
    std::vector<bool> gt_done(gts.size(), false);
    for (size_t step = 0; step < dets.size(); ++step) {
        int best_det = -1;
        for (size_t d = 0; d < dets.size(); ++d) {
            if (det_done[d]) continue;
            if (best_det < 0 || dets[d].confidence > dets[best_det].confidence) {
                best_det = static_cast<int>(d);
            }
        }
        det_done[best_det] = true;

        int best_gt = -1;
        double best = 0.0;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (gt_done[g] || gts[g].label != dets[best_det].label) continue;
            const double v = oracle_iou(gts[g].bbox, dets[best_det].bbox);
            if (v > best) {
                best = v;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0 && best > threshold) {
            gt_done[best_gt] = true;
            result.pairs.push_back({best_gt, best_det, best});
        } else {
            result.false_positive_dets.push_back(best_det);
        }
    }
    for (size_t g = 0; g < gts.size(); ++g) {
        if (!gt_done[g]) result.false_negative_gts.push_back(static_cast<int>(g));
    }
    std::sort(result.pairs.begin(), result.pairs.end(),
              [](const MatchedPair& a, const MatchedPair& b) {
                  return a.det_index < b.det_index;
              });
    std::sort(result.false_positive_dets.begin(), result.false_positive_dets.end());
    return result;
}

// --- shared generators ---

BBox random_box(SplitRng& rng, double extent = 100.0) {
    const double x0 = rng.uniform(0.0, extent * 0.8);
    const double y0 = rng.uniform(0.0, extent * 0.8);
    return BBox(x0, y0, x0 + rng.uniform(1.0, extent * 0.2),
                y0 + rng.uniform(1.0, extent * 0.2));
}

struct Scene {
    std::vector<Annotation> gts;
    std::vector<Detection> dets;
};

Scene random_scene(SplitRng& rng) {
    Scene s;
    const int n_gt = static_cast<int>(rng.uniform_int(0, 6));
    for (int i = 0; i < n_gt; ++i) {
        s.gts.emplace_back(random_box(rng),
                           *class_from_index(static_cast<int>(rng.uniform_int(0, 6))));
    }
    const int n_det = static_cast<int>(rng.uniform_int(0, 6));
    for (int i = 0; i < n_det; ++i) {
        // distinct confidences by construction
        const double conf = (rng.uniform(0.0, 999.0) + i * 1000.0) / 6001.0;
        if (!s.gts.empty() && rng.uniform() < 0.7) {
            const auto& base = s.gts[static_cast<size_t>(rng.uniform_int(
                0, static_cast<std::int64_t>(s.gts.size()) - 1))];
            const double dx = rng.uniform(-4.0, 4.0), dy = rng.uniform(-4.0, 4.0);
            const double x0 = std::max(0.0, base.bbox.x_min + dx);
            const double y0 = std::max(0.0, base.bbox.y_min + dy);
            s.dets.emplace_back(BBox(x0, y0, x0 + base.bbox.width(), y0 + base.bbox.height()),
                                rng.uniform() < 0.8
                                    ? base.label
                                    : *class_from_index(static_cast<int>(rng.uniform_int(0, 6))),
                                conf);
        } else {
            s.dets.emplace_back(random_box(rng),
                                *class_from_index(static_cast<int>(rng.uniform_int(0, 6))),
                                conf);
        }
    }
    return s;
}

std::vector<Detection> random_dets(SplitRng& rng, int max_n = 12) {
    std::vector<Detection> dets;
    const int n = static_cast<int>(rng.uniform_int(0, max_n));
    for (int i = 0; i < n; ++i) {
        dets.emplace_back(random_box(rng, 80.0),
                          *class_from_index(static_cast<int>(rng.uniform_int(0, 2))),
                          rng.uniform());
    }
    return dets;
}

Raster random_raster(SplitRng& rng, int w, int h) {
    Raster r(w, h);
    for (auto& v : r.data) v = static_cast<std::uint8_t>(rng.next_u64() & 0xff);
    return r;
}

ImageRecord random_pixel_record(SplitRng& rng, const std::string& id, int w, int h,
                                int boxes) {
    ImageRecord r(id, w, h);
    r.pixels = random_raster(rng, w, h);
    for (int i = 0; i < boxes; ++i) {
        const double x0 = rng.uniform(0.0, w - 10.0);
        const double y0 = rng.uniform(0.0, h - 10.0);
        r.annotations.emplace_back(
            BBox(x0, y0, x0 + rng.uniform(4.0, w - x0 - 0.5), y0 + rng.uniform(4.0, h - y0 - 0.5)),
            *class_from_index(static_cast<int>(rng.uniform_int(0, 6))));
    }
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("paveval_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// --- criteria ---

Checker criterion_table1_replay() {
    Checker c;
    const std::vector<std::pair<std::string, double>> table1 = {
        {"Ashkan", 0.8952915179330274},  {"neema", 0.76004828002414},
        {"pavers", 0.7128753180661578},  {"Taniac", 0.6584463625154131},
        {"Mistletoe", 0.6332599118942731}, {"Naç", 0.6209453197405004},
        {"Sygna", 0.6138392857142858},   {"LexIT", 0.6123280692817117},
        {"DDK", 0.5765765765765766},     {"KHS", 0.5647461494580719},
        {"Frances", 0.539119804400978},
    };

    std::vector<Team> teams;
    for (size_t i = 0; i < table1.size(); ++i) {
        teams.push_back({"team" + std::to_string(i), table1[i].first,
                         "token" + std::to_string(i)});
    }
    EvalService svc(std::nullopt, teams, fresh_dir("table1"));

    // inject in shuffled order so the ordering is earned, not inherited
    std::vector<size_t> order(table1.size());
    std::iota(order.begin(), order.end(), size_t{0});
    SplitRng rng(1);
    for (size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<size_t>(rng.uniform_int(0, i - 1))]);
    }
    for (size_t idx : order) {
        svc.inject_score("team" + std::to_string(idx), table1[idx].second, {});
    }

    httplib::Server server;
    svc.attach(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    c.expect(port > 0, "bind failed");
    std::thread th([&server]() { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client cli("127.0.0.1", port);
    auto res = cli.Get("/api/v1/leaderboard");
    server.stop();
    th.join();

    c.expect(res && res->status == 200, "GET /leaderboard failed");
    if (res) {
        const auto body = nlohmann::json::parse(res->body);
        c.expect(body.size() == table1.size(), "wrong row count");
        for (size_t i = 0; i < table1.size() && i < body.size(); ++i) {
            c.expect(body[i]["rank"] == static_cast<int>(i) + 1, "rank not contiguous");
            c.expect(body[i]["team"] == table1[i].first,
                     "row " + std::to_string(i + 1) + " is " +
                         body[i]["team"].get<std::string>() + ", expected " + table1[i].first);
            c.expect(body[i]["best_mean_f1"] == table1[i].second, "score mismatch");
        }
        // exact string reproduction of the rank-1 score
        c.expect(res->body.find("0.8952915179330274") != std::string::npos,
                 "rank-1 score not serialized as 0.8952915179330274");
    }
    return c;
}

Checker criterion_f1_conformance() {
    Checker c;
    SplitRng rng(2);
    for (int i = 0; i < 10000; ++i) {
        const long long tp = rng.uniform_int(0, 100);
        const long long fp = rng.uniform_int(0, 100);
        const long long fn = rng.uniform_int(0, 100);
        const double p = precision(tp, fp);
        const double r = recall(tp, fn);
        const double f = f1(p, r);
        const double expected = (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
        c.expect(std::fabs(f - expected) <= 1e-12, "f1 deviates from 2PR/(P+R)");
    }
    c.expect(precision(0, 0) == 0.0, "precision(0,0) != 0");
    c.expect(recall(0, 0) == 0.0, "recall(0,0) != 0");
    c.expect(f1(0.0, 0.0) == 0.0, "f1 at zero denominator != 0");
    return c;
}

Checker criterion_matching_oracle() {
    Checker c;
    SplitRng rng(3);
    for (int scene_i = 0; scene_i < 1000; ++scene_i) {
        const Scene s = random_scene(rng);
        const MatchResult lib = match(s.gts, s.dets, 0.5);
        const MatchResult orc = oracle_match(s.gts, s.dets, 0.5);
        c.expect(lib.pairs.size() == orc.pairs.size(), "pair count differs from oracle");
        for (size_t i = 0; i < std::min(lib.pairs.size(), orc.pairs.size()); ++i) {
            c.expect(lib.pairs[i].gt_index == orc.pairs[i].gt_index &&
                         lib.pairs[i].det_index == orc.pairs[i].det_index,
                     "pairing differs from oracle");
            c.expect(std::fabs(lib.pairs[i].iou - orc.pairs[i].iou) <= 1e-12,
                     "pair IoU differs from oracle");
        }
        c.expect(lib.false_positive_dets == orc.false_positive_dets, "FP set differs");
        c.expect(lib.false_negative_gts == orc.false_negative_gts, "FN set differs");

        for (int cls = 0; cls < kNumClasses; ++cls) {
            long long gt_c = 0, det_c = 0, tp = 0, fp = 0, fn = 0;
            for (const auto& g : s.gts) gt_c += g.label == static_cast<DistressClass>(cls);
            for (const auto& d : s.dets) det_c += d.label == static_cast<DistressClass>(cls);
            for (const auto& p : lib.pairs) {
                tp += s.gts[p.gt_index].label == static_cast<DistressClass>(cls);
            }
            for (int d : lib.false_positive_dets) {
                fp += s.dets[d].label == static_cast<DistressClass>(cls);
            }
            for (int g : lib.false_negative_gts) {
                fn += s.gts[g].label == static_cast<DistressClass>(cls);
            }
            c.expect(tp + fn == gt_c, "tp+fn != |GT_c|");
            c.expect(tp + fp == det_c, "tp+fp != |Det_c|");
        }
    }
    return c;
}

Checker criterion_perfect_identity() {
    Checker c;
    SplitRng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        Dataset gt;
        DetectionMap perfect;
        const int n_images = 1 + static_cast<int>(rng.uniform_int(0, 4));
        for (int i = 0; i < n_images; ++i) {
            ImageRecord record("img" + std::to_string(i), 400, 400);
            const int boxes = 1 + static_cast<int>(rng.uniform_int(0, 5));
            for (int b = 0; b < boxes; ++b) {
                const double x0 = rng.uniform(0.0, 350.0), y0 = rng.uniform(0.0, 350.0);
                record.annotations.emplace_back(
                    BBox(x0, y0, x0 + rng.uniform(2.0, 45.0), y0 + rng.uniform(2.0, 45.0)),
                    *class_from_index(static_cast<int>(rng.uniform_int(0, 6))));
            }
            for (const auto& a : record.annotations) {
                perfect[record.image_id].emplace_back(a.bbox, a.label, 1.0);
            }
            gt.add(std::move(record));
        }
        c.expect(evaluate(gt, perfect).mean_f1 == 1.0, "perfect predictions != 1.0");
        c.expect(evaluate(gt, {}).mean_f1 == 0.0, "empty predictions != 0.0");
    }
    return c;
}

Checker criterion_iou_boundary() {
    Checker c;
    const std::vector<Annotation> gts{{BBox(0, 0, 2, 1), DistressClass::Block}};
    const std::vector<Detection> at_half{{BBox(0, 0, 4, 1), DistressClass::Block, 1.0}};
    c.expect(iou(gts[0].bbox, at_half[0].bbox) == 0.5, "fixture IoU is not exactly 0.5");
    c.expect(match(gts, at_half, 0.5).pairs.empty(), "IoU == 0.5 was accepted");

    const std::vector<Detection> above{{BBox(0, 0, 4.0 - 8e-9, 1), DistressClass::Block, 1.0}};
    const double v = iou(gts[0].bbox, above[0].bbox);
    c.expect(v > 0.5 && v < 0.5 + 1e-8, "fixture IoU is not 0.5 + ~1e-9");
    c.expect(match(gts, above, 0.5).pairs.size() == 1, "IoU just above 0.5 was rejected");
    return c;
}

Checker criterion_augment_invariants() {
    Checker c;
    SplitRng rng(6);

    for (int i = 0; i < 50; ++i) {
        const int w = 16 + static_cast<int>(rng.uniform_int(0, 48));
        const int h = 16 + static_cast<int>(rng.uniform_int(0, 48));
        ImageRecord r("r", w, h);
        r.pixels = random_raster(rng, w, h);
        c.expect(*hflip(hflip(r).first).first.pixels == *r.pixels, "hflip not an involution");
        c.expect(*vflip(vflip(r).first).first.pixels == *r.pixels, "vflip not an involution");
        c.expect(*invert(invert(r).first).first.pixels == *r.pixels,
                 "invert not an involution");
    }

    int violations = 0;
    for (int seed = 0; seed < 1000; ++seed) {
        SplitRng crop_rng = SplitRng(static_cast<std::uint64_t>(seed)).derive("crop");
        const ImageRecord r =
            random_pixel_record(crop_rng, "c", 80, 60,
                                1 + static_cast<int>(crop_rng.uniform_int(0, 3)));
        const auto [img, rec] = bbox_safe_crop(r, crop_rng);
        if (img.annotations.size() != r.annotations.size()) ++violations;
        for (const auto& a : img.annotations) {
            if (a.bbox.x_min < 0 || a.bbox.y_min < 0 || a.bbox.x_max > img.width ||
                a.bbox.y_max > img.height) {
                ++violations;
            }
        }
    }
    c.expect(violations == 0,
             "bbox_safe_crop violations: " + std::to_string(violations));

    Dataset ds;
    SplitRng gen(7);
    for (int i = 0; i < 6; ++i) {
        ds.add(random_pixel_record(gen, "img" + std::to_string(i), 48, 48, 2));
    }
    const auto spec = pipeline_spec_from_json(R"([
      {"kind": "safe_crop", "probability": 0.5},
      {"kind": "hflip", "probability": 0.5},
      {"kind": "scale", "params": {"factor_min": 0.6, "factor_max": 1.7}, "probability": 0.7},
      {"kind": "mosaic", "probability": 0.4},
      {"kind": "invert", "probability": 0.5}
    ])");
    const auto run_a = run_pipeline(ds, spec, 99, 3, 1);
    const auto run_b = run_pipeline(ds, spec, 99, 3, 1);
    const auto run_c = run_pipeline(ds, spec, 99, 3, 8);
    auto same = [](const std::vector<AugmentedRecord>& x,
                   const std::vector<AugmentedRecord>& y) {
        if (x.size() != y.size()) return false;
        for (size_t i = 0; i < x.size(); ++i) {
            if (x[i].image.image_id != y[i].image.image_id) return false;
            if (!(x[i].image.pixels == y[i].image.pixels)) return false;
            if (x[i].image.annotations.size() != y[i].image.annotations.size()) return false;
            for (size_t k = 0; k < x[i].image.annotations.size(); ++k) {
                if (!(x[i].image.annotations[k] == y[i].image.annotations[k])) return false;
            }
        }
        return true;
    };
    c.expect(same(run_a, run_b), "pipeline differs between identical runs");
    c.expect(same(run_a, run_c), "pipeline differs across thread counts 1 and 8");
    return c;
}

Checker criterion_tta_laws() {
    Checker c;
    SplitRng rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        const auto dets = random_dets(rng);
        TtaBundle bundle(1);
        bundle[0].detections = dets;
        const auto fused = tta_fuse(bundle, 0.25, 0.45);
        const auto direct = nms(confidence_filter(dets, 0.25), 0.45);
        bool equal = fused.size() == direct.size();
        for (size_t i = 0; equal && i < fused.size(); ++i) equal = fused[i] == direct[i];
        c.expect(equal, "identity-bundle fusion != nms(confidence_filter(...))");
    }

    ImageRecord base("img", 120, 90);
    base.pixels = Raster(120, 90, 60);
    base.annotations.emplace_back(BBox(30, 30, 60, 60), DistressClass::Block);
    std::vector<TransformRecord> records;
    records.push_back(hflip(base).second);
    records.push_back(vflip(base).second);
    records.push_back(invert(base).second);
    records.push_back(scale(base, 1.6).second);
    records.push_back(scale(base, 0.55).second);
    records.push_back(mean_normalize(base).second);
    records.push_back(hist_equalize(base).second);
    records.push_back(hue_contrast(base, 20.0, 0.1).second);
    records.push_back(median_blur(base).second);
    records.push_back(brightness_contrast(base, 4.0, 0.05).second);
    records.push_back(gaussian_filter(base).second);
    records.push_back(bbox_safe_crop(base, rng).second);
    for (const auto& rec : records) {
        c.expect(rec.geometry_invertible, "record unexpectedly non-invertible");
        for (int i = 0; i < 100; ++i) {
            const double x0 = rng.uniform(34.0, 50.0), y0 = rng.uniform(34.0, 44.0);
            const BBox box(x0, y0, x0 + rng.uniform(1.0, 8.0), y0 + rng.uniform(1.0, 8.0));
            const auto fwd = map_box_forward(rec, box);
            if (!fwd) {
                c.expect(false, "forward map clipped a central box");
                continue;
            }
            const auto back = map_box_inverse(rec, *fwd);
            c.expect(back.has_value(), "inverse map lost a box");
            if (back) {
                c.expect(std::fabs(back->x_min - box.x_min) <= 1e-9 &&
                             std::fabs(back->y_min - box.y_min) <= 1e-9 &&
                             std::fabs(back->x_max - box.x_max) <= 1e-9 &&
                             std::fabs(back->y_max - box.y_max) <= 1e-9,
                         "forward-then-inverse drifted beyond 1e-9");
            }
        }
    }

    c.expect(standard_tta_set().size() == 10, "standard tta set is not 10 copies");
    return c;
}

Checker criterion_nms_postcondition() {
    Checker c;
    SplitRng rng(9);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto dets = random_dets(rng);
        const double threshold = 0.45;
        const auto kept = nms(dets, threshold);
        for (size_t i = 0; i < kept.size(); ++i) {
            for (size_t j = i + 1; j < kept.size(); ++j) {
                if (kept[i].label != kept[j].label) continue;
                c.expect(iou(kept[i].bbox, kept[j].bbox) < threshold,
                         "kept boxes overlap at/above the threshold");
            }
        }
        const auto again = nms(kept, threshold);
        bool equal = again.size() == kept.size();
        for (size_t i = 0; equal && i < kept.size(); ++i) equal = again[i] == kept[i];
        c.expect(equal, "nms is not idempotent");
    }
    return c;
}

Checker criterion_format_roundtrips() {
    Checker c;
    SplitRng rng(10);
    auto random_record = [&](const std::string& id) {
        const int w = static_cast<int>(rng.uniform_int(64, 2048));
        const int h = static_cast<int>(rng.uniform_int(64, 2048));
        ImageRecord r(id, w, h);
        const int boxes = static_cast<int>(rng.uniform_int(0, 8));
        for (int i = 0; i < boxes; ++i) {
            const double x0 = rng.uniform(0.0, w * 0.8);
            const double y0 = rng.uniform(0.0, h * 0.8);
            r.annotations.emplace_back(
                BBox(x0, y0, x0 + rng.uniform(0.5, (w - x0) - 0.01),
                     y0 + rng.uniform(0.5, (h - y0) - 0.01)),
                *class_from_index(static_cast<int>(rng.uniform_int(0, 6))));
        }
        return r;
    };

    for (int i = 0; i < 200; ++i) {
        const ImageRecord r = random_record("voc" + std::to_string(i));
        const ImageRecord back = parse_voc(write_voc(r), r.image_id);
        bool exact = back.width == r.width && back.height == r.height &&
                     back.annotations.size() == r.annotations.size();
        for (size_t k = 0; exact && k < r.annotations.size(); ++k) {
            exact = back.annotations[k] == r.annotations[k];
        }
        c.expect(exact, "VOC round trip not exact");
    }

    for (int i = 0; i < 200; ++i) {
        const ImageRecord r = random_record("dk" + std::to_string(i));
        const ImageRecord back = parse_darknet(write_darknet(r), r.width, r.height, r.image_id);
        const double tol = 1e-6 * std::max(r.width, r.height);
        bool within = back.annotations.size() == r.annotations.size();
        for (size_t k = 0; within && k < r.annotations.size(); ++k) {
            const BBox& a = r.annotations[k].bbox;
            const BBox& b = back.annotations[k].bbox;
            within = back.annotations[k].label == r.annotations[k].label &&
                     std::fabs(a.x_min - b.x_min) <= tol && std::fabs(a.y_min - b.y_min) <= tol &&
                     std::fabs(a.x_max - b.x_max) <= tol && std::fabs(a.y_max - b.y_max) <= tol;
        }
        c.expect(within, "DarkNet round trip beyond 1e-6-relative tolerance");
    }

    for (int i = 0; i < 200; ++i) {
        DetectionMap m;
        const int entries = static_cast<int>(rng.uniform_int(0, 10));
        for (int e = 0; e < entries; ++e) {
            const std::string id = "img" + std::to_string(rng.uniform_int(0, 5));
            const double x0 = rng.uniform(0.0, 700.0), y0 = rng.uniform(0.0, 700.0);
            m[id].emplace_back(BBox(x0, y0, x0 + rng.uniform(0.5, 90.0),
                                    y0 + rng.uniform(0.5, 90.0)),
                               *class_from_index(static_cast<int>(rng.uniform_int(0, 6))),
                               rng.uniform());
        }
        const DetectionMap back = parse_submission(write_submission(m));
        bool exact = back.size() == m.size();
        for (const auto& [id, dets] : m) {
            if (!exact) break;
            auto it = back.find(id);
            exact = it != back.end() && it->second.size() == dets.size();
            for (size_t k = 0; exact && k < dets.size(); ++k) {
                exact = it->second[k] == dets[k];
            }
        }
        c.expect(exact, "submission JSON round trip not value-exact");
    }
    return c;
}

Checker criterion_service_end_to_end() {
    Checker c;
    const fs::path dir = fresh_dir("service");

    // 3-image synthetic ground truth
    Dataset gt;
    ImageRecord img1("img1", 640, 640);
    img1.annotations.emplace_back(BBox(10, 10, 110, 110), DistressClass::Alligator);
    img1.annotations.emplace_back(BBox(200, 200, 320, 320), DistressClass::Longitudinal);
    gt.add(img1);
    ImageRecord img2("img2", 640, 640);
    img2.annotations.emplace_back(BBox(50, 50, 150, 170), DistressClass::Transverse);
    gt.add(img2);
    ImageRecord img3("img3", 640, 640);
    img3.annotations.emplace_back(BBox(30, 30, 90, 90), DistressClass::Block);
    img3.annotations.emplace_back(BBox(200, 50, 260, 110), DistressClass::Block);
    gt.add(img3);

    // perfect submission
    DetectionMap perfect;
    for (const auto& r : gt.records()) {
        for (const auto& a : r.annotations) {
            perfect[r.image_id].emplace_back(a.bbox, a.label, 1.0);
        }
    }

    // partial submission: hits, misses, a localization hit at IoU 0.6, and spurious boxes
    DetectionMap partial;
    partial["img1"].emplace_back(BBox(10, 10, 110, 110), DistressClass::Alligator, 0.9);
    partial["img2"].emplace_back(BBox(50, 50, 150, 122), DistressClass::Transverse, 0.8);
    partial["img3"].emplace_back(BBox(30, 30, 90, 90), DistressClass::Block, 0.95);
    partial["img3"].emplace_back(BBox(400, 400, 460, 460), DistressClass::Block, 0.7);
    partial["img3"].emplace_back(BBox(500, 500, 560, 560), DistressClass::Manhole, 0.6);

    // expected mean F1 via the independent oracle + the plain equations
    std::array<long long, kNumClasses> tp{}, fp{}, fn{};
    for (const auto& r : gt.records()) {
        auto it = partial.find(r.image_id);
        const std::vector<Detection> dets =
            it == partial.end() ? std::vector<Detection>{} : it->second;
        const MatchResult m = oracle_match(r.annotations, dets, 0.5);
        for (const auto& p : m.pairs) ++tp[static_cast<int>(r.annotations[p.gt_index].label)];
        for (int d : m.false_positive_dets) ++fp[static_cast<int>(dets[d].label)];
        for (int g : m.false_negative_gts) ++fn[static_cast<int>(r.annotations[g].label)];
    }
    double f1_sum = 0.0;
    int evaluated = 0;
    for (int cls = 0; cls < kNumClasses; ++cls) {
        if (tp[cls] + fn[cls] == 0 && fp[cls] == 0) continue;
        ++evaluated;
        const double p = precision(tp[cls], fp[cls]);
        const double r = recall(tp[cls], fn[cls]);
        f1_sum += f1(p, r);
    }
    const double expected_partial = evaluated == 0 ? 0.0 : f1_sum / evaluated;

    std::vector<Team> teams{{"alpha", "Alpha", "tok-alpha"}, {"beta", "Beta", "tok-beta"}};
    std::vector<LeaderboardEntry> board_before;
    {
        EvalService svc(gt, teams, dir);
        httplib::Server server;
        svc.attach(server);
        const int port = server.bind_to_any_port("127.0.0.1");
        std::thread th([&server]() { server.listen_after_bind(); });
        server.wait_until_ready();
        httplib::Client cli("127.0.0.1", port);

        auto res1 = cli.Post("/api/v1/submissions", {{"Authorization", "tok-alpha"}},
                             write_submission(perfect), "application/json");
        c.expect(res1 && res1->status == 200, "perfect POST failed");
        if (res1) {
            c.expect(nlohmann::json::parse(res1->body)["mean_f1"] == 1.0,
                     "perfect submission != 1.0");
        }

        auto res2 = cli.Post("/api/v1/submissions", {{"Authorization", "tok-beta"}},
                             write_submission(partial), "application/json");
        c.expect(res2 && res2->status == 200, "partial POST failed");
        if (res2) {
            const double got = nlohmann::json::parse(res2->body)["mean_f1"].get<double>();
            c.expect(std::fabs(got - expected_partial) <= 1e-12,
                     "partial score " + std::to_string(got) + " != oracle-expected " +
                         std::to_string(expected_partial));
        }

        auto res3 = cli.Post("/api/v1/submissions", {{"Authorization", "tok-alpha"}},
                             "{malformed", "application/json");
        c.expect(res3 && res3->status == 400, "malformed body did not 400");

        board_before = svc.leaderboard();
        server.stop();
        th.join();
    }

    // restart over the same data directory: replay must reproduce the board
    EvalService reborn(gt, teams, dir);
    const auto board_after = reborn.leaderboard();
    c.expect(board_after.size() == board_before.size(), "leaderboard size changed on replay");
    for (size_t i = 0; i < std::min(board_before.size(), board_after.size()); ++i) {
        c.expect(board_after[i].rank == board_before[i].rank &&
                     board_after[i].team == board_before[i].team &&
                     board_after[i].best_mean_f1 == board_before[i].best_mean_f1,
                 "leaderboard changed after restart");
    }
    return c;
}

Checker criterion_confusion_analog() {
    Checker c;
    Dataset ref;
    ImageRecord r("qa", 1000, 1000);
    for (int i = 0; i < 5; ++i) {
        r.annotations.emplace_back(BBox(i * 60.0, 10, i * 60.0 + 50, 55),
                                   DistressClass::Alligator);
    }
    for (int i = 0; i < 3; ++i) {
        r.annotations.emplace_back(BBox(i * 60.0, 100, i * 60.0 + 50, 150),
                                   DistressClass::Longitudinal);
    }
    ref.add(r);

    Dataset cand;
    ImageRecord cr("qa", 1000, 1000);
    for (const auto& a : ref.at("qa").annotations) {
        cr.annotations.emplace_back(a.bbox, a.label == DistressClass::Alligator
                                                ? DistressClass::Block
                                                : a.label);
    }
    cand.add(cr);

    const AnnotationConfusion result = annotation_confusion(ref, cand);
    const int alligator = static_cast<int>(DistressClass::Alligator);
    const int block = static_cast<int>(DistressClass::Block);
    long long alligator_row_total = 0;
    for (int j = 0; j < kConfusionSize; ++j) alligator_row_total += result.matrix[alligator][j];
    c.expect(alligator_row_total == 5, "alligator row mass wrong");
    c.expect(result.matrix[alligator][block] == 5,
             "alligator mass not entirely in the (Alligator, Block) cell");
    c.expect(result.matrix[alligator][alligator] == 0, "alligator diagonal not empty");
    // accuracy = diagonal / reference count = 3 correct of 8
    c.expect(result.accuracy_percent == 100.0 * 3.0 / 8.0, "accuracy formula value wrong");
    return c;
}

struct CriterionSpec {
    int id;
    const char* name;
    std::function<Checker()> run;
    double budget_seconds;
};

}  // namespace

int main() {
    const std::vector<CriterionSpec> criteria = {
        {1, "Table I leaderboard replay (exact ordering, rank-1 score string)",
         criterion_table1_replay, 10.0},
        {2, "precision/recall/F1 equation conformance (1e-12, degenerate -> 0)",
         criterion_f1_conformance, 1.0},
        {3, "greedy matcher == exhaustive oracle + conservation laws",
         criterion_matching_oracle, 5.0},
        {4, "perfect predictions -> 1.0 exactly, empty -> 0.0 exactly",
         criterion_perfect_identity, 60.0},
        {5, "IoU 0.5 rejected, 0.5 + 1e-9 accepted", criterion_iou_boundary, 60.0},
        {6, "augmentation involutions, crop containment, pipeline determinism",
         criterion_augment_invariants, 60.0},
        {7, "TTA reduction law, 1e-9 box round trips, 10-copy set",
         criterion_tta_laws, 60.0},
        {8, "NMS postcondition and idempotence", criterion_nms_postcondition, 60.0},
        {9, "format round trips (VOC exact, DarkNet 1e-6, submission value-exact)",
         criterion_format_roundtrips, 60.0},
        {10, "service end-to-end with restart replay", criterion_service_end_to_end, 60.0},
        {11, "annotation confusion analog (Alligator -> Block)",
         criterion_confusion_analog, 60.0},
    };

    int failures = 0;
    for (const auto& spec : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Checker result;
        try {
            result = spec.run();
        } catch (const std::exception& e) {
            result.ok = false;
            result.first_failure = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > spec.budget_seconds) {
            result.ok = false;
            if (result.first_failure.empty()) {
                result.first_failure = "exceeded time budget";
            }
        }
        if (result.ok) {
            std::printf("[PASS] criterion %2d: %s (%.2fs)\n", spec.id, spec.name, seconds);
        } else {
            ++failures;
            std::printf("[FAIL] criterion %2d: %s (%.2fs) -- %s\n", spec.id, spec.name,
                        seconds, result.first_failure.c_str());
        }
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
