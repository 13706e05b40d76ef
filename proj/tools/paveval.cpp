// paveval: pavement-distress detection benchmark toolkit.
//
// Subcommands: convert, split, evaluate, compare, augment, tta emit,
// tta fuse, autolabel draft, autolabel diff, qa confusion, serve.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paveval/autolabel.hpp"
#include "paveval/dataset_io.hpp"
#include "paveval/postprocess.hpp"
#include "paveval/scoring.hpp"
#include "paveval/service.hpp"

namespace fs = std::filesystem;
using namespace paveval;

namespace {

// A boxes path is either a VOC directory or a ground-truth JSON file.
Dataset load_boxes(const std::string& path) {
    if (fs::is_directory(path)) return load_voc_dir(path, false);
    return to_dataset(parse_ground_truth(detail::read_file(path)));
}

std::vector<double> parse_fractions(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(detail::parse_number(item, "--fractions"));
    }
    if (out.size() != 3) {
        throw ValidationError("--fractions expects three comma-separated values");
    }
    return out;
}

void emit(const std::string& text) { std::fputs(text.c_str(), stdout); }

struct ConvertOpts {
    std::string from, to, in, out, images;
};

void run_convert(const ConvertOpts& o) {
    Dataset ds;
    if (o.from == "voc") {
        ds = load_voc_dir(o.in, false);
    } else if (o.from == "darknet") {
        ds = load_darknet_dir(o.in, false);
    } else if (o.from == "submission") {
        const AnnotationMap boxes = parse_ground_truth(detail::read_file(o.in));
        if (o.to != "submission" && o.images.empty()) {
            throw ValidationError(
                "converting from submission JSON needs --images DIR for image sizes");
        }
        if (o.images.empty()) {
            ds = to_dataset(boxes);
        } else {
            for (const auto& [image_id, anns] : boxes) {
                const auto image_path = detail::find_image_for(o.images, image_id);
                if (!image_path) {
                    throw IoError("no image for '" + image_id + "' under " + o.images);
                }
                const auto [w, h] = read_image_size(*image_path);
                ImageRecord record(image_id, w, h);
                record.annotations = anns;
                ds.add(std::move(record));
            }
        }
    } else {
        throw ValidationError("unknown --from format '" + o.from + "'");
    }

    if (o.to == "voc" || o.to == "darknet") {
        save_dataset(o.out, ds, o.to, false);
    } else if (o.to == "submission") {
        AnnotationMap boxes;
        for (const auto& r : ds.records()) boxes[r.image_id] = r.annotations;
        detail::write_file(o.out, write_ground_truth(boxes));
    } else {
        throw ValidationError("unknown --to format '" + o.to + "'");
    }
    std::fprintf(stderr, "converted %zu images (%zu boxes)\n", ds.size(),
                 ds.annotation_count());
}

struct SplitOpts {
    std::string in, format = "voc", fractions = "0.4,0.3,0.3", out;
    std::uint64_t seed = 0;
};

void run_split(const SplitOpts& o) {
    const auto files = detail::files_with_extension(
        o.in, o.format == "voc" ? ".xml" : ".txt");
    std::vector<std::string> ids;
    for (const auto& f : files) ids.push_back(f.stem().string());

    const auto fr = parse_fractions(o.fractions);
    auto [s1, s2, s3] = split_ids(ids, fr[0], fr[1], fr[2], o.seed);

    fs::create_directories(o.out);
    const std::pair<const char*, std::vector<std::string>*> parts[] = {
        {"train1.txt", &s1}, {"train2.txt", &s2}, {"test.txt", &s3}};
    for (const auto& [name, part] : parts) {
        std::sort(part->begin(), part->end());
        std::string content;
        for (const auto& id : *part) content += id + "\n";
        detail::write_file(fs::path(o.out) / name, content);
    }
    std::fprintf(stderr, "split %zu ids into %zu/%zu/%zu\n", ids.size(), s1.size(),
                 s2.size(), s3.size());
}

struct EvaluateOpts {
    std::string gt, pred;
    double iou = 0.5;
    bool json = false;
};

void run_evaluate(const EvaluateOpts& o) {
    const Dataset gt = load_boxes(o.gt);
    const DetectionMap preds = parse_submission(detail::read_file(o.pred));
    const EvalReport report = evaluate(gt, preds, o.iou);
    if (o.json) {
        emit(report.to_json().dump(2) + "\n");
    } else {
        emit(report.to_table());
        char line[64];
        std::snprintf(line, sizeof(line), "mean_f1 %.6f\n", report.mean_f1);
        emit(line);
    }
}

struct CompareOpts {
    std::string gt;
    std::vector<std::string> preds;
    double iou = 0.5;
    bool json = false;
};

void run_compare(const CompareOpts& o) {
    const Dataset gt = load_boxes(o.gt);
    std::vector<EvalReport> reports;
    std::vector<std::string> names;
    for (const auto& path : o.preds) {
        reports.push_back(evaluate(gt, parse_submission(detail::read_file(path)), o.iou));
        names.push_back(fs::path(path).filename().string());
    }

    if (o.json) {
        nlohmann::json out = nlohmann::json::array();
        for (size_t i = 0; i < reports.size(); ++i) {
            nlohmann::json entry = reports[i].to_json();
            entry["file"] = names[i];
            out.push_back(std::move(entry));
        }
        emit(out.dump(2) + "\n");
        return;
    }

    char buf[128];
    std::string table;
    std::snprintf(buf, sizeof(buf), "%-13s", "class");
    table += buf;
    for (const auto& name : names) {
        std::snprintf(buf, sizeof(buf), " %20s", name.substr(0, 20).c_str());
        table += buf;
    }
    table += '\n';
    for (int c = 0; c < kNumClasses; ++c) {
        std::snprintf(buf, sizeof(buf), "%-13s", std::string(kClassNames[c]).c_str());
        table += buf;
        for (size_t i = 0; i < reports.size(); ++i) {
            const double f1 = reports[i].per_class[c].f1;
            if (i == 0) {
                std::snprintf(buf, sizeof(buf), " %20.6f", f1);
            } else {
                std::snprintf(buf, sizeof(buf), "  %9.6f (%+.3f)", f1,
                              f1 - reports[0].per_class[c].f1);
            }
            table += buf;
        }
        table += '\n';
    }
    std::snprintf(buf, sizeof(buf), "%-13s", "mean F1");
    table += buf;
    for (size_t i = 0; i < reports.size(); ++i) {
        if (i == 0) {
            std::snprintf(buf, sizeof(buf), " %20.6f", reports[i].mean_f1);
        } else {
            std::snprintf(buf, sizeof(buf), "  %9.6f (%+.3f)", reports[i].mean_f1,
                          reports[i].mean_f1 - reports[0].mean_f1);
        }
        table += buf;
    }
    table += '\n';
    emit(table);
}

struct AugmentOpts {
    std::string in, format = "voc", spec, out, out_format;
    std::uint64_t seed = 0;
    int multiplier = 1;
    int threads = 1;
};

void run_augment(const AugmentOpts& o) {
    const Dataset ds = load_annotation_dir(o.in, o.format, /*load_pixels=*/true);
    const auto spec = pipeline_spec_from_json(detail::read_file(o.spec));
    auto results = run_pipeline(ds, spec, o.seed, o.multiplier, o.threads);

    std::sort(results.begin(), results.end(),
              [](const AugmentedRecord& a, const AugmentedRecord& b) {
                  return a.image.image_id < b.image.image_id;
              });
    const std::string out_format = o.out_format.empty() ? o.format : o.out_format;
    fs::create_directories(o.out);
    for (const auto& rec : results) {
        save_record(o.out, rec.image, out_format, /*write_pixels=*/true);
    }
    std::fprintf(stderr, "augmented %zu images -> %zu records\n", ds.size(),
                 results.size());
}

struct TtaEmitOpts {
    std::string in, format = "images", out;
    std::uint64_t seed = 0;
};

void run_tta_emit(const TtaEmitOpts& o) {
    std::vector<ImageRecord> sources;
    if (o.format == "images") {
        std::vector<fs::path> files;
        for (const auto& ext : detail::image_extensions()) {
            auto some = detail::files_with_extension(o.in, ext);
            files.insert(files.end(), some.begin(), some.end());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            Raster px = read_image(f);
            ImageRecord record(f.stem().string(), px.width, px.height);
            record.pixels = std::move(px);
            sources.push_back(std::move(record));
        }
    } else {
        const Dataset ds = load_annotation_dir(o.in, o.format, /*load_pixels=*/true);
        for (const auto& r : ds.records()) sources.push_back(r);
        std::sort(sources.begin(), sources.end(),
                  [](const ImageRecord& a, const ImageRecord& b) {
                      return a.image_id < b.image_id;
                  });
    }

    fs::create_directories(o.out);
    for (const auto& source : sources) {
        SplitRng rng = SplitRng(o.seed).derive(source.image_id);
        const auto copies = emit_tta_copies(source, rng);
        TtaSidecar sidecar;
        sidecar.image_id = source.image_id;
        for (const auto& copy : copies) {
            const std::string file = copy.image.image_id + ".png";
            write_image(fs::path(o.out) / file, *copy.image.pixels);
            sidecar.copies.push_back({copy.image.image_id, file, copy.chain});
        }
        detail::write_file(fs::path(o.out) / (source.image_id + "__tta.json"),
                           sidecar.to_json().dump(2));
    }
    std::fprintf(stderr, "emitted %zu x 10 copies\n", sources.size());
}

struct TtaFuseOpts {
    std::string bundle, pred, out;
    double conf = kDefaultConfThreshold;
    double nms_iou = kDefaultNmsIou;
};

void run_tta_fuse(const TtaFuseOpts& o) {
    const DetectionMap by_copy = parse_submission(detail::read_file(o.pred));
    DetectionMap fused;
    for (const auto& path : detail::files_with_extension(o.bundle, ".json")) {
        if (path.filename().string().find("__tta.json") == std::string::npos) continue;
        const TtaSidecar sidecar =
            TtaSidecar::from_json(detail::parse_json_document(detail::read_file(path)));
        auto dets = fuse_from_sidecar(sidecar, by_copy, o.conf, o.nms_iou);
        if (!dets.empty()) fused[sidecar.image_id] = std::move(dets);
    }
    const std::string text = write_submission(fused);
    if (o.out.empty()) {
        emit(text + "\n");
    } else {
        detail::write_file(o.out, text);
    }
}

struct DraftOpts {
    std::string pred, out;
    double conf = kDefaultConfThreshold;
};

void run_autolabel_draft(const DraftOpts& o) {
    const Dataset drafted = draft_labels(parse_submission(detail::read_file(o.pred)), o.conf);
    AnnotationMap boxes;
    for (const auto& r : drafted.records()) boxes[r.image_id] = r.annotations;
    const std::string text = write_ground_truth(boxes);
    if (o.out.empty()) {
        emit(text + "\n");
    } else {
        detail::write_file(o.out, text);
    }
}

struct DiffOpts {
    std::string draft, corrected;
    double iou = 0.5;
    double keep_iou = 0.9;
    bool json = false;
};

void run_autolabel_diff(const DiffOpts& o) {
    const CorrectionStats stats = diff_annotations(load_boxes(o.draft),
                                                   load_boxes(o.corrected), o.iou,
                                                   o.keep_iou);
    emit(o.json ? stats.to_json().dump(2) + "\n" : stats.to_table());
}

struct QaOpts {
    std::string ref, cand;
    double iou = 0.5;
    bool json = false;
};

void run_qa_confusion(const QaOpts& o) {
    const AnnotationConfusion result =
        annotation_confusion(load_boxes(o.ref), load_boxes(o.cand), o.iou);
    emit(o.json ? result.to_json().dump(2) + "\n" : result.to_table());
}

struct ServeOpts {
    std::string gt, teams, addr = "127.0.0.1:8080", data = "paveval_data";
};

void run_serve(const ServeOpts& o) {
    std::optional<Dataset> gt;
    if (!o.gt.empty()) gt = to_dataset(parse_ground_truth(detail::read_file(o.gt)));
    const std::vector<Team> teams = parse_teams(detail::read_file(o.teams));

    const auto colon = o.addr.rfind(':');
    if (colon == std::string::npos) {
        throw ValidationError("--addr must be host:port, got '" + o.addr + "'");
    }
    const std::string host = o.addr.substr(0, colon);
    const int port = static_cast<int>(detail::parse_int(o.addr.substr(colon + 1), "--addr port"));

    EvalService service(std::move(gt), teams, o.data);
    httplib::Server server;
    service.attach(server);
    std::fprintf(stderr, "paveval service listening on %s:%d (%zu teams, gt %s)\n",
                 host.c_str(), port, teams.size(), o.gt.empty() ? "absent" : "loaded");
    if (!server.listen(host, port)) {
        throw IoError("cannot listen on " + o.addr);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pavement-distress detection benchmark toolkit"};
    app.require_subcommand(1);

    ConvertOpts convert_opts;
    auto* convert = app.add_subcommand("convert", "convert between annotation formats");
    convert->add_option("--from", convert_opts.from, "source format: voc|darknet|submission")
        ->required();
    convert->add_option("--to", convert_opts.to, "target format: voc|darknet|submission")
        ->required();
    convert->add_option("--in", convert_opts.in, "source directory or file")->required();
    convert->add_option("--out", convert_opts.out, "target directory or file")->required();
    convert->add_option("--images", convert_opts.images,
                        "image directory for sizes (submission sources)");

    SplitOpts split_opts;
    auto* split_cmd = app.add_subcommand("split", "deterministic train1/train2/test id split");
    split_cmd->add_option("--in", split_opts.in, "annotation directory")->required();
    split_cmd->add_option("--format", split_opts.format, "voc|darknet");
    split_cmd->add_option("--fractions", split_opts.fractions, "f1,f2,ftest (default 0.4,0.3,0.3)");
    split_cmd->add_option("--seed", split_opts.seed, "shuffle seed");
    split_cmd->add_option("--out", split_opts.out, "output directory for id lists")->required();

    EvaluateOpts eval_opts;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score predictions against ground truth");
    evaluate_cmd->add_option("--gt", eval_opts.gt, "ground-truth JSON file or VOC directory")
        ->required();
    evaluate_cmd->add_option("--pred", eval_opts.pred, "submission JSON file")->required();
    evaluate_cmd->add_option("--iou", eval_opts.iou, "IoU threshold (default 0.5)");
    evaluate_cmd->add_flag("--json", eval_opts.json, "emit JSON instead of a table");

    CompareOpts compare_opts;
    auto* compare_cmd = app.add_subcommand("compare", "side-by-side F1 for several prediction sets");
    compare_cmd->add_option("--gt", compare_opts.gt, "ground-truth JSON file or VOC directory")
        ->required();
    compare_cmd->add_option("--pred", compare_opts.preds, "submission JSON files")
        ->required()
        ->expected(-1);
    compare_cmd->add_option("--iou", compare_opts.iou, "IoU threshold (default 0.5)");
    compare_cmd->add_flag("--json", compare_opts.json, "emit JSON instead of a table");

    AugmentOpts augment_opts;
    auto* augment_cmd = app.add_subcommand("augment", "run an augmentation pipeline over a dataset");
    augment_cmd->add_option("--in", augment_opts.in, "input dataset directory")->required();
    augment_cmd->add_option("--format", augment_opts.format, "voc|darknet (default voc)");
    augment_cmd->add_option("--spec", augment_opts.spec, "pipeline spec JSON file")->required();
    augment_cmd->add_option("--seed", augment_opts.seed, "pipeline seed");
    augment_cmd->add_option("--multiplier", augment_opts.multiplier, "copies per image (default 1)");
    augment_cmd->add_option("--threads", augment_opts.threads, "worker threads (default 1)");
    augment_cmd->add_option("--out", augment_opts.out, "output directory")->required();
    augment_cmd->add_option("--out-format", augment_opts.out_format,
                            "output annotation format (default: input format)");

    auto* tta = app.add_subcommand("tta", "test-time augmentation tools");
    tta->require_subcommand(1);
    TtaEmitOpts tta_emit_opts;
    auto* tta_emit = tta->add_subcommand("emit", "write the 10-copy set plus sidecar records");
    tta_emit->add_option("--in", tta_emit_opts.in, "input directory")->required();
    tta_emit->add_option("--format", tta_emit_opts.format, "images|voc|darknet (default images)");
    tta_emit->add_option("--seed", tta_emit_opts.seed, "crop seed");
    tta_emit->add_option("--out", tta_emit_opts.out, "output directory")->required();

    TtaFuseOpts tta_fuse_opts;
    auto* tta_fuse_cmd = tta->add_subcommand("fuse", "fuse detector outputs over emitted copies");
    tta_fuse_cmd->add_option("--bundle", tta_fuse_opts.bundle, "directory with __tta.json sidecars")
        ->required();
    tta_fuse_cmd->add_option("--pred", tta_fuse_opts.pred,
                             "submission JSON keyed by copy ids")
        ->required();
    tta_fuse_cmd->add_option("--conf", tta_fuse_opts.conf, "confidence threshold (default 0.25)");
    tta_fuse_cmd->add_option("--nms-iou", tta_fuse_opts.nms_iou, "NMS IoU threshold (default 0.45)");
    tta_fuse_cmd->add_option("--out", tta_fuse_opts.out, "output file (default stdout)");

    auto* autolabel_cmd = app.add_subcommand("autolabel", "semi-supervised labeling tools");
    autolabel_cmd->require_subcommand(1);
    DraftOpts draft_opts;
    auto* draft_cmd = autolabel_cmd->add_subcommand("draft", "turn detections into draft annotations");
    draft_cmd->add_option("--pred", draft_opts.pred, "submission JSON file")->required();
    draft_cmd->add_option("--conf", draft_opts.conf, "confidence threshold (default 0.25)");
    draft_cmd->add_option("--out", draft_opts.out, "output JSON file (default stdout)");

    DiffOpts diff_opts;
    auto* diff_cmd = autolabel_cmd->add_subcommand("diff", "quantify human corrections to a draft");
    diff_cmd->add_option("--draft", diff_opts.draft, "draft annotations (JSON file or VOC dir)")
        ->required();
    diff_cmd->add_option("--corrected", diff_opts.corrected,
                         "corrected annotations (JSON file or VOC dir)")
        ->required();
    diff_cmd->add_option("--iou", diff_opts.iou, "match IoU threshold (default 0.5)");
    diff_cmd->add_option("--keep-iou", diff_opts.keep_iou,
                         "IoU above which a matched box counts as kept (default 0.9)");
    diff_cmd->add_flag("--json", diff_opts.json, "emit JSON instead of a table");

    auto* qa = app.add_subcommand("qa", "annotation quality analysis");
    qa->require_subcommand(1);
    QaOpts qa_opts;
    auto* qa_confusion = qa->add_subcommand("confusion", "label confusion matrix between two annotation sets");
    qa_confusion->add_option("--ref", qa_opts.ref, "reference annotations (JSON file or VOC dir)")
        ->required();
    qa_confusion->add_option("--cand", qa_opts.cand, "candidate annotations (JSON file or VOC dir)")
        ->required();
    qa_confusion->add_option("--iou", qa_opts.iou, "match IoU threshold (default 0.5)");
    qa_confusion->add_flag("--json", qa_opts.json, "emit JSON instead of a table");

    ServeOpts serve_opts;
    auto* serve_cmd = app.add_subcommand("serve", "run the submission/leaderboard service");
    serve_cmd->add_option("--gt", serve_opts.gt, "ground-truth JSON file")
        ->envname("PAVEVAL_GT");
    serve_cmd->add_option("--teams", serve_opts.teams, "teams JSON file")
        ->envname("PAVEVAL_TEAMS")
        ->required();
    serve_cmd->add_option("--addr", serve_opts.addr, "listen address host:port")
        ->envname("PAVEVAL_ADDR");
    serve_cmd->add_option("--data", serve_opts.data, "data directory for the submission log")
        ->envname("PAVEVAL_DATA");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*convert) run_convert(convert_opts);
        if (*split_cmd) run_split(split_opts);
        if (*evaluate_cmd) run_evaluate(eval_opts);
        if (*compare_cmd) run_compare(compare_opts);
        if (*augment_cmd) run_augment(augment_opts);
        if (*tta_emit) run_tta_emit(tta_emit_opts);
        if (*tta_fuse_cmd) run_tta_fuse(tta_fuse_opts);
        if (*draft_cmd) run_autolabel_draft(draft_opts);
        if (*diff_cmd) run_autolabel_diff(diff_opts);
        if (*qa_confusion) run_qa_confusion(qa_opts);
        if (*serve_cmd) run_serve(serve_opts);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
