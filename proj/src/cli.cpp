#include "boxtrack/cli.hpp"

#include "boxtrack/config_io.hpp"
#include "boxtrack/errors.hpp"
#include "boxtrack/evaluation.hpp"
#include "boxtrack/kitti_io.hpp"
#include "boxtrack/pipeline.hpp"
#include "boxtrack/scenario.hpp"
#include "boxtrack/voxelizer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>

namespace boxtrack {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Manifest {
public:
    Manifest(std::string subcommand, const std::vector<std::string>& args) {
        doc_["subcommand"] = std::move(subcommand);
        doc_["argv"] = args;
        doc_["version"] = kToolVersion;
        doc_["inputs"] = json::object();
        doc_["outputs"] = json::array();
        doc_["timings"] = json::object();
        doc_["seed"] = nullptr;
    }

    void input(const std::string& name, const std::string& path) { doc_["inputs"][name] = path; }
    void output(const fs::path& path) { doc_["outputs"].push_back(path.string()); }
    json& config() { return doc_["config"]; }
    void seed(std::uint64_t s) { doc_["seed"] = s; }
    json& extra(const std::string& key) { return doc_[key]; }

    template <typename Fn>
    auto time(const std::string& stage, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        struct Record {
            json& timings;
            std::string stage;
            std::chrono::steady_clock::time_point t0;
            ~Record() {
                timings[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
        } record{doc_["timings"], stage, t0};
        return fn();
    }

    void write(const fs::path& path) const { write_file_atomic(path, doc_.dump(2) + "\n"); }

private:
    json doc_;
};

json read_json_file(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what(), FormatError::npos, e.byte);
    }
}

OrientedBox3D parse_box(const std::string& text) {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string::npos) end = text.size();
        double value = 0.0;
        const char* first = text.data() + pos;
        const char* last = text.data() + end;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) throw InputError("bad box value in '" + text + "'");
        v.push_back(value);
        pos = end + 1;
    }
    if (v.size() != 7) throw InputError("a box needs 7 comma-separated values x,y,z,l,w,h,yaw");
    OrientedBox3D box({v[0], v[1], v[2]}, {v[3], v[4], v[5]}, v[6]);
    validate(box);
    return box;
}

Calibration load_calibration(const std::string& path, Manifest& manifest) {
    if (path.empty()) return Calibration::canonical();
    manifest.input("calib", path);
    return parse_calibration(read_file(path));
}

std::vector<FrameAnnotations> load_tracking_labels(const std::string& path, const Calibration& calib) {
    const auto records = parse_labels(read_file(path), LabelFlavor::tracking);
    return labels_to_frames(records, calib, LabelFlavor::tracking);
}

fs::path manifest_path(const std::string& flag, const fs::path& fallback) {
    return flag.empty() ? fallback : fs::path(flag);
}

fs::path beside(const fs::path& out, const char* suffix) {
    fs::path p = out;
    p += suffix;
    return p;
}

struct Options {
    // shared
    std::string manifest;
    std::string calib;
    std::string config;
    std::string out;
    std::uint64_t seed = 1;
    // voxelize
    std::string cloud;
    std::string semantic;
    std::string mode = "occupancy";
    int num_classes = 19;
    bool unlabeled_as_occupied = false;
    // srts
    std::string box_a;
    std::string box_b;
    std::string params;
    std::string metric = "srts";
    // simulate
    std::string out_dir;
    std::optional<int> num_targets;
    std::optional<int> duration;
    // track
    std::string detections;
    std::optional<double> p_detect;
    std::optional<double> clutter_intensity;
    std::optional<double> p_na_threshold;
    std::optional<double> dt;
    // eval
    std::string gt;
    std::string hyp;
    std::string matcher = "srts";
    double threshold = 0.7;
    std::string pr_csv;
    // bench
    std::size_t pairs = 1000000;
};

int cmd_voxelize(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
    Manifest m("voxelize", args);
    m.input("cloud", o.cloud);
    const Calibration calib = load_calibration(o.calib, m);
    const FeatureMode mode = feature_mode_from_string(o.mode);
    const PointCloud cloud = m.time("read", [&] { return parse_velodyne(read_file(o.cloud)); });

    std::vector<std::optional<int>> labels;
    if (mode == FeatureMode::semantic) {
        if (o.semantic.empty()) throw InputError("semantic mode needs --semantic <png>");
        m.input("semantic", o.semantic);
        const SemanticMap map = read_semantic_png(o.semantic, o.num_classes);
        labels = m.time("paint", [&] { return paint_semantics(cloud, map, calib); });
    }
    const GridSpec spec;
    VoxelizeOptions vo;
    vo.num_classes = o.num_classes;
    vo.unlabeled_as_occupied = o.unlabeled_as_occupied;
    const VoxelGrid grid = m.time("voxelize", [&] { return voxelize(cloud, labels, spec, mode, vo); });
    write_file_atomic(o.out, encode_svxl(grid));
    m.output(o.out);

    m.config() = {{"mode", std::string(to_string(mode))},
                  {"num_classes", o.num_classes},
                  {"unlabeled_as_occupied", o.unlabeled_as_occupied},
                  {"roi_min", {spec.roi_min.x(), spec.roi_min.y(), spec.roi_min.z()}},
                  {"roi_max", {spec.roi_max.x(), spec.roi_max.y(), spec.roi_max.z()}},
                  {"dims", spec.dims}};
    out << "points " << cloud.size() << ", occupied cells " << grid.nonzero_count() << "\n";
    m.write(manifest_path(o.manifest, beside(o.out, ".manifest.json")));
    return 0;
}

int cmd_srts(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
    Manifest m("srts", args);
    SrtsParams params;
    if (!o.params.empty()) {
        m.input("params", o.params);
        params = read_json_file(o.params).get<SrtsParams>();
    }
    params.validate();
    const OrientedBox3D a = parse_box(o.box_a);
    const OrientedBox3D b = parse_box(o.box_b);
    const Matcher metric = matcher_from_string(o.metric);
    const double value =
        m.time("score", [&] { return metric == Matcher::srts ? srts(a, b, params) : rotated_iou_3d(a, b); });
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f\n", value);
    out << buf;
    m.config() = {{"metric", std::string(to_string(metric))}, {"params", params}};
    m.extra("result") = value;
    m.write(manifest_path(o.manifest, "srts.manifest.json"));
    return 0;
}

int cmd_simulate(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
    Manifest m("simulate", args);
    ScenarioConfig config;
    if (!o.config.empty()) {
        m.input("config", o.config);
        config = read_json_file(o.config).get<ScenarioConfig>();
    }
    config.seed = o.seed;
    if (o.num_targets) config.num_targets = *o.num_targets;
    if (o.duration) config.duration = *o.duration;
    config.validate();
    const Calibration calib = load_calibration(o.calib, m);

    const Scenario scenario = m.time("simulate", [&] { return simulate(config); });

    std::vector<FrameAnnotations> detections(scenario.measurements.size());
    for (std::size_t f = 0; f < scenario.measurements.size(); ++f) {
        detections[f].frame = static_cast<int>(f);
        for (const auto& z : scenario.measurements[f]) {
            AnnotatedObject obj;
            obj.box = z.box();
            obj.cls = z.cls;
            obj.score = z.score;
            detections[f].objects.push_back(std::move(obj));
        }
    }

    fs::create_directories(o.out_dir);
    const fs::path dir(o.out_dir);
    const auto truth_labels = frames_to_labels(scenario.truth, calib);
    const auto det_labels = frames_to_labels(detections, calib);
    write_file_atomic(dir / "truth.txt", format_labels(truth_labels, LabelFlavor::tracking));
    write_file_atomic(dir / "detections.txt", format_labels(det_labels, LabelFlavor::tracking));
    json sidecar = config;
    write_file_atomic(dir / "scenario.json", sidecar.dump(2) + "\n");
    m.output(dir / "truth.txt");
    m.output(dir / "detections.txt");
    m.output(dir / "scenario.json");

    m.config() = sidecar;
    m.seed(config.seed);
    out << "frames " << config.duration << ", truth boxes " << truth_labels.size() << ", detections "
        << det_labels.size() << "\n";
    m.write(manifest_path(o.manifest, dir / "manifest.json"));
    return 0;
}

int cmd_track(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
    Manifest m("track", args);
    FilterConfig config;
    if (!o.config.empty()) {
        m.input("config", o.config);
        config = read_json_file(o.config).get<FilterConfig>();
    }
    if (o.p_detect) config.p_detect = *o.p_detect;
    if (o.clutter_intensity) config.clutter_intensity = *o.clutter_intensity;
    if (o.p_na_threshold) config.p_na_threshold = *o.p_na_threshold;
    if (o.dt) config.dt = *o.dt;
    config.validate();
    const Calibration calib = load_calibration(o.calib, m);
    m.input("detections", o.detections);

    const auto detections = m.time("read", [&] { return load_tracking_labels(o.detections, calib); });
    const TrackingRun result = m.time("track", [&] { return track_sequence(detections, config); });
    const auto labels = frames_to_labels(result.tracks, calib);
    write_file_atomic(o.out, format_labels(labels, LabelFlavor::tracking));
    m.output(o.out);

    m.config() = config;
    out << "frames " << detections.size() << ", track boxes " << labels.size() << "\n";
    m.write(manifest_path(o.manifest, beside(o.out, ".manifest.json")));
    return 0;
}

int cmd_eval(const std::string& eval_mode, const Options& o, const std::vector<std::string>& args,
             std::ostream& out) {
    Manifest m("eval", args);
    MatchCriterion criterion;
    criterion.matcher = matcher_from_string(o.matcher);
    criterion.threshold = o.threshold;
    if (!o.params.empty()) {
        m.input("params", o.params);
        criterion.srts = read_json_file(o.params).get<SrtsParams>();
    }
    criterion.srts.validate();
    const Calibration calib = load_calibration(o.calib, m);
    m.input("gt", o.gt);
    m.input("hyp", o.hyp);

    auto gt = load_tracking_labels(o.gt, calib);
    auto hyp = load_tracking_labels(o.hyp, calib);
    align_sequences(gt, hyp);

    json report;
    if (eval_mode == "mot") {
        const MotReport r = m.time("clear_mot", [&] { return clear_mot(gt, hyp, criterion); });
        report = {{"mode", "mot"},
                  {"mota", r.mota},
                  {"motp", r.motp},
                  {"mostly_tracked", r.mostly_tracked},
                  {"mostly_lost", r.mostly_lost},
                  {"matches", r.matches},
                  {"false_positives", r.false_positives},
                  {"misses", r.misses},
                  {"id_switches", r.id_switches},
                  {"gt_objects", r.gt_objects},
                  {"gt_trajectories", r.gt_trajectories}};
        out << format_mot_report(r);
    } else if (eval_mode == "ap") {
        const auto curve = m.time("precision_recall", [&] { return precision_recall(hyp, gt, criterion); });
        const double ap = interpolated_ap40(curve);
        report = {{"mode", "ap"}, {"ap40", ap}, {"detections", curve.size()}};
        char buf[64];
        std::snprintf(buf, sizeof(buf), "AP40            %10.6f\n", ap);
        out << buf;
        if (!o.pr_csv.empty()) {
            write_file_atomic(o.pr_csv, format_pr_csv(curve));
            m.output(o.pr_csv);
        }
    } else {
        throw InputError("unknown eval mode: " + eval_mode);
    }
    if (!o.out.empty()) {
        write_file_atomic(o.out, report.dump(2) + "\n");
        m.output(o.out);
    }
    m.config() = {{"mode", eval_mode},
                  {"matcher", std::string(to_string(criterion.matcher))},
                  {"threshold", criterion.threshold},
                  {"srts", criterion.srts}};
    m.extra("report") = report;
    m.write(manifest_path(o.manifest, o.out.empty() ? fs::path("eval.manifest.json")
                                                    : beside(o.out, ".manifest.json")));
    return 0;
}

int cmd_bench(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
    Manifest m("bench", args);
    const auto pairs = m.time("generate", [&] { return random_box_pairs(o.pairs, o.seed); });
    const BenchResult r = m.time("measure", [&] { return benchmark_metrics(pairs); });
    write_file_atomic(o.out, format_bench_csv(r));
    m.output(o.out);
    m.seed(o.seed);
    m.config() = {{"pairs", o.pairs}, {"params", SrtsParams{}}};
    m.extra("result") = {{"srts_ns", r.srts_ns}, {"iou_ns", r.iou_ns}, {"iou_over_srts", r.speedup()}};
    char buf[160];
    std::snprintf(buf, sizeof(buf), "srts %.1f ns/pair, iou %.1f ns/pair, ratio %.3f\n", r.srts_ns, r.iou_ns,
                  r.speedup());
    out << buf;
    m.write(manifest_path(o.manifest, beside(o.out, ".manifest.json")));
    return 0;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err, int depth) {
    if (depth > 0) throw InputError("a replay manifest cannot itself be a replay");
    const json doc = read_json_file(path);
    const auto it = doc.find("argv");
    if (it == doc.end() || !it->is_array()) throw FormatError(path + ": manifest has no argv array");
    std::vector<std::string> argv;
    for (const auto& a : *it) {
        if (!a.is_string()) throw FormatError(path + ": argv entries must be strings");
        argv.push_back(a.get<std::string>());
    }
    return dispatch(argv, out, err, depth + 1);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
    CLI::App app{"3D multi-object tracking toolkit", "boxtrack"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    Options o;

    auto* vox = app.add_subcommand("voxelize", "Voxelize a velodyne scan into an SVXL grid");
    vox->add_option("--cloud", o.cloud, "velodyne .bin")->required();
    vox->add_option("--calib", o.calib, "KITTI calibration file");
    vox->add_option("--semantic", o.semantic, "8-bit class-id PNG");
    vox->add_option("--mode", o.mode, "occupancy|intensity|semantic")
        ->check(CLI::IsMember({"occupancy", "intensity", "semantic"}));
    vox->add_option("--num-classes", o.num_classes);
    vox->add_flag("--unlabeled-occupied", o.unlabeled_as_occupied);
    vox->add_option("--out", o.out, "output .svxl")->required();

    auto* sc = app.add_subcommand("srts", "Score two boxes");
    sc->add_option("--box-a", o.box_a, "x,y,z,l,w,h,yaw")->required();
    sc->add_option("--box-b", o.box_b, "x,y,z,l,w,h,yaw")->required();
    sc->add_option("--params", o.params, "SRTs parameter JSON");
    sc->add_option("--metric", o.metric, "srts|iou")->check(CLI::IsMember({"srts", "iou"}));

    auto* sim = app.add_subcommand("simulate", "Generate a synthetic scenario");
    sim->add_option("--config", o.config, "scenario JSON");
    sim->add_option("--seed", o.seed);
    sim->add_option("--num-targets", o.num_targets);
    sim->add_option("--duration", o.duration);
    sim->add_option("--calib", o.calib);
    sim->add_option("--out-dir", o.out_dir)->required();

    auto* tr = app.add_subcommand("track", "Run the LMB tracker over a detection file");
    tr->add_option("--detections", o.detections, "KITTI tracking labels")->required();
    tr->add_option("--config", o.config, "filter JSON");
    tr->add_option("--calib", o.calib);
    tr->add_option("--p-detect", o.p_detect);
    tr->add_option("--clutter-intensity", o.clutter_intensity);
    tr->add_option("--p-na-threshold", o.p_na_threshold);
    tr->add_option("--dt", o.dt);
    tr->add_option("--out", o.out, "KITTI tracking labels")->required();

    std::string eval_mode = "mot";
    auto* ev = app.add_subcommand("eval", "Evaluate hypotheses against ground truth");
    ev->add_option("--mode", eval_mode, "mot|ap")->check(CLI::IsMember({"mot", "ap"}));
    ev->add_option("--gt", o.gt)->required();
    ev->add_option("--hyp", o.hyp)->required();
    ev->add_option("--matcher", o.matcher, "iou|srts")->check(CLI::IsMember({"iou", "srts"}));
    ev->add_option("--threshold", o.threshold);
    ev->add_option("--params", o.params, "SRTs parameter JSON");
    ev->add_option("--calib", o.calib);
    ev->add_option("--pr-csv", o.pr_csv, "precision/recall curve (ap mode)");
    ev->add_option("--out", o.out, "JSON report");

    auto* be = app.add_subcommand("bench", "Time srts against rotated IoU");
    be->add_option("--pairs", o.pairs);
    be->add_option("--seed", o.seed);
    be->add_option("--out", o.out, "CSV")->required();

    std::string replay_path;
    auto* rp = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    rp->add_option("--manifest", replay_path)->required();

    for (auto* sub : {vox, sc, sim, tr, ev, be}) sub->add_option("--manifest", o.manifest, "manifest path");

    std::vector<const char*> argv{"boxtrack"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return 1;
    }

    if (vox->parsed()) return cmd_voxelize(o, args, out);
    if (sc->parsed()) return cmd_srts(o, args, out);
    if (sim->parsed()) return cmd_simulate(o, args, out);
    if (tr->parsed()) return cmd_track(o, args, out);
    if (ev->parsed()) return cmd_eval(eval_mode, o, args, out);
    if (be->parsed()) return cmd_bench(o, args, out);
    return cmd_replay(replay_path, out, err, depth);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err, 0);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    return run(args, std::cout, std::cerr);
}

}  // namespace boxtrack
