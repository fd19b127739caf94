// fusecat command-line tool: feature extraction, fusion, classification,
// keyframe planning and the throughput benchmark.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fusecat/bench.hpp"
#include "fusecat/descriptor_io.hpp"
#include "fusecat/extract.hpp"
#include "fusecat/fusion.hpp"
#include "fusecat/manifest.hpp"
#include "fusecat/model_io.hpp"
#include "fusecat/presets.hpp"
#include "fusecat/svm.hpp"
#include "fusecat/threading.hpp"
#include "fusecat/video.hpp"

using namespace fusecat;
using nlohmann::json;

namespace {

struct ShapesArgs {
    std::string preset_name;
    int scale = 0;
    bool as_json = false;
};

int run_shapes(const ShapesArgs& a) {
    const NetworkSpec net = preset(a.preset_name, a.scale);
    const ShapeMap shapes = infer_shapes(net);
    json rows = json::array();
    for (const LayerSpec& l : net.layers) {
        const Shape3& s = shapes.at(l.name);
        const int64_t linear = static_cast<int64_t>(s.channels) * s.height * s.width;
        if (a.as_json) {
            rows.push_back({{"name", l.name},
                            {"channels", s.channels},
                            {"height", s.height},
                            {"width", s.width},
                            {"linear", linear},
                            {"pooled", s.channels}});
        } else {
            std::printf("%s %dx%dx%d linear=%lld pooled=%d\n", l.name.c_str(), s.channels,
                        s.height, s.width, static_cast<long long>(linear), s.channels);
        }
    }
    if (a.as_json)
        std::printf("%s\n", rows.dump(2).c_str());
    return 0;
}

struct MakeModelArgs {
    std::string preset_name;
    int scale = 0;
    uint64_t seed = 42;
    std::string out;
    std::vector<float> means;
    std::string resize = "warp";
};

int run_make_model(const MakeModelArgs& a) {
    Model m = make_preset_model(a.preset_name, a.scale, a.seed);
    if (!a.means.empty()) {
        if (a.means.size() != 3)
            throw error("--means needs exactly three values");
        m.preprocess.channel_means = {a.means[0], a.means[1], a.means[2]};
    }
    m.preprocess.resize =
        a.resize == "crop" ? ResizeMode::shorter_side_center_crop : ResizeMode::warp;
    save_model(a.out, m);
    std::printf("wrote %s (%s@%d, %zu weighted layers)\n", a.out.c_str(),
                m.net.meta.arch.c_str(), m.net.in_height, m.weights.entries.size());
    return 0;
}

struct ExtractArgs {
    std::string model_path;
    std::string preset_name;
    int scale = 0;
    uint64_t seed = 42;
    std::string manifest_path;
    std::string split = "all";
    std::string frames_path;
    std::string video_labels_path;
    std::string aggregate = "mean";
    std::string taps;
    int fuse_layers = 0;
    std::string out;
    int threads = default_thread_count();
    bool per_block = false;
};

Model load_model_arg(const std::string& model_path, const std::string& preset_name, int scale,
                     uint64_t seed) {
    if (!model_path.empty())
        return load_model(model_path);
    if (preset_name.empty())
        throw error("either --model or --preset/--scale is required");
    return make_preset_model(preset_name, scale, seed);
}

int run_extract(const ExtractArgs& a) {
    const Model model = load_model_arg(a.model_path, a.preset_name, a.scale, a.seed);
    const std::vector<TapSpec> taps =
        a.taps.empty() && a.fuse_layers == 0
            ? std::vector<TapSpec>{{model.net.feature_tap, model.net.feature_pool}}
            : resolve_taps(model.net, a.taps, a.fuse_layers);

    if (!a.manifest_path.empty()) {
        std::vector<ManifestEntry> entries = load_manifest(a.manifest_path);
        if (a.split != "all") {
            std::erase_if(entries,
                          [&](const ManifestEntry& e) { return e.split != a.split; });
        }
        if (entries.empty())
            throw error("empty manifest: no records match split '" + a.split + "'");
        const auto items = items_from_manifest(a.manifest_path, entries);
        const DescriptorSet set =
            extract_batch(model, taps, items, a.threads, {true, a.per_block});
        save_descriptors(a.out, set);
        std::printf("wrote %s rows=%lld dim=%lld\n", a.out.c_str(),
                    static_cast<long long>(set.rows()), static_cast<long long>(set.dim()));
        return 0;
    }

    if (a.frames_path.empty())
        throw error("either --manifest or --frames is required");

    const std::vector<FrameEntry> frames = load_frame_manifest(a.frames_path);
    if (frames.empty())
        throw error("empty manifest: no frame records");
    const auto items = items_from_frames(a.frames_path, frames);
    const DescriptorSet per_frame =
        extract_batch(model, taps, items, a.threads, {true, a.per_block});

    std::map<std::string, std::string> video_label;
    if (!a.video_labels_path.empty())
        for (const VideoLabel& v : load_video_labels(a.video_labels_path))
            video_label[v.video_id] = v.label;

    if (a.aggregate == "none") {
        DescriptorSet set = per_frame;
        if (!video_label.empty()) {
            set.labels.clear();
            for (const FrameEntry& f : frames)
                set.labels.push_back(video_label.count(f.video_id) ? video_label[f.video_id]
                                                                   : "");
        }
        save_descriptors(a.out, set);
        std::printf("wrote %s rows=%lld dim=%lld (per-frame)\n", a.out.c_str(),
                    static_cast<long long>(set.rows()), static_cast<long long>(set.dim()));
        return 0;
    }

    const FrameAggregation how =
        a.aggregate == "max" ? FrameAggregation::max : FrameAggregation::mean;
    // Group rows by video in first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<int64_t>> rows_by_video;
    for (int64_t i = 0; i < per_frame.rows(); ++i) {
        const std::string& vid = frames[static_cast<size_t>(i)].video_id;
        if (!rows_by_video.count(vid))
            order.push_back(vid);
        rows_by_video[vid].push_back(i);
    }

    DescriptorSet set;
    set.values = Matrix(0, per_frame.dim());
    set.provenance = per_frame.provenance;
    for (const std::string& vid : order) {
        std::vector<Descriptor> members;
        for (int64_t row : rows_by_video[vid]) {
            Descriptor d;
            d.values.assign(per_frame.values.row(row),
                            per_frame.values.row(row) + per_frame.dim());
            members.push_back(std::move(d));
        }
        const Descriptor agg = aggregate_video(members, how);
        set.values.data.insert(set.values.data.end(), agg.values.begin(), agg.values.end());
        ++set.values.rows;
        set.ids.push_back(vid);
        if (!video_label.empty())
            set.labels.push_back(video_label.count(vid) ? video_label[vid] : "");
    }
    save_descriptors(a.out, set);
    std::printf("wrote %s rows=%lld dim=%lld (videos)\n", a.out.c_str(),
                static_cast<long long>(set.rows()), static_cast<long long>(set.dim()));
    return 0;
}

std::vector<std::string> labels_for(const DescriptorSet& set, const std::string& labels_path) {
    if (!labels_path.empty()) {
        std::ifstream in(labels_path);
        if (!in)
            throw error("cannot open labels file '" + labels_path + "'");
        std::vector<std::string> labels;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            labels.push_back(line);
        }
        while (!labels.empty() && labels.back().empty())
            labels.pop_back();
        if (static_cast<int64_t>(labels.size()) != set.rows())
            throw error("labels file has " + std::to_string(labels.size()) + " lines, need " +
                        std::to_string(set.rows()));
        return labels;
    }
    if (set.labels.empty())
        throw error("descriptor file carries no labels; pass --labels");
    return set.labels;
}

struct TrainArgs {
    std::string in;
    std::string out;
    std::string labels_path;
    float C = 1.0f;
    bool grid = false;
    double tol = 1e-3;
    int max_sweeps = 1000;
    uint64_t seed = 42;
    int threads = default_thread_count();
};

int run_train(const TrainArgs& a) {
    const DescriptorSet set = load_descriptors(a.in);
    const std::vector<std::string> labels = labels_for(set, a.labels_path);

    TrainOptions opts;
    opts.C = a.C;
    opts.tolerance = a.tol;
    opts.max_sweeps = a.max_sweeps;
    opts.seed = a.seed;
    opts.threads = a.threads;
    if (a.grid) {
        opts.C = grid_search_c(set.values, labels, opts);
        std::printf("grid search picked C=%g\n", opts.C);
    }
    const SvmModel model = train(set.values, labels, opts);
    save_svm(a.out, model);
    std::printf("wrote %s (%lld classes, dim %lld)\n", a.out.c_str(),
                static_cast<long long>(model.num_classes()),
                static_cast<long long>(model.dim()));
    return 0;
}

struct EvalArgs {
    std::string model_path;
    std::string in;
    std::string labels_path;
    std::string save_scores;
    bool as_json = false;
    bool vote_by_group = false;
};

json evaluation_to_json(const Evaluation& ev, const SvmModel& model) {
    json j;
    j["mean_per_class_accuracy"] = ev.mean_per_class_accuracy;
    j["sample_accuracy"] = ev.sample_accuracy;
    json per_class = json::object();
    for (size_t c = 0; c < model.labels.size(); ++c)
        per_class[model.labels[c]] = ev.per_class_recall[c];
    j["per_class_recall"] = per_class;
    j["confusion"] = ev.confusion;
    j["classes"] = model.labels;
    return j;
}

int run_eval(const EvalArgs& a) {
    const SvmModel model = load_svm(a.model_path);
    const DescriptorSet set = load_descriptors(a.in);

    if (!a.save_scores.empty()) {
        DescriptorSet scores;
        scores.values = decision_scores(model, set.values);
        scores.ids = set.ids;
        scores.labels = set.labels;
        scores.groups = set.groups;
        scores.classes = model.labels;
        scores.provenance.model_code = set.provenance.model_code;
        save_descriptors(a.save_scores, scores);
        std::printf("wrote scores to %s\n", a.save_scores.c_str());
    }

    if (a.vote_by_group) {
        if (set.groups.empty())
            throw error("--vote-by-group needs per-row group ids in the descriptor file");
        const std::vector<std::string> labels = labels_for(set, a.labels_path);
        const std::vector<int> preds = predict(model, set.values);
        // Majority vote per group, ties to the lowest class index.
        std::vector<std::string> order;
        std::map<std::string, std::vector<int64_t>> rows;
        for (int64_t i = 0; i < set.rows(); ++i) {
            if (!rows.count(set.groups[static_cast<size_t>(i)]))
                order.push_back(set.groups[static_cast<size_t>(i)]);
            rows[set.groups[static_cast<size_t>(i)]].push_back(i);
        }
        int64_t correct = 0;
        for (const std::string& g : order) {
            std::vector<int> votes(static_cast<size_t>(model.num_classes()), 0);
            for (int64_t i : rows[g])
                ++votes[static_cast<size_t>(preds[static_cast<size_t>(i)])];
            const int winner = static_cast<int>(
                std::max_element(votes.begin(), votes.end()) - votes.begin());
            const int truth = model.class_index(labels[static_cast<size_t>(rows[g][0])]);
            correct += winner == truth;
        }
        const double acc = 100.0 * static_cast<double>(correct) /
                           static_cast<double>(order.size());
        if (a.as_json)
            std::printf("%s\n", json{{"group_vote_accuracy", acc},
                                     {"groups", order.size()}}
                                    .dump(2)
                                    .c_str());
        else
            std::printf("group-vote accuracy: %.4f%% over %zu groups\n", acc, order.size());
        return 0;
    }

    const std::vector<std::string> labels = labels_for(set, a.labels_path);
    const Evaluation ev = evaluate(model, set.values, labels);
    if (a.as_json) {
        std::printf("%s\n", evaluation_to_json(ev, model).dump(2).c_str());
    } else {
        std::printf("mean per-class accuracy: %.4f%%\n", ev.mean_per_class_accuracy);
        std::printf("sample accuracy:         %.4f%%\n", ev.sample_accuracy);
        for (size_t c = 0; c < model.labels.size(); ++c)
            std::printf("  %-20s %.4f%%\n", model.labels[c].c_str(), ev.per_class_recall[c]);
    }
    return 0;
}

struct FuseArgs {
    std::string plan;
    std::vector<std::string> in;
    std::vector<float> weights;
    std::string manifest_path;
    std::string out;
    uint64_t seed = 42;
    int threads = default_thread_count();
    bool as_json = false;
};

int fuse_early_files(const FuseArgs& a) {
    if (a.in.size() < 2)
        throw error("early fusion needs at least two descriptor files");
    std::vector<DescriptorSet> sets;
    for (const std::string& path : a.in)
        sets.push_back(load_descriptors(path));
    const int64_t rows = sets[0].rows();
    for (const DescriptorSet& s : sets)
        if (s.rows() != rows)
            throw error("descriptor files disagree on row count");
    for (const DescriptorSet& s : sets)
        if (!s.ids.empty() && !sets[0].ids.empty() && s.ids != sets[0].ids)
            throw error("descriptor files describe different inputs (id mismatch)");

    DescriptorSet out;
    int64_t dim = 0;
    for (const DescriptorSet& s : sets)
        dim += s.dim();
    out.values = Matrix(rows, dim);
    for (int64_t i = 0; i < rows; ++i) {
        float* dst = out.values.row(i);
        for (const DescriptorSet& s : sets) {
            std::copy(s.values.row(i), s.values.row(i) + s.dim(), dst);
            dst += s.dim();
        }
    }
    out.ids = sets[0].ids;
    out.labels = sets[0].labels;
    out.groups = sets[0].groups;
    for (const DescriptorSet& s : sets) {
        if (!out.provenance.model_code.empty())
            out.provenance.model_code += "+";
        out.provenance.model_code += s.provenance.model_code;
        for (const TapSpec& t : s.provenance.taps)
            out.provenance.taps.push_back({s.provenance.model_code + "/" + t.layer, t.mode});
    }
    save_descriptors(a.out, out);
    std::printf("wrote %s rows=%lld dim=%lld\n", a.out.c_str(),
                static_cast<long long>(out.rows()), static_cast<long long>(out.dim()));
    return 0;
}

int fuse_late_files(const FuseArgs& a) {
    if (a.in.size() < 2)
        throw error("late fusion needs at least two score files");
    std::vector<DescriptorSet> sets;
    for (const std::string& path : a.in)
        sets.push_back(load_descriptors(path));
    for (const DescriptorSet& s : sets)
        if (!s.classes.empty() && !sets[0].classes.empty() && s.classes != sets[0].classes)
            throw error("score files disagree on class lists");

    std::vector<Matrix> scores;
    for (const DescriptorSet& s : sets)
        scores.push_back(s.values);
    const LateFusionResult fused = late_fuse(scores, a.weights);

    const std::vector<std::string>& classes = sets[0].classes;
    std::ostringstream lines;
    for (int64_t i = 0; i < fused.fused_scores.rows; ++i) {
        const std::string id =
            sets[0].ids.empty() ? std::to_string(i) : sets[0].ids[static_cast<size_t>(i)];
        const int p = fused.predictions[static_cast<size_t>(i)];
        const std::string name =
            classes.empty() ? std::to_string(p) : classes[static_cast<size_t>(p)];
        lines << id << "\t" << name << "\n";
    }
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out)
            throw error("cannot open '" + a.out + "' for writing");
        out << lines.str();
    }

    double accuracy = -1.0;
    if (!sets[0].labels.empty() && !classes.empty()) {
        // Mean per-class accuracy of the fused predictions.
        std::map<std::string, int64_t> per_class_total, per_class_hit;
        for (int64_t i = 0; i < fused.fused_scores.rows; ++i) {
            const std::string& truth = sets[0].labels[static_cast<size_t>(i)];
            ++per_class_total[truth];
            const int p = fused.predictions[static_cast<size_t>(i)];
            if (classes[static_cast<size_t>(p)] == truth)
                ++per_class_hit[truth];
        }
        double sum = 0.0;
        for (const auto& [cls, total] : per_class_total)
            sum += 100.0 * static_cast<double>(per_class_hit[cls]) /
                   static_cast<double>(total);
        accuracy = sum / static_cast<double>(per_class_total.size());
    }

    if (a.as_json) {
        json j;
        j["rows"] = fused.fused_scores.rows;
        j["models"] = a.in.size();
        if (accuracy >= 0.0)
            j["mean_per_class_accuracy"] = accuracy;
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("late-fused %zu models over %lld samples\n", a.in.size(),
                    static_cast<long long>(fused.fused_scores.rows));
        if (accuracy >= 0.0)
            std::printf("mean per-class accuracy: %.4f%%\n", accuracy);
    }
    return 0;
}

int run_fuse(const FuseArgs& a) {
    FusionMode mode;
    FusionPlan plan;
    if (a.plan == "early") {
        mode = FusionMode::early;
    } else if (a.plan == "late") {
        mode = FusionMode::late;
    } else if (a.plan == "layer") {
        throw error("layer fusion needs a plan file naming the model and layer count");
    } else {
        plan = load_fusion_plan(a.plan);
        mode = plan.mode;
    }

    if (!a.in.empty()) {
        FuseArgs args = a;
        if (mode == FusionMode::early)
            return fuse_early_files(args);
        if (mode == FusionMode::late)
            return fuse_late_files(args);
        throw error("layer fusion works on a manifest, not descriptor files");
    }

    // Full pipeline from a plan file: members are model files.
    if (plan.members.empty())
        throw error("fusion plan has no members; pass --in files or a plan file");
    if (a.manifest_path.empty())
        throw error("running a plan end-to-end needs --manifest");
    std::vector<ManifestEntry> entries = load_manifest(a.manifest_path);
    if (entries.empty())
        throw error("empty manifest");
    const auto items = items_from_manifest(a.manifest_path, entries);

    std::vector<DescriptorSet> sets;
    for (const FusionMember& member : plan.members) {
        const Model model = load_model(member.model_ref);
        std::vector<TapSpec> taps = member.taps;
        if (plan.mode == FusionMode::layer)
            taps = fusion_tap_selection(model.net, plan.layer_count);
        else if (taps.empty())
            taps = {{model.net.feature_tap, model.net.feature_pool}};
        sets.push_back(extract_batch(model, taps, items, a.threads));
    }

    if (plan.mode == FusionMode::layer) {
        save_descriptors(a.out, sets[0]);
        std::printf("wrote %s rows=%lld dim=%lld\n", a.out.c_str(),
                    static_cast<long long>(sets[0].rows()),
                    static_cast<long long>(sets[0].dim()));
        return 0;
    }
    if (plan.mode == FusionMode::late)
        throw error("late fusion consumes score files; run eval --save-scores per model first");

    // Early fusion of the freshly extracted sets via temporary files is
    // pointless; concatenate in memory.
    FuseArgs args = a;
    DescriptorSet out;
    int64_t dim = 0;
    for (const DescriptorSet& s : sets)
        dim += s.dim();
    out.values = Matrix(sets[0].rows(), dim);
    for (int64_t i = 0; i < out.values.rows; ++i) {
        float* dst = out.values.row(i);
        for (const DescriptorSet& s : sets) {
            std::copy(s.values.row(i), s.values.row(i) + s.dim(), dst);
            dst += s.dim();
        }
    }
    out.ids = sets[0].ids;
    out.labels = sets[0].labels;
    for (const DescriptorSet& s : sets) {
        if (!out.provenance.model_code.empty())
            out.provenance.model_code += "+";
        out.provenance.model_code += s.provenance.model_code;
    }
    save_descriptors(args.out, out);
    std::printf("wrote %s rows=%lld dim=%lld\n", args.out.c_str(),
                static_cast<long long>(out.rows()), static_cast<long long>(out.dim()));
    return 0;
}

struct KeyframesArgs {
    double duration = -1.0;
    std::string durations_path;
    double interval = 2.0;
    double offset = 0.0;
    int64_t max_frames = 0;
    bool as_json = false;
};

int run_keyframes(const KeyframesArgs& a) {
    KeyframePlan plan;
    plan.interval_seconds = a.interval;
    plan.offset_seconds = a.offset;
    if (a.max_frames > 0)
        plan.max_frames = a.max_frames;

    auto format = [](const std::vector<double>& ts) {
        std::ostringstream out;
        for (size_t i = 0; i < ts.size(); ++i) {
            if (i)
                out << ",";
            out << ts[i];
        }
        return out.str();
    };

    if (!a.durations_path.empty()) {
        std::ifstream in(a.durations_path);
        if (!in)
            throw error("cannot open '" + a.durations_path + "'");
        json all = json::array();
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty())
                continue;
            const size_t tab = line.find('\t');
            if (tab == std::string::npos)
                throw error("durations line " + std::to_string(lineno) +
                            ": expected id<TAB>seconds");
            const std::string id = line.substr(0, tab);
            const double duration = std::stod(line.substr(tab + 1));
            const std::vector<double> ts = sample_timestamps(duration, plan);
            if (a.as_json)
                all.push_back({{"id", id}, {"timestamps", ts}});
            else
                std::printf("%s\t%zu\t%s\n", id.c_str(), ts.size(), format(ts).c_str());
        }
        if (a.as_json)
            std::printf("%s\n", all.dump(2).c_str());
        return 0;
    }

    if (a.duration < 0.0)
        throw error("pass --duration or --durations");
    const std::vector<double> ts = sample_timestamps(a.duration, plan);
    if (a.as_json)
        std::printf("%s\n", json(ts).dump().c_str());
    else
        std::printf("%zu\t%s\n", ts.size(), format(ts).c_str());
    return 0;
}

struct BenchArgs {
    std::string model_path;
    std::string preset_name;
    int scale = 0;
    int iterations = 10;
    int warmup = 2;
    int threads = default_thread_count();
    uint64_t seed = 42;
    bool as_json = false;
    bool per_layer = false;
};

int run_bench(const BenchArgs& a) {
    const Model model = load_model_arg(a.model_path, a.preset_name, a.scale, a.seed);
    const BenchReport r = bench(model, a.iterations, a.warmup, a.threads, a.seed);
    if (a.as_json) {
        json j;
        j["code_name"] = r.code_name;
        j["arch"] = r.arch;
        j["scale"] = r.scale;
        j["frames"] = r.frames_processed;
        j["wall_seconds"] = r.wall_seconds;
        j["fps"] = r.fps;
        j["median_fps"] = r.median_fps;
        j["mean_fps"] = r.mean_fps;
        j["cpu"] = r.cpu;
        j["threads"] = r.threads;
        json layers = json::array();
        for (const LayerTimeEntry& lt : r.layer_seconds)
            layers.push_back({{"name", lt.name}, {"seconds", lt.seconds}});
        j["layers"] = layers;
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("%-6s %-10s scale=%-4d frames=%-5lld wall=%.3fs fps=%.2f median_fps=%.2f "
                    "mean_fps=%.2f threads=%d\n",
                    r.code_name.c_str(), r.arch.c_str(), r.scale,
                    static_cast<long long>(r.frames_processed), r.wall_seconds, r.fps,
                    r.median_fps, r.mean_fps, r.threads);
        std::printf("cpu: %s\n", r.cpu.c_str());
        if (a.per_layer)
            for (const LayerTimeEntry& lt : r.layer_seconds)
                std::printf("  %-28s %9.4fs\n", lt.name.c_str(), lt.seconds);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fusecat: CNN feature extraction, fusion and classification toolkit"};
    app.require_subcommand(1);

    ShapesArgs shapes_args;
    CLI::App* shapes = app.add_subcommand("shapes", "Print per-layer dimensions of a preset");
    shapes->add_option("--preset", shapes_args.preset_name, "Architecture preset")->required();
    shapes->add_option("--scale", shapes_args.scale, "Input scale in pixels")->required();
    shapes->add_flag("--json", shapes_args.as_json, "Emit JSON");

    MakeModelArgs mm_args;
    CLI::App* mm = app.add_subcommand("make-model", "Write a preset model file (.fcm)");
    mm->add_option("--preset", mm_args.preset_name, "Architecture preset")->required();
    mm->add_option("--scale", mm_args.scale, "Input scale in pixels")->required();
    mm->add_option("--seed", mm_args.seed, "Weight init seed");
    mm->add_option("--out", mm_args.out, "Output path")->required();
    mm->add_option("--means", mm_args.means, "Channel means (three values)");
    mm->add_option("--resize", mm_args.resize, "Resize mode: warp|crop");

    ExtractArgs ex_args;
    CLI::App* ex = app.add_subcommand("extract", "Extract descriptors for a manifest");
    ex->add_option("--model", ex_args.model_path, "Model file (.fcm)");
    ex->add_option("--preset", ex_args.preset_name, "Preset instead of --model");
    ex->add_option("--scale", ex_args.scale, "Preset scale");
    ex->add_option("--seed", ex_args.seed, "Weight seed when using --preset");
    ex->add_option("--manifest", ex_args.manifest_path, "Image manifest (path/label/split)");
    ex->add_option("--split", ex_args.split, "Manifest split: train|test|all");
    ex->add_option("--frames", ex_args.frames_path, "Video frame manifest");
    ex->add_option("--video-labels", ex_args.video_labels_path, "Video label table");
    ex->add_option("--aggregate", ex_args.aggregate, "Frame aggregation: mean|max|none");
    ex->add_option("--taps", ex_args.taps, "Tap list, e.g. conv1:max,fc7:flat");
    ex->add_option("--fuse-layers", ex_args.fuse_layers, "Ground-up layer fusion count");
    ex->add_option("--out", ex_args.out, "Output descriptor file")->required();
    ex->add_option("--threads", ex_args.threads, "Worker threads");
    ex->add_flag("--per-block-norm", ex_args.per_block, "L2-normalize each tap block");

    TrainArgs tr_args;
    CLI::App* tr = app.add_subcommand("train", "Train a one-vs-rest linear SVM");
    tr->add_option("--in", tr_args.in, "Descriptor file")->required();
    tr->add_option("--out", tr_args.out, "Output SVM file (.fsv)")->required();
    tr->add_option("--labels", tr_args.labels_path, "Label file (one per row)");
    tr->add_option("-C,--C", tr_args.C, "SVM cost parameter");
    tr->add_flag("--grid", tr_args.grid, "Grid-search C over {0.01,0.1,1,10}");
    tr->add_option("--tol", tr_args.tol, "Projected-gradient tolerance");
    tr->add_option("--max-sweeps", tr_args.max_sweeps, "Sweep cap");
    tr->add_option("--seed", tr_args.seed, "Permutation seed");
    tr->add_option("--threads", tr_args.threads, "Per-class training threads");

    EvalArgs ev_args;
    CLI::App* ev = app.add_subcommand("eval", "Evaluate an SVM on descriptors");
    ev->add_option("--model", ev_args.model_path, "SVM file (.fsv)")->required();
    ev->add_option("--in", ev_args.in, "Descriptor file")->required();
    ev->add_option("--labels", ev_args.labels_path, "Label file (one per row)");
    ev->add_option("--save-scores", ev_args.save_scores, "Write decision scores");
    ev->add_flag("--json", ev_args.as_json, "Emit JSON");
    ev->add_flag("--vote-by-group", ev_args.vote_by_group,
                 "Majority-vote per group (per-frame video eval)");

    FuseArgs fu_args;
    CLI::App* fu = app.add_subcommand("fuse", "Early/late fusion of descriptors or scores");
    fu->add_option("--plan", fu_args.plan, "early | late | plan file")->required();
    fu->add_option("--in", fu_args.in, "Descriptor or score files");
    fu->add_option("--weights", fu_args.weights, "Late fusion weights (sum to 1)");
    fu->add_option("--manifest", fu_args.manifest_path, "Manifest for plan-file pipelines");
    fu->add_option("--out", fu_args.out, "Output file");
    fu->add_option("--seed", fu_args.seed, "Seed for plan-file pipelines");
    fu->add_option("--threads", fu_args.threads, "Worker threads");
    fu->add_flag("--json", fu_args.as_json, "Emit JSON");

    KeyframesArgs kf_args;
    CLI::App* kf = app.add_subcommand("keyframes", "Plan keyframe timestamps");
    kf->add_option("--duration", kf_args.duration, "Clip duration in seconds");
    kf->add_option("--durations", kf_args.durations_path, "File of id<TAB>seconds lines");
    kf->add_option("--interval", kf_args.interval, "Sampling interval in seconds");
    kf->add_option("--offset", kf_args.offset, "First-frame offset in seconds");
    kf->add_option("--max-frames", kf_args.max_frames, "Cap on frames per clip");
    kf->add_flag("--json", kf_args.as_json, "Emit JSON");

    BenchArgs be_args;
    CLI::App* be = app.add_subcommand("bench", "Throughput benchmark");
    be->add_option("--model", be_args.model_path, "Model file (.fcm)");
    be->add_option("--preset", be_args.preset_name, "Preset instead of --model");
    be->add_option("--scale", be_args.scale, "Preset scale");
    be->add_option("--iterations", be_args.iterations, "Timed frames");
    be->add_option("--warmup", be_args.warmup, "Untimed warmup frames");
    be->add_option("--threads", be_args.threads, "Worker threads");
    be->add_option("--seed", be_args.seed, "Weight/input seed");
    be->add_flag("--json", be_args.as_json, "Emit JSON");
    be->add_flag("--per-layer", be_args.per_layer, "Print the per-layer breakdown");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    }

    try {
        if (shapes->parsed())
            return run_shapes(shapes_args);
        if (mm->parsed())
            return run_make_model(mm_args);
        if (ex->parsed())
            return run_extract(ex_args);
        if (tr->parsed())
            return run_train(tr_args);
        if (ev->parsed())
            return run_eval(ev_args);
        if (fu->parsed())
            return run_fuse(fu_args);
        if (kf->parsed())
            return run_keyframes(kf_args);
        if (be->parsed())
            return run_bench(be_args);
    } catch (const error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
