#include "fusecat/fusion.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fusecat {

const char* fusion_mode_name(FusionMode m) {
    switch (m) {
    case FusionMode::layer: return "layer";
    case FusionMode::early: return "early";
    case FusionMode::late: return "late";
    }
    return "?";
}

void FusionPlan::validate() const {
    if (mode == FusionMode::layer) {
        if (members.size() != 1)
            throw error("layer fusion plan must have exactly one member");
        if (layer_count < 1)
            throw error("layer fusion plan needs a positive layer count");
    } else {
        if (members.size() < 2)
            throw error(std::string(fusion_mode_name(mode)) +
                        " fusion plan needs at least two members");
    }
}

FusionPlan parse_fusion_plan_text(const std::string& text) {
    FusionPlan plan;
    bool mode_seen = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word))
            continue;
        if (word == "mode") {
            std::string m;
            if (!(ls >> m))
                throw corrupt_file_error("fusion plan line " + std::to_string(lineno) +
                                         ": mode needs a value");
            if (m == "layer")
                plan.mode = FusionMode::layer;
            else if (m == "early")
                plan.mode = FusionMode::early;
            else if (m == "late")
                plan.mode = FusionMode::late;
            else
                throw corrupt_file_error("fusion plan line " + std::to_string(lineno) +
                                         ": unknown mode '" + m + "'");
            mode_seen = true;
        } else if (word == "layers") {
            if (!(ls >> plan.layer_count))
                throw corrupt_file_error("fusion plan line " + std::to_string(lineno) +
                                         ": layers needs a count");
        } else if (word == "member") {
            FusionMember member;
            if (!(ls >> member.model_ref))
                throw corrupt_file_error("fusion plan line " + std::to_string(lineno) +
                                         ": member needs a reference");
            std::string tap;
            while (ls >> tap) {
                const size_t colon = tap.find(':');
                TapSpec t;
                if (colon == std::string::npos) {
                    t.layer = tap;
                    t.mode = PoolMode::flat;
                } else {
                    t.layer = tap.substr(0, colon);
                    t.mode = pool_mode_from_name(tap.substr(colon + 1));
                }
                member.taps.push_back(std::move(t));
            }
            plan.members.push_back(std::move(member));
        } else {
            throw corrupt_file_error("fusion plan line " + std::to_string(lineno) +
                                     ": unknown directive '" + word + "'");
        }
    }
    if (!mode_seen)
        throw corrupt_file_error("fusion plan: missing 'mode' directive");
    plan.validate();
    return plan;
}

FusionPlan load_fusion_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw corrupt_file_error("cannot open fusion plan '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_fusion_plan_text(ss.str());
}

std::string serialize_fusion_plan(const FusionPlan& plan) {
    std::ostringstream out;
    out << "mode " << fusion_mode_name(plan.mode) << "\n";
    if (plan.mode == FusionMode::layer)
        out << "layers " << plan.layer_count << "\n";
    for (const FusionMember& m : plan.members) {
        out << "member " << m.model_ref;
        for (const TapSpec& t : m.taps)
            out << " " << t.layer << ":" << pool_mode_name(t.mode);
        out << "\n";
    }
    return out.str();
}

std::vector<TapSpec> fusion_tap_selection(const NetworkSpec& net, int k) {
    if (net.fusion_taps.empty())
        throw structure_error("network has no canonical fusion tap list");
    if (k < 1 || k > static_cast<int>(net.fusion_taps.size()))
        throw error("fusion layer count " + std::to_string(k) + " out of range 1.." +
                    std::to_string(net.fusion_taps.size()));
    // Pool modes follow position in the full canonical list, then the k
    // lowest taps are kept (ground-up rule).
    const std::vector<TapSpec> all = default_tap_modes(net.fusion_taps);
    return {all.begin(), all.begin() + k};
}

Descriptor layer_fuse(const NetworkSpec& net, const WeightStore& weights,
                      const Tensor& image, int k) {
    return extract_descriptor(net, weights, image, fusion_tap_selection(net, k));
}

Descriptor early_fuse(std::span<const Descriptor> members) {
    if (members.empty())
        throw error("early_fuse: no members");
    const std::string& id = members[0].meta.image_id;
    for (const Descriptor& d : members)
        if (d.meta.image_id != id)
            throw error("early_fuse: members describe different images ('" + id + "' vs '" +
                        d.meta.image_id + "')");

    Descriptor out;
    out.meta.image_id = id;
    out.meta.scale = members[0].meta.scale;
    for (const Descriptor& d : members) {
        out.values.insert(out.values.end(), d.values.begin(), d.values.end());
        for (const TapSpec& t : d.meta.taps)
            out.meta.taps.push_back({d.meta.model_code + "/" + t.layer, t.mode});
        if (!out.meta.model_code.empty())
            out.meta.model_code += "+";
        out.meta.model_code += d.meta.model_code;
    }
    return out;
}

LateFusionResult late_fuse(const std::vector<Matrix>& scores, std::span<const float> weights) {
    if (scores.empty())
        throw error("late_fuse: no score matrices");
    const int64_t n = scores[0].rows, classes = scores[0].cols;
    for (const Matrix& m : scores)
        if (m.rows != n || m.cols != classes)
            throw shape_error("late_fuse: score matrices disagree in shape");

    std::vector<float> w;
    if (weights.empty()) {
        w.assign(scores.size(), 1.0f / static_cast<float>(scores.size()));
    } else {
        if (weights.size() != scores.size())
            throw shape_error("late_fuse: weight count does not match model count");
        double sum = 0.0;
        for (float x : weights) {
            if (x < 0.0f)
                throw error("late_fuse: weights must be nonnegative");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-4)
            throw error("late_fuse: weights must sum to 1");
        w.assign(weights.begin(), weights.end());
    }

    LateFusionResult out;
    out.fused_scores = Matrix(n, classes);
    std::vector<double> acc(static_cast<size_t>(n * classes), 0.0);
    for (size_t m = 0; m < scores.size(); ++m) {
        const double wm = w[m];
        for (int64_t i = 0; i < n * classes; ++i)
            acc[static_cast<size_t>(i)] += wm * scores[m].data[static_cast<size_t>(i)];
    }
    for (int64_t i = 0; i < n * classes; ++i)
        out.fused_scores.data[static_cast<size_t>(i)] = static_cast<float>(acc[static_cast<size_t>(i)]);
    out.predictions.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        const float* row = out.fused_scores.row(i);
        int best = 0;
        for (int64_t c = 1; c < classes; ++c)
            if (row[c] > row[best])
                best = static_cast<int>(c);
        out.predictions[static_cast<size_t>(i)] = best;
    }
    return out;
}

} // namespace fusecat
