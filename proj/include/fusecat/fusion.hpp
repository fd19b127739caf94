#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fusecat/descriptor.hpp"
#include "fusecat/ops.hpp"

namespace fusecat {

enum class FusionMode { layer, early, late };

const char* fusion_mode_name(FusionMode m);

struct FusionMember {
    std::string model_ref;     // model or descriptor/score file path
    std::vector<TapSpec> taps; // may be empty (member's default feature tap)
};

// Declarative fusion description. Layer mode has exactly one member; early
// and late modes need at least two.
struct FusionPlan {
    FusionMode mode = FusionMode::early;
    std::vector<FusionMember> members;
    int layer_count = 0; // layer mode, 2..8

    void validate() const;
};

// Text config: `mode <layer|early|late>`, optional `layers <k>`, then one
// `member <ref> [tap:mode ...]` line each.
FusionPlan parse_fusion_plan_text(const std::string& text);
FusionPlan load_fusion_plan(const std::string& path);
std::string serialize_fusion_plan(const FusionPlan& plan);

// The k lowest taps of the network's canonical ground-up list, pool modes
// assigned by depth (lower half sum, upper half max).
std::vector<TapSpec> fusion_tap_selection(const NetworkSpec& net, int k);

// Ground-up fusion of the k lowest canonical taps of one model.
Descriptor layer_fuse(const NetworkSpec& net, const WeightStore& weights,
                      const Tensor& image, int k);

// Concatenates same-image descriptors from several models, in member order.
Descriptor early_fuse(std::span<const Descriptor> members);

struct LateFusionResult {
    Matrix fused_scores;          // samples x classes
    std::vector<int> predictions; // argmax per sample, ties to lowest index
};

// Weighted mean of per-model decision scores (uniform when no weights).
LateFusionResult late_fuse(const std::vector<Matrix>& scores,
                           std::span<const float> weights = {});

} // namespace fusecat
