#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fusecat/ops.hpp"
#include "fusecat/tensor.hpp"
#include "fusecat/weights.hpp"

namespace fusecat {

enum class LayerKind {
    input,
    conv,
    relu,
    maxpool,
    avgpool,
    lrn,
    fc,
    softmax,
    concat,
    dropout, // identity at inference time; kept so layer counting matches
};

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

// One node of the network graph. Which geometry fields apply depends on
// kind; unused fields keep their defaults.
struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::input;
    std::vector<std::string> inputs;

    int out_channels = 0;           // conv out channels / fc out dim
    int kernel_h = 0, kernel_w = 0; // conv
    int stride = 1;
    int pad = 0;
    int window = 0;                 // pooling
    bool ceil_pool = false;         // pooling output rounding
    int local_size = 0;             // lrn
    float alpha = 0.0f, beta = 0.0f, k = 1.0f; // lrn
    bool from_fc = false;           // conv produced by convolutionalize()

    bool has_weights() const { return kind == LayerKind::conv || kind == LayerKind::fc; }
};

struct Shape3 {
    int channels = 0, height = 0, width = 0;
    bool operator==(const Shape3&) const = default;
};

struct NetworkMeta {
    std::string code_name;  // table naming scheme (M1..M7) or a custom tag
    std::string arch;       // preset family name
    int native_scale = 0;
};

enum class PoolModeKind { flat, max, sum };

// Ordered layer graph evaluated in declaration order. `fusion_taps` is the
// architecture's canonical ground-up fusion list (lowest first);
// `feature_tap` is the default single-layer feature for model fusion.
struct NetworkSpec {
    std::vector<LayerSpec> layers;
    int in_channels = 3;
    int in_height = 0;
    int in_width = 0;
    NetworkMeta meta;
    bool size_relaxed = false; // converted nets accept inputs >= native scale
    int min_in_height = 0, min_in_width = 0; // lower bound when size_relaxed

    std::vector<std::string> fusion_taps;
    std::string feature_tap;
    PoolModeKind feature_pool = PoolModeKind::flat;

    int index_of(const std::string& name) const; // -1 when absent
    const LayerSpec& layer(const std::string& name) const;

    // Checks name uniqueness, reference ordering and the single-source rule.
    void validate() const;
};

using TapResult = std::map<std::string, Tensor>;
using ShapeMap = std::map<std::string, Shape3>;

// Optional per-layer wall-clock collection for the bench harness.
struct LayerTimings {
    std::vector<std::pair<std::string, double>> seconds;
};

// Runs a single forward pass and captures the named taps. Layers past the
// deepest tap are not evaluated.
TapResult forward(const NetworkSpec& net, const WeightStore& weights,
                  const Tensor& input, const std::vector<std::string>& taps,
                  LayerTimings* timings = nullptr);

// Computes every layer's output shape symbolically (no arithmetic on data).
ShapeMap infer_shapes(const NetworkSpec& net);
ShapeMap infer_shapes(const NetworkSpec& net, int in_height, int in_width);

// Rewrites the fully-connected suffix into equivalent convolutions so the
// network accepts inputs larger than its native scale.
NetworkSpec convolutionalize(const NetworkSpec& net);

// Verifies that every weighted layer has a blob of compatible shape (and no
// stray entries exist). Throws shape_error naming the offending layer.
void validate_weights(const NetworkSpec& net, const WeightStore& weights);

} // namespace fusecat
