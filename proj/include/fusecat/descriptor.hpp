#pragma once

#include <span>
#include <string>
#include <vector>

#include "fusecat/network.hpp"
#include "fusecat/tensor.hpp"
#include "fusecat/weights.hpp"

namespace fusecat {

using PoolMode = PoolModeKind; // flat | max | sum

const char* pool_mode_name(PoolMode m);
PoolMode pool_mode_from_name(const std::string& name);

struct TapSpec {
    std::string layer;
    PoolMode mode = PoolMode::flat;
};

struct DescriptorMeta {
    std::string model_code;
    std::vector<TapSpec> taps;
    int scale = 0;
    std::string image_id;
};

// Fixed-length feature vector with provenance.
struct Descriptor {
    std::vector<float> values;
    DescriptorMeta meta;

    int64_t dim() const { return static_cast<int64_t>(values.size()); }
};

// Per-channel reductions of a feature map.
std::vector<float> spatial_max_pool(const Tensor& map);
std::vector<float> spatial_sum_pool(const Tensor& map);
// Serializes the whole map (channel-major) into one vector.
std::vector<float> flatten_concat(const Tensor& map);

// Unit-norm copy; the zero vector maps to itself.
std::vector<float> l2_normalize(std::span<const float> v);

struct ExtractOptions {
    bool normalize = true;
    bool per_block_normalize = false;
};

// Runs one forward pass, reduces every tap per its pool mode, concatenates
// in tap order and L2-normalizes the result.
Descriptor extract_descriptor(const NetworkSpec& net, const WeightStore& weights,
                              const Tensor& image, std::span<const TapSpec> taps,
                              const ExtractOptions& opts = {});

// Depth-dependent default pooling over a tap list: sum for the lower half,
// max for the upper half.
std::vector<TapSpec> default_tap_modes(std::span<const std::string> taps);

} // namespace fusecat
