#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fusecat {

struct NetworkSpec;

// A shaped array of 32-bit reals.
struct Blob {
    std::vector<int64_t> shape;
    std::vector<float> data;

    int64_t size() const {
        int64_t n = 1;
        for (int64_t d : shape)
            n *= d;
        return shape.empty() ? 0 : n;
    }
};

struct LayerWeights {
    Blob weights; // conv kernels (out,in,kh,kw) or fc matrix (out,in)
    Blob bias;    // (out)
};

// Weight blobs keyed by layer name. Immutable once loaded; shared across
// threads during forward passes.
struct WeightStore {
    std::map<std::string, LayerWeights> entries;

    bool has(const std::string& layer) const { return entries.count(layer) != 0; }
    const LayerWeights& at(const std::string& layer) const;
};

// Deterministic seeded init, uniform in [-0.05, 0.05], filled in layer
// declaration order (kernels first, then bias).
WeightStore random_weights(const NetworkSpec& net, uint64_t seed);

} // namespace fusecat
