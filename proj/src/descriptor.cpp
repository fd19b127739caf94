#include "fusecat/descriptor.hpp"

#include <algorithm>
#include <cmath>

namespace fusecat {

const char* pool_mode_name(PoolMode m) {
    switch (m) {
    case PoolMode::flat: return "flat";
    case PoolMode::max: return "max";
    case PoolMode::sum: return "sum";
    }
    return "?";
}

PoolMode pool_mode_from_name(const std::string& name) {
    if (name == "flat")
        return PoolMode::flat;
    if (name == "max")
        return PoolMode::max;
    if (name == "sum")
        return PoolMode::sum;
    throw lookup_error("unknown pool mode '" + name + "' (expected flat, max or sum)");
}

std::vector<float> spatial_max_pool(const Tensor& map) {
    std::vector<float> out(static_cast<size_t>(map.channels));
    const size_t plane = static_cast<size_t>(map.height) * map.width;
    for (int c = 0; c < map.channels; ++c) {
        const float* p = map.channel(c);
        out[static_cast<size_t>(c)] = *std::max_element(p, p + plane);
    }
    return out;
}

std::vector<float> spatial_sum_pool(const Tensor& map) {
    std::vector<float> out(static_cast<size_t>(map.channels));
    const size_t plane = static_cast<size_t>(map.height) * map.width;
    for (int c = 0; c < map.channels; ++c) {
        const float* p = map.channel(c);
        double sum = 0.0;
        for (size_t i = 0; i < plane; ++i)
            sum += p[i];
        out[static_cast<size_t>(c)] = static_cast<float>(sum);
    }
    return out;
}

std::vector<float> flatten_concat(const Tensor& map) {
    return map.data;
}

std::vector<float> l2_normalize(std::span<const float> v) {
    double sumsq = 0.0;
    for (float x : v)
        sumsq += static_cast<double>(x) * x;
    std::vector<float> out(v.begin(), v.end());
    if (sumsq == 0.0)
        return out;
    const double inv = 1.0 / std::sqrt(sumsq);
    for (float& x : out)
        x = static_cast<float>(x * inv);
    return out;
}

Descriptor extract_descriptor(const NetworkSpec& net, const WeightStore& weights,
                              const Tensor& image, std::span<const TapSpec> taps,
                              const ExtractOptions& opts) {
    std::vector<std::string> names;
    names.reserve(taps.size());
    for (const TapSpec& t : taps)
        names.push_back(t.layer);

    const TapResult result = forward(net, weights, image, names);

    Descriptor d;
    for (const TapSpec& t : taps) {
        const Tensor& map = result.at(t.layer);
        std::vector<float> block;
        switch (t.mode) {
        case PoolMode::flat: block = flatten_concat(map); break;
        case PoolMode::max: block = spatial_max_pool(map); break;
        case PoolMode::sum: block = spatial_sum_pool(map); break;
        }
        if (opts.per_block_normalize)
            block = l2_normalize(block);
        d.values.insert(d.values.end(), block.begin(), block.end());
    }
    if (opts.normalize)
        d.values = l2_normalize(d.values);

    d.meta.model_code = net.meta.code_name;
    d.meta.taps.assign(taps.begin(), taps.end());
    d.meta.scale = net.in_height;
    return d;
}

std::vector<TapSpec> default_tap_modes(std::span<const std::string> taps) {
    std::vector<TapSpec> out;
    out.reserve(taps.size());
    const size_t half = taps.size() / 2;
    for (size_t i = 0; i < taps.size(); ++i)
        out.push_back({taps[i], i < half ? PoolMode::sum : PoolMode::max});
    return out;
}

} // namespace fusecat
