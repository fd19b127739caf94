#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fusecat/errors.hpp"

namespace fusecat {

// Dense rank-3 array in channel-major, then row-major order. Rank-1 data
// (flat feature vectors) is represented as n x 1 x 1.
struct Tensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    Tensor() = default;

    Tensor(int c, int h, int w, float fill = 0.0f)
        : channels(c), height(h), width(w) {
        if (c < 1 || h < 1 || w < 1)
            throw shape_error("tensor dimensions must be >= 1");
        data.assign(static_cast<size_t>(c) * h * w, fill);
    }

    Tensor(int c, int h, int w, std::vector<float> values)
        : channels(c), height(h), width(w), data(std::move(values)) {
        if (c < 1 || h < 1 || w < 1)
            throw shape_error("tensor dimensions must be >= 1");
        if (data.size() != static_cast<size_t>(c) * h * w)
            throw shape_error("tensor data length does not match its shape");
    }

    static Tensor from_vector(std::vector<float> values) {
        if (values.empty())
            throw shape_error("tensor dimensions must be >= 1");
        const int n = static_cast<int>(values.size());
        return Tensor(n, 1, 1, std::move(values));
    }

    int64_t size() const { return static_cast<int64_t>(channels) * height * width; }

    float& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }

    const float* channel(int c) const {
        return data.data() + static_cast<size_t>(c) * height * width;
    }
    float* channel(int c) {
        return data.data() + static_cast<size_t>(c) * height * width;
    }

    bool same_shape(const Tensor& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

} // namespace fusecat
