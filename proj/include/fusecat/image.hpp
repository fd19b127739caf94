#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fusecat/tensor.hpp"

namespace fusecat {

// 8-bit interleaved RGB raster.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;

    Raster() = default;
    Raster(int w, int h) : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3, 0) {}

    uint8_t* pixel(int x, int y) { return rgb.data() + (static_cast<size_t>(y) * width + x) * 3; }
    const uint8_t* pixel(int x, int y) const {
        return rgb.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
};

// Decodes PNG or JPEG (sniffed from magic bytes). Throws decode_error.
Raster load_image(const std::string& path);
void write_png(const std::string& path, const Raster& img);
void write_jpeg(const std::string& path, const Raster& img, int quality = 92);

enum class ResizeMode { warp, shorter_side_center_crop };

struct PreprocessSpec {
    int target_scale = 0;
    std::array<float, 3> channel_means{0.0f, 0.0f, 0.0f};
    ResizeMode resize = ResizeMode::warp;
};

// Bilinear resize per `spec.resize`, then per-channel mean subtraction.
// Output is 3 x S x S channel-major, values in the 0..255 scale.
Tensor preprocess(const Raster& image, const PreprocessSpec& spec);

} // namespace fusecat
