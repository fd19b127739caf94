#pragma once

#include <span>
#include <vector>

#include "fusecat/tensor.hpp"

namespace fusecat {

// Convolution kernel stack laid out out_ch x in_ch x kh x kw, row-major.
struct ConvKernels {
    int out_channels = 0;
    int in_channels = 0;
    int kernel_h = 0;
    int kernel_w = 0;
    std::vector<float> data;

    int64_t size() const {
        return static_cast<int64_t>(out_channels) * in_channels * kernel_h * kernel_w;
    }
};

// Row-major dense matrix, used for fully-connected weights and score tables.
struct Matrix {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(int64_t r, int64_t c, float fill = 0.0f)
        : rows(r), cols(c), data(static_cast<size_t>(r * c), fill) {}

    float& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * cols + c)]; }
    float at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * cols + c)]; }
    const float* row(int64_t r) const { return data.data() + static_cast<size_t>(r * cols); }
    float* row(int64_t r) { return data.data() + static_cast<size_t>(r * cols); }
};

// Output extent of a strided window op: floor((in + 2*pad - window)/stride) + 1.
int conv_out_dim(int in, int window, int stride, int pad);
// Same with optional ceil rounding (reference-framework pooling compatibility).
// With pad > 0 the last window is clamped to start inside the input proper.
int pool_out_dim(int in, int window, int stride, int pad, bool ceil_mode);

// Zero-padded 2-D convolution. Dot products accumulate in 64-bit.
Tensor conv2d(const Tensor& input, const ConvKernels& kernels,
              std::span<const float> bias, int stride, int pad);

// Max pooling over window x window tiles, floor output rounding, no padding.
Tensor maxpool2d(const Tensor& input, int window, int stride);

// Pooling as used inside network graphs: optional padding (windows are
// clipped to the valid region, pad cells never contribute) and optional
// ceil output rounding.
Tensor maxpool2d_ex(const Tensor& input, int window, int stride, int pad, bool ceil_mode);
Tensor avgpool2d_ex(const Tensor& input, int window, int stride, int pad, bool ceil_mode);

// Elementwise max(x, 0).
Tensor relu(const Tensor& input);

// Across-channel local response normalization:
//   out[c,y,x] = in[c,y,x] / (k + alpha/n * sum_{c' in window} in[c',y,x]^2)^beta
// with the channel window clipped to the valid range.
Tensor lrn(const Tensor& input, int local_size, float alpha, float beta, float k);

// out = W * flatten(input) + b; weights are out_dim x in_dim.
Tensor fully_connected(const Tensor& input, const Matrix& weights,
                       std::span<const float> bias);

// Softmax over the flattened tensor, stabilized by max subtraction.
Tensor softmax(const Tensor& input);
// Softmax across channels at every spatial position (dense evaluation);
// identical to softmax() for n x 1 x 1 inputs.
Tensor softmax_channels(const Tensor& input);

// Concatenate along the channel axis; inputs must agree spatially.
Tensor concat_channels(const std::vector<const Tensor*>& inputs);
Tensor concat_channels(const std::vector<Tensor>& inputs);

namespace detail {

// Non-owning variants used by the graph executor to avoid copying weight
// blobs into ConvKernels/Matrix wrappers.
Tensor conv2d_raw(const Tensor& input, int out_channels, int in_channels,
                  int kernel_h, int kernel_w, const float* kernels,
                  std::span<const float> bias, int stride, int pad);
Tensor fully_connected_raw(const Tensor& input, int64_t out_dim, int64_t in_dim,
                           const float* weights, std::span<const float> bias);

} // namespace detail

} // namespace fusecat
