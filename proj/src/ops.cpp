#include "fusecat/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace fusecat {

int conv_out_dim(int in, int window, int stride, int pad) {
    if (stride < 1)
        throw geometry_error("stride must be >= 1");
    const int span = in + 2 * pad - window;
    if (span < 0)
        return 0;
    return span / stride + 1;
}

int pool_out_dim(int in, int window, int stride, int pad, bool ceil_mode) {
    if (stride < 1)
        throw geometry_error("stride must be >= 1");
    const int span = in + 2 * pad - window;
    if (span < 0)
        return 0;
    int out = ceil_mode ? (span + stride - 1) / stride + 1 : span / stride + 1;
    if (pad > 0 && (out - 1) * stride >= in + pad)
        --out;
    return out;
}

namespace {

// Panel sizes for the blocked conv GEMM. The packed input panel
// (TK x TJ floats) and one row of double accumulators stay cache-hot
// across all output channels.
constexpr int kTileJ = 128;
constexpr int kTileK = 512;

} // namespace

Tensor conv2d(const Tensor& input, const ConvKernels& kernels,
              std::span<const float> bias, int stride, int pad) {
    if (kernels.size() != static_cast<int64_t>(kernels.data.size()))
        throw shape_error("conv2d: kernel data length does not match its shape");
    return detail::conv2d_raw(input, kernels.out_channels, kernels.in_channels,
                              kernels.kernel_h, kernels.kernel_w,
                              kernels.data.data(), bias, stride, pad);
}

Tensor detail::conv2d_raw(const Tensor& input, int out_channels, int in_channels,
                          int kernel_h, int kernel_w, const float* kernels,
                          std::span<const float> bias, int stride, int pad) {
    if (in_channels != input.channels)
        throw shape_error("conv2d: kernel expects " + std::to_string(in_channels) +
                          " input channels, tensor has " + std::to_string(input.channels));
    if (static_cast<int64_t>(bias.size()) != out_channels)
        throw shape_error("conv2d: bias length " + std::to_string(bias.size()) +
                          " != output channels " + std::to_string(out_channels));
    if (pad < 0)
        throw geometry_error("conv2d: negative padding");

    const int out_h = conv_out_dim(input.height, kernel_h, stride, pad);
    const int out_w = conv_out_dim(input.width, kernel_w, stride, pad);
    if (out_h < 1 || out_w < 1)
        throw geometry_error("conv2d: output would be empty (" +
                             std::to_string(out_h) + "x" + std::to_string(out_w) + ")");

    const int kh = kernel_h, kw = kernel_w;
    const int in_h = input.height, in_w = input.width;
    const int M = out_channels;
    const int K = in_channels * kh * kw;
    const int N = out_h * out_w;

    Tensor out(M, out_h, out_w);

    std::vector<float> panel(static_cast<size_t>(kTileK) * kTileJ);
    std::vector<double> acc(static_cast<size_t>(M) * kTileJ);

    for (int jb = 0; jb < N; jb += kTileJ) {
        const int tj = std::min(kTileJ, N - jb);
        std::fill(acc.begin(), acc.begin() + static_cast<size_t>(M) * kTileJ, 0.0);

        for (int kb = 0; kb < K; kb += kTileK) {
            const int tk = std::min(kTileK, K - kb);

            // Pack the input patch panel for this (jb, kb) block (im2col tile).
            for (int kk = 0; kk < tk; ++kk) {
                const int k = kb + kk;
                const int ic = k / (kh * kw);
                const int rem = k % (kh * kw);
                const int ky = rem / kw;
                const int kx = rem % kw;
                const float* src = input.channel(ic);
                float* dst = panel.data() + static_cast<size_t>(kk) * tj;
                int oy = (jb) / out_w, ox = (jb) % out_w;
                for (int j = 0; j < tj; ++j) {
                    const int iy = oy * stride + ky - pad;
                    const int ix = ox * stride + kx - pad;
                    dst[j] = (iy >= 0 && iy < in_h && ix >= 0 && ix < in_w)
                                 ? src[static_cast<size_t>(iy) * in_w + ix]
                                 : 0.0f;
                    if (++ox == out_w) { ox = 0; ++oy; }
                }
            }

            for (int i = 0; i < M; ++i) {
                const float* arow = kernels + static_cast<size_t>(i) * K + kb;
                double* ac = acc.data() + static_cast<size_t>(i) * kTileJ;
                for (int kk = 0; kk < tk; ++kk) {
                    const double a = arow[kk];
                    const float* brow = panel.data() + static_cast<size_t>(kk) * tj;
                    for (int j = 0; j < tj; ++j)
                        ac[j] += a * static_cast<double>(brow[j]);
                }
            }
        }

        for (int i = 0; i < M; ++i) {
            const double b = bias[i];
            float* dst = out.data.data() + static_cast<size_t>(i) * N + jb;
            const double* ac = acc.data() + static_cast<size_t>(i) * kTileJ;
            for (int j = 0; j < tj; ++j)
                dst[j] = static_cast<float>(ac[j] + b);
        }
    }
    return out;
}

Tensor maxpool2d(const Tensor& input, int window, int stride) {
    if (window > std::min(input.height, input.width))
        throw geometry_error("maxpool2d: window exceeds input extent");
    return maxpool2d_ex(input, window, stride, 0, false);
}

Tensor maxpool2d_ex(const Tensor& input, int window, int stride, int pad, bool ceil_mode) {
    const int out_h = pool_out_dim(input.height, window, stride, pad, ceil_mode);
    const int out_w = pool_out_dim(input.width, window, stride, pad, ceil_mode);
    if (out_h < 1 || out_w < 1)
        throw geometry_error("maxpool2d: output would be empty");

    Tensor out(input.channels, out_h, out_w);
    for (int c = 0; c < input.channels; ++c) {
        const float* src = input.channel(c);
        float* dst = out.channel(c);
        for (int oy = 0; oy < out_h; ++oy) {
            const int y0 = std::max(0, oy * stride - pad);
            const int y1 = std::min(input.height, oy * stride - pad + window);
            for (int ox = 0; ox < out_w; ++ox) {
                const int x0 = std::max(0, ox * stride - pad);
                const int x1 = std::min(input.width, ox * stride - pad + window);
                float m = -std::numeric_limits<float>::infinity();
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x)
                        m = std::max(m, src[static_cast<size_t>(y) * input.width + x]);
                dst[static_cast<size_t>(oy) * out_w + ox] = m;
            }
        }
    }
    return out;
}

Tensor avgpool2d_ex(const Tensor& input, int window, int stride, int pad, bool ceil_mode) {
    const int out_h = pool_out_dim(input.height, window, stride, pad, ceil_mode);
    const int out_w = pool_out_dim(input.width, window, stride, pad, ceil_mode);
    if (out_h < 1 || out_w < 1)
        throw geometry_error("avgpool2d: output would be empty");

    Tensor out(input.channels, out_h, out_w);
    for (int c = 0; c < input.channels; ++c) {
        const float* src = input.channel(c);
        float* dst = out.channel(c);
        for (int oy = 0; oy < out_h; ++oy) {
            const int y0 = std::max(0, oy * stride - pad);
            const int y1 = std::min(input.height, oy * stride - pad + window);
            for (int ox = 0; ox < out_w; ++ox) {
                const int x0 = std::max(0, ox * stride - pad);
                const int x1 = std::min(input.width, ox * stride - pad + window);
                double sum = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x)
                        sum += src[static_cast<size_t>(y) * input.width + x];
                const int count = (y1 - y0) * (x1 - x0);
                dst[static_cast<size_t>(oy) * out_w + ox] =
                    static_cast<float>(sum / std::max(count, 1));
            }
        }
    }
    return out;
}

Tensor relu(const Tensor& input) {
    Tensor out = input;
    for (float& v : out.data)
        v = std::max(v, 0.0f);
    return out;
}

Tensor lrn(const Tensor& input, int local_size, float alpha, float beta, float k) {
    if (local_size < 1 || local_size % 2 == 0)
        throw geometry_error("lrn: local size must be odd and >= 1");

    Tensor out(input.channels, input.height, input.width);
    const int half = local_size / 2;
    const int plane = input.height * input.width;
    const double scale = static_cast<double>(alpha) / local_size;
    for (int p = 0; p < plane; ++p) {
        for (int c = 0; c < input.channels; ++c) {
            const int c0 = std::max(0, c - half);
            const int c1 = std::min(input.channels - 1, c + half);
            double sumsq = 0.0;
            for (int cc = c0; cc <= c1; ++cc) {
                const double v = input.data[static_cast<size_t>(cc) * plane + p];
                sumsq += v * v;
            }
            const double denom = std::pow(k + scale * sumsq, static_cast<double>(beta));
            out.data[static_cast<size_t>(c) * plane + p] = static_cast<float>(
                input.data[static_cast<size_t>(c) * plane + p] / denom);
        }
    }
    return out;
}

Tensor fully_connected(const Tensor& input, const Matrix& weights,
                       std::span<const float> bias) {
    return detail::fully_connected_raw(input, weights.rows, weights.cols,
                                       weights.data.data(), bias);
}

Tensor detail::fully_connected_raw(const Tensor& input, int64_t out_dim, int64_t in_dim,
                                   const float* weights, std::span<const float> bias) {
    if (in_dim != input.size())
        throw shape_error("fully_connected: weights expect " + std::to_string(in_dim) +
                          " inputs, tensor has " + std::to_string(input.size()));
    if (static_cast<int64_t>(bias.size()) != out_dim)
        throw shape_error("fully_connected: bias length does not match output dim");

    Tensor out(static_cast<int>(out_dim), 1, 1);
    for (int64_t i = 0; i < out_dim; ++i) {
        const float* w = weights + static_cast<size_t>(i) * in_dim;
        double sum = bias[i];
        for (int64_t j = 0; j < in_dim; ++j)
            sum += static_cast<double>(w[j]) * static_cast<double>(input.data[j]);
        out.data[i] = static_cast<float>(sum);
    }
    return out;
}

Tensor softmax(const Tensor& input) {
    Tensor out = input;
    const float mx = *std::max_element(out.data.begin(), out.data.end());
    double sum = 0.0;
    for (float& v : out.data) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (float& v : out.data)
        v = static_cast<float>(v / sum);
    return out;
}

Tensor softmax_channels(const Tensor& input) {
    Tensor out = input;
    const int plane = input.height * input.width;
    for (int p = 0; p < plane; ++p) {
        float mx = -std::numeric_limits<float>::infinity();
        for (int c = 0; c < input.channels; ++c)
            mx = std::max(mx, input.data[static_cast<size_t>(c) * plane + p]);
        double sum = 0.0;
        for (int c = 0; c < input.channels; ++c) {
            const size_t idx = static_cast<size_t>(c) * plane + p;
            out.data[idx] = std::exp(input.data[idx] - mx);
            sum += out.data[idx];
        }
        for (int c = 0; c < input.channels; ++c) {
            const size_t idx = static_cast<size_t>(c) * plane + p;
            out.data[idx] = static_cast<float>(out.data[idx] / sum);
        }
    }
    return out;
}

Tensor concat_channels(const std::vector<const Tensor*>& inputs) {
    if (inputs.empty())
        throw shape_error("concat_channels: no inputs");
    const int h = inputs[0]->height, w = inputs[0]->width;
    int channels = 0;
    for (const Tensor* t : inputs) {
        if (t->height != h || t->width != w)
            throw shape_error("concat_channels: spatial dimensions differ");
        channels += t->channels;
    }
    Tensor out(channels, h, w);
    float* dst = out.data.data();
    for (const Tensor* t : inputs) {
        std::memcpy(dst, t->data.data(), t->data.size() * sizeof(float));
        dst += t->data.size();
    }
    return out;
}

Tensor concat_channels(const std::vector<Tensor>& inputs) {
    std::vector<const Tensor*> ptrs;
    ptrs.reserve(inputs.size());
    for (const Tensor& t : inputs)
        ptrs.push_back(&t);
    return concat_channels(ptrs);
}

} // namespace fusecat
