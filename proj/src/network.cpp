#include "fusecat/network.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <random>
#include <set>

namespace fusecat {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
    case LayerKind::input: return "input";
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::avgpool: return "avgpool";
    case LayerKind::lrn: return "lrn";
    case LayerKind::fc: return "fc";
    case LayerKind::softmax: return "softmax";
    case LayerKind::concat: return "concat";
    case LayerKind::dropout: return "dropout";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    static const std::map<std::string, LayerKind> table = {
        {"input", LayerKind::input},     {"conv", LayerKind::conv},
        {"relu", LayerKind::relu},       {"maxpool", LayerKind::maxpool},
        {"avgpool", LayerKind::avgpool}, {"lrn", LayerKind::lrn},
        {"fc", LayerKind::fc},           {"softmax", LayerKind::softmax},
        {"concat", LayerKind::concat},   {"dropout", LayerKind::dropout},
    };
    auto it = table.find(name);
    if (it == table.end())
        throw lookup_error("unknown layer kind '" + name + "'");
    return it->second;
}

int NetworkSpec::index_of(const std::string& name) const {
    for (size_t i = 0; i < layers.size(); ++i)
        if (layers[i].name == name)
            return static_cast<int>(i);
    return -1;
}

const LayerSpec& NetworkSpec::layer(const std::string& name) const {
    const int idx = index_of(name);
    if (idx < 0)
        throw lookup_error("no layer named '" + name + "'");
    return layers[static_cast<size_t>(idx)];
}

void NetworkSpec::validate() const {
    if (layers.empty())
        throw structure_error("network has no layers");
    std::set<std::string> seen;
    int sources = 0;
    for (size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        if (l.name.empty())
            throw structure_error("layer " + std::to_string(i) + " has no name");
        if (!seen.count(l.name)) {
            seen.insert(l.name);
        } else {
            throw structure_error("duplicate layer name '" + l.name + "'");
        }
        if (l.inputs.empty()) {
            if (l.kind != LayerKind::input)
                throw structure_error("layer '" + l.name + "' has no inputs");
            ++sources;
        }
        for (const std::string& in : l.inputs)
            if (!seen.count(in) || in == l.name)
                throw structure_error("layer '" + l.name + "' references '" + in +
                                      "' which is not declared before it");
        if (l.kind == LayerKind::concat) {
            if (l.inputs.empty())
                throw structure_error("concat layer '" + l.name + "' needs inputs");
        } else if (l.kind != LayerKind::input && l.inputs.size() != 1) {
            throw structure_error("layer '" + l.name + "' must have exactly one input");
        }
    }
    if (sources != 1)
        throw structure_error("network must have exactly one source layer");
}

namespace {

Shape3 infer_layer_shape(const LayerSpec& l, const std::vector<Shape3>& in_shapes) {
    switch (l.kind) {
    case LayerKind::input:
        return in_shapes.at(0);
    case LayerKind::conv: {
        const Shape3& s = in_shapes.at(0);
        const int oh = conv_out_dim(s.height, l.kernel_h, l.stride, l.pad);
        const int ow = conv_out_dim(s.width, l.kernel_w, l.stride, l.pad);
        if (oh < 1 || ow < 1)
            throw geometry_error("layer '" + l.name + "': conv output would be empty");
        return {l.out_channels, oh, ow};
    }
    case LayerKind::maxpool:
    case LayerKind::avgpool: {
        const Shape3& s = in_shapes.at(0);
        const int oh = pool_out_dim(s.height, l.window, l.stride, l.pad, l.ceil_pool);
        const int ow = pool_out_dim(s.width, l.window, l.stride, l.pad, l.ceil_pool);
        if (oh < 1 || ow < 1)
            throw geometry_error("layer '" + l.name + "': pool output would be empty");
        return {s.channels, oh, ow};
    }
    case LayerKind::fc:
        return {l.out_channels, 1, 1};
    case LayerKind::concat: {
        int channels = 0;
        for (const Shape3& s : in_shapes) {
            if (s.height != in_shapes[0].height || s.width != in_shapes[0].width)
                throw geometry_error("layer '" + l.name + "': concat inputs disagree spatially");
            channels += s.channels;
        }
        return {channels, in_shapes[0].height, in_shapes[0].width};
    }
    case LayerKind::relu:
    case LayerKind::lrn:
    case LayerKind::softmax:
    case LayerKind::dropout:
        return in_shapes.at(0);
    }
    throw structure_error("unhandled layer kind");
}

} // namespace

ShapeMap infer_shapes(const NetworkSpec& net, int in_height, int in_width) {
    net.validate();
    ShapeMap shapes;
    for (const LayerSpec& l : net.layers) {
        std::vector<Shape3> ins;
        if (l.kind == LayerKind::input) {
            ins.push_back({net.in_channels, in_height, in_width});
        } else {
            ins.reserve(l.inputs.size());
            for (const std::string& name : l.inputs)
                ins.push_back(shapes.at(name));
        }
        shapes[l.name] = infer_layer_shape(l, ins);
    }
    return shapes;
}

ShapeMap infer_shapes(const NetworkSpec& net) {
    return infer_shapes(net, net.in_height, net.in_width);
}

namespace {

const LayerWeights& weights_for(const NetworkSpec& net, const WeightStore& ws,
                                const LayerSpec& l) {
    auto it = ws.entries.find(l.name);
    if (it == ws.entries.end())
        throw shape_error("layer '" + l.name + "': no weights in store");
    return it->second;
}

// Conv kernels may arrive either in their natural (out,in,kh,kw) shape or as
// the (out, in*kh*kw) matrix of the fc layer they were converted from.
void check_conv_blob(const LayerSpec& l, int in_channels, const LayerWeights& lw) {
    const int64_t expected =
        static_cast<int64_t>(l.out_channels) * in_channels * l.kernel_h * l.kernel_w;
    if (lw.weights.shape.empty() || lw.weights.shape[0] != l.out_channels ||
        lw.weights.size() != expected ||
        static_cast<int64_t>(lw.weights.data.size()) != expected)
        throw shape_error("layer '" + l.name + "': kernel blob does not match " +
                          std::to_string(l.out_channels) + "x" + std::to_string(in_channels) +
                          "x" + std::to_string(l.kernel_h) + "x" + std::to_string(l.kernel_w));
    if (lw.bias.size() != l.out_channels ||
        static_cast<int64_t>(lw.bias.data.size()) != l.out_channels)
        throw shape_error("layer '" + l.name + "': bias blob does not match " +
                          std::to_string(l.out_channels));
}

void check_fc_blob(const LayerSpec& l, int64_t in_dim, const LayerWeights& lw) {
    const int64_t expected = static_cast<int64_t>(l.out_channels) * in_dim;
    if (lw.weights.shape.empty() || lw.weights.shape[0] != l.out_channels ||
        lw.weights.size() != expected ||
        static_cast<int64_t>(lw.weights.data.size()) != expected)
        throw shape_error("layer '" + l.name + "': weight blob does not match " +
                          std::to_string(l.out_channels) + "x" + std::to_string(in_dim));
    if (lw.bias.size() != l.out_channels ||
        static_cast<int64_t>(lw.bias.data.size()) != l.out_channels)
        throw shape_error("layer '" + l.name + "': bias blob does not match " +
                          std::to_string(l.out_channels));
}

Tensor eval_layer(const LayerSpec& l, const std::vector<const Tensor*>& ins,
                  const NetworkSpec& net, const WeightStore& ws) {
    switch (l.kind) {
    case LayerKind::input:
        return *ins.at(0);
    case LayerKind::conv: {
        const Tensor& x = *ins.at(0);
        const LayerWeights& lw = weights_for(net, ws, l);
        check_conv_blob(l, x.channels, lw);
        return detail::conv2d_raw(x, l.out_channels, x.channels, l.kernel_h, l.kernel_w,
                                  lw.weights.data.data(), lw.bias.data, l.stride, l.pad);
    }
    case LayerKind::relu:
        return relu(*ins.at(0));
    case LayerKind::maxpool:
        return maxpool2d_ex(*ins.at(0), l.window, l.stride, l.pad, l.ceil_pool);
    case LayerKind::avgpool:
        return avgpool2d_ex(*ins.at(0), l.window, l.stride, l.pad, l.ceil_pool);
    case LayerKind::lrn:
        return lrn(*ins.at(0), l.local_size, l.alpha, l.beta, l.k);
    case LayerKind::fc: {
        const Tensor& x = *ins.at(0);
        const LayerWeights& lw = weights_for(net, ws, l);
        check_fc_blob(l, x.size(), lw);
        return detail::fully_connected_raw(x, l.out_channels, x.size(),
                                           lw.weights.data.data(), lw.bias.data);
    }
    case LayerKind::softmax:
        return softmax_channels(*ins.at(0));
    case LayerKind::concat:
        return concat_channels(ins);
    case LayerKind::dropout:
        return *ins.at(0);
    }
    throw structure_error("unhandled layer kind");
}

} // namespace

TapResult forward(const NetworkSpec& net, const WeightStore& weights,
                  const Tensor& input, const std::vector<std::string>& taps,
                  LayerTimings* timings) {
    net.validate();
    if (net.size_relaxed) {
        if (input.channels != net.in_channels || input.height < net.min_in_height ||
            input.width < net.min_in_width)
            throw shape_error("input " + std::to_string(input.channels) + "x" +
                              std::to_string(input.height) + "x" + std::to_string(input.width) +
                              " is below the converted network's native scale");
    } else {
        if (input.channels != net.in_channels || input.height != net.in_height ||
            input.width != net.in_width)
            throw shape_error("input " + std::to_string(input.channels) + "x" +
                              std::to_string(input.height) + "x" + std::to_string(input.width) +
                              " does not match the network input " +
                              std::to_string(net.in_channels) + "x" +
                              std::to_string(net.in_height) + "x" + std::to_string(net.in_width));
    }

    int deepest = -1;
    std::set<int> tap_indices;
    for (const std::string& t : taps) {
        const int idx = net.index_of(t);
        if (idx < 0)
            throw lookup_error("unknown tap '" + t + "'");
        tap_indices.insert(idx);
        deepest = std::max(deepest, idx);
    }

    // Last layer index that consumes each intermediate, so tensors can be
    // released as soon as they are dead.
    std::vector<int> last_use(net.layers.size(), -1);
    for (size_t i = 0; i < net.layers.size(); ++i)
        for (const std::string& in : net.layers[i].inputs)
            last_use[static_cast<size_t>(net.index_of(in))] = static_cast<int>(i);

    std::vector<std::optional<Tensor>> values(net.layers.size());
    TapResult result;
    for (int i = 0; i <= deepest; ++i) {
        const LayerSpec& l = net.layers[static_cast<size_t>(i)];
        std::vector<const Tensor*> ins;
        if (l.kind == LayerKind::input) {
            ins.push_back(&input);
        } else {
            for (const std::string& in : l.inputs)
                ins.push_back(&*values[static_cast<size_t>(net.index_of(in))]);
        }
        const auto t0 = std::chrono::steady_clock::now();
        values[static_cast<size_t>(i)] = eval_layer(l, ins, net, weights);
        if (timings) {
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            timings->seconds.emplace_back(l.name, dt.count());
        }
        if (tap_indices.count(i))
            result[l.name] = *values[static_cast<size_t>(i)];
        // Release inputs whose consumers are all done.
        for (const std::string& in : l.inputs) {
            const int idx = net.index_of(in);
            if (last_use[static_cast<size_t>(idx)] <= i)
                values[static_cast<size_t>(idx)].reset();
        }
    }
    return result;
}

NetworkSpec convolutionalize(const NetworkSpec& net) {
    net.validate();
    const ShapeMap shapes = infer_shapes(net);

    int first_fc = -1;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].kind == LayerKind::fc) {
            first_fc = static_cast<int>(i);
            break;
        }
    }
    if (first_fc < 0)
        throw structure_error("convolutionalize: network has no fully-connected layers");
    for (size_t i = static_cast<size_t>(first_fc); i < net.layers.size(); ++i) {
        const LayerKind k = net.layers[i].kind;
        if (k != LayerKind::fc && k != LayerKind::relu && k != LayerKind::dropout &&
            k != LayerKind::softmax)
            throw structure_error("convolutionalize: layer '" + net.layers[i].name +
                                  "' follows the fully-connected suffix but is spatial");
    }

    NetworkSpec out = net;
    for (LayerSpec& l : out.layers) {
        if (l.kind != LayerKind::fc)
            continue;
        const Shape3 in = shapes.at(l.inputs.at(0));
        l.kind = LayerKind::conv;
        l.kernel_h = in.height;
        l.kernel_w = in.width;
        l.stride = 1;
        l.pad = 0;
        l.from_fc = true;
    }
    out.size_relaxed = true;
    out.min_in_height = net.size_relaxed ? net.min_in_height : net.in_height;
    out.min_in_width = net.size_relaxed ? net.min_in_width : net.in_width;
    return out;
}

void validate_weights(const NetworkSpec& net, const WeightStore& weights) {
    const ShapeMap shapes =
        net.size_relaxed ? infer_shapes(net, net.min_in_height, net.min_in_width)
                         : infer_shapes(net);
    std::set<std::string> used;
    for (const LayerSpec& l : net.layers) {
        if (!l.has_weights())
            continue;
        auto it = weights.entries.find(l.name);
        if (it == weights.entries.end())
            throw shape_error("layer '" + l.name + "': no weights in store");
        used.insert(l.name);
        const Shape3 in = shapes.at(l.inputs.at(0));
        if (l.kind == LayerKind::conv)
            check_conv_blob(l, in.channels, it->second);
        else
            check_fc_blob(l, static_cast<int64_t>(in.channels) * in.height * in.width,
                          it->second);
    }
    for (const auto& [name, lw] : weights.entries)
        if (!used.count(name))
            throw shape_error("weight store has an entry '" + name +
                              "' that matches no weighted layer");
}

const LayerWeights& WeightStore::at(const std::string& layer) const {
    auto it = entries.find(layer);
    if (it == entries.end())
        throw lookup_error("no weights for layer '" + layer + "'");
    return it->second;
}

WeightStore random_weights(const NetworkSpec& net, uint64_t seed) {
    const ShapeMap shapes =
        net.size_relaxed ? infer_shapes(net, net.min_in_height, net.min_in_width)
                         : infer_shapes(net);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-0.05f, 0.05f);

    WeightStore ws;
    for (const LayerSpec& l : net.layers) {
        if (!l.has_weights())
            continue;
        const Shape3 in = shapes.at(l.inputs.at(0));
        LayerWeights lw;
        if (l.kind == LayerKind::conv) {
            lw.weights.shape = {l.out_channels, in.channels, l.kernel_h, l.kernel_w};
        } else {
            lw.weights.shape = {l.out_channels,
                                static_cast<int64_t>(in.channels) * in.height * in.width};
        }
        lw.weights.data.resize(static_cast<size_t>(lw.weights.size()));
        for (float& v : lw.weights.data)
            v = dist(rng);
        lw.bias.shape = {l.out_channels};
        lw.bias.data.resize(static_cast<size_t>(l.out_channels));
        for (float& v : lw.bias.data)
            v = dist(rng);
        ws.entries[l.name] = std::move(lw);
    }
    return ws;
}

} // namespace fusecat
