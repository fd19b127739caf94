#include "fusecat/presets.hpp"

namespace fusecat {

namespace {

struct Builder {
    NetworkSpec net;
    std::string last;

    Builder(int channels, int scale) {
        net.in_channels = channels;
        net.in_height = net.in_width = scale;
        LayerSpec l;
        l.name = "data";
        l.kind = LayerKind::input;
        net.layers.push_back(l);
        last = "data";
    }

    std::string add(LayerSpec l, const std::string& from = "") {
        if (l.inputs.empty() && l.kind != LayerKind::input)
            l.inputs = {from.empty() ? last : from};
        net.layers.push_back(l);
        last = l.name;
        return l.name;
    }

    std::string conv(const std::string& name, int out, int kernel, int stride, int pad,
                     const std::string& from = "") {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::conv;
        l.out_channels = out;
        l.kernel_h = l.kernel_w = kernel;
        l.stride = stride;
        l.pad = pad;
        return add(l, from);
    }

    std::string relu_(const std::string& name, const std::string& from = "") {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::relu;
        return add(l, from);
    }

    std::string maxpool(const std::string& name, int window, int stride, int pad = 0,
                        bool ceil = false, const std::string& from = "") {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::maxpool;
        l.window = window;
        l.stride = stride;
        l.pad = pad;
        l.ceil_pool = ceil;
        return add(l, from);
    }

    std::string avgpool(const std::string& name, int window, int stride) {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::avgpool;
        l.window = window;
        l.stride = stride;
        return add(l);
    }

    std::string lrn_(const std::string& name, const std::string& from = "") {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::lrn;
        l.local_size = 5;
        l.alpha = 1e-4f;
        l.beta = 0.75f;
        l.k = 1.0f;
        return add(l, from);
    }

    std::string fc(const std::string& name, int out) {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::fc;
        l.out_channels = out;
        return add(l);
    }

    std::string dropout(const std::string& name) {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::dropout;
        return add(l);
    }

    std::string softmax_(const std::string& name) {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::softmax;
        return add(l);
    }

    std::string concat(const std::string& name, std::vector<std::string> from) {
        LayerSpec l;
        l.name = name;
        l.kind = LayerKind::concat;
        l.inputs = std::move(from);
        net.layers.push_back(l);
        last = l.name;
        return l.name;
    }
};

NetworkSpec alexnet_native() {
    Builder b(3, 227);
    b.conv("conv1", 96, 11, 4, 0);
    b.relu_("relu1");
    b.lrn_("norm1");
    b.maxpool("pool1", 3, 2);
    b.conv("conv2", 256, 5, 1, 2);
    b.relu_("relu2");
    b.lrn_("norm2");
    b.maxpool("pool2", 3, 2);
    b.conv("conv3", 384, 3, 1, 1);
    b.relu_("relu3");
    b.conv("conv4", 384, 3, 1, 1);
    b.relu_("relu4");
    b.conv("conv5", 256, 3, 1, 1);
    b.relu_("relu5");
    b.maxpool("pool5", 3, 2);
    b.fc("fc6", 4096);
    b.relu_("relu6");
    b.dropout("drop6");
    b.fc("fc7", 4096);
    b.relu_("relu7");
    b.dropout("drop7");
    b.fc("fc8", 1000);
    b.softmax_("prob");

    b.net.meta.arch = "alexnet";
    b.net.meta.native_scale = 227;
    b.net.fusion_taps = {"conv1", "conv2", "conv3", "conv4",
                         "conv5", "fc6",   "fc7",   "fc8"};
    b.net.feature_tap = "fc7";
    b.net.feature_pool = PoolModeKind::flat;
    return b.net;
}

NetworkSpec vgg_native(int depth) {
    // depth 16 -> blocks {2,2,3,3,3}; depth 19 -> {2,2,4,4,4}
    const std::vector<int> block_sizes =
        depth == 16 ? std::vector<int>{2, 2, 3, 3, 3} : std::vector<int>{2, 2, 4, 4, 4};
    const int widths[5] = {64, 128, 256, 512, 512};

    Builder b(3, 224);
    std::vector<std::string> conv_names;
    for (int blk = 0; blk < 5; ++blk) {
        for (int i = 0; i < block_sizes[blk]; ++i) {
            const std::string name =
                "conv" + std::to_string(blk + 1) + "-" + std::to_string(i + 1);
            b.conv(name, widths[blk], 3, 1, 1);
            b.relu_("relu" + std::to_string(blk + 1) + "-" + std::to_string(i + 1));
            conv_names.push_back(name);
        }
        b.maxpool("pool" + std::to_string(blk + 1), 2, 2);
    }
    b.fc("fc6", 4096);
    b.relu_("relu6");
    b.dropout("drop6");
    b.fc("fc7", 4096);
    b.relu_("relu7");
    b.dropout("drop7");
    b.fc("fc8", 1000);
    b.softmax_("prob");

    b.net.meta.arch = depth == 16 ? "vgg16" : "vgg19";
    b.net.meta.native_scale = 224;
    // Ground-up top-8: the five deepest convs, then the fc stack.
    std::vector<std::string> taps(conv_names.end() - 5, conv_names.end());
    taps.insert(taps.end(), {"fc6", "fc7", "fc8"});
    b.net.fusion_taps = std::move(taps);
    b.net.feature_tap = "fc7";
    b.net.feature_pool = PoolModeKind::flat;
    return b.net;
}

// One inception module; widths are the published per-branch channel counts.
std::string inception(Builder& b, const std::string& tag, const std::string& from, int c1,
                      int c3r, int c3, int c5r, int c5, int proj) {
    const std::string base = "inception-" + tag;
    b.conv(base + "/1x1", c1, 1, 1, 0, from);
    b.relu_(base + "/relu_1x1");
    const std::string b1 = b.last;
    b.conv(base + "/3x3_reduce", c3r, 1, 1, 0, from);
    b.relu_(base + "/relu_3x3_reduce");
    b.conv(base + "/3x3", c3, 3, 1, 1);
    b.relu_(base + "/relu_3x3");
    const std::string b2 = b.last;
    b.conv(base + "/5x5_reduce", c5r, 1, 1, 0, from);
    b.relu_(base + "/relu_5x5_reduce");
    b.conv(base + "/5x5", c5, 5, 1, 2);
    b.relu_(base + "/relu_5x5");
    const std::string b3 = b.last;
    b.maxpool(base + "/pool", 3, 1, 1, false, from);
    b.conv(base + "/pool_proj", proj, 1, 1, 0);
    b.relu_(base + "/relu_pool_proj");
    const std::string b4 = b.last;
    return b.concat(base + "/output", {b1, b2, b3, b4});
}

NetworkSpec googlenet_native() {
    Builder b(3, 224);
    b.conv("conv1/7x7_s2", 64, 7, 2, 3);
    b.relu_("conv1/relu_7x7");
    b.maxpool("pool1/3x3_s2", 3, 2, 0, true);
    b.lrn_("pool1/norm1");
    b.conv("conv2/3x3_reduce", 64, 1, 1, 0);
    b.relu_("conv2/relu_3x3_reduce");
    b.conv("conv2/3x3", 192, 3, 1, 1);
    b.relu_("conv2/relu_3x3");
    b.lrn_("conv2/norm2");
    b.maxpool("pool2/3x3_s2", 3, 2, 0, true);

    std::string x = b.last;
    x = inception(b, "3a", x, 64, 96, 128, 16, 32, 32);
    x = inception(b, "3b", x, 128, 128, 192, 32, 96, 64);
    x = b.maxpool("pool3/3x3_s2", 3, 2, 0, true, x);
    x = inception(b, "4a", x, 192, 96, 208, 16, 48, 64);
    x = inception(b, "4b", x, 160, 112, 224, 24, 64, 64);
    x = inception(b, "4c", x, 128, 128, 256, 24, 64, 64);
    x = inception(b, "4d", x, 112, 144, 288, 32, 64, 64);
    x = inception(b, "4e", x, 256, 160, 320, 32, 128, 128);
    x = b.maxpool("pool4/3x3_s2", 3, 2, 0, true, x);
    x = inception(b, "5a", x, 256, 160, 320, 32, 128, 128);
    x = inception(b, "5b", x, 384, 192, 384, 48, 128, 128);

    b.avgpool("pool5/7x7_s1", 7, 1);
    b.dropout("pool5/drop");
    b.fc("loss3/classifier", 1000);
    b.softmax_("prob");

    b.net.meta.arch = "googlenet";
    b.net.meta.native_scale = 224;
    // The auxiliary classifier branches of the published net are omitted;
    // they feed nothing on the inference path to the inception outputs.
    b.net.fusion_taps = {"inception-3b/output", "inception-4a/output", "inception-4b/output",
                         "inception-4c/output", "inception-4d/output", "inception-4e/output",
                         "inception-5a/output", "inception-5b/output"};
    b.net.feature_tap = "inception-5b/output";
    b.net.feature_pool = PoolModeKind::max;
    return b.net;
}

NetworkSpec tiny_native() {
    Builder b(3, 32);
    b.conv("conv1", 16, 5, 1, 2);
    b.relu_("relu1");
    b.maxpool("pool1", 2, 2);
    b.conv("conv2", 32, 3, 1, 1);
    b.relu_("relu2");
    b.maxpool("pool2", 2, 2);
    b.conv("conv3", 64, 3, 1, 1);
    b.relu_("relu3");
    b.maxpool("pool3", 2, 2);
    b.fc("fc4", 128);
    b.relu_("relu4");
    b.softmax_("prob");

    b.net.meta.arch = "tiny";
    b.net.meta.native_scale = 32;
    b.net.fusion_taps = {"conv1", "conv2", "conv3", "fc4"};
    b.net.feature_tap = "fc4";
    b.net.feature_pool = PoolModeKind::flat;
    return b.net;
}

std::string code_name(const std::string& arch, int scale) {
    if (arch == "alexnet")
        return scale == 227 ? "M1" : "M2";
    if (arch == "vgg16")
        return scale == 224 ? "M3" : "M7";
    if (arch == "vgg19")
        return "M4";
    if (arch == "googlenet")
        return "M5";
    return "T1";
}

} // namespace

NetworkSpec preset(const std::string& name, int scale) {
    NetworkSpec net;
    int native = 0;
    if (name == "alexnet") {
        net = alexnet_native();
        native = 227;
        if (scale != 227 && scale != 451)
            throw lookup_error("preset alexnet supports scales 227 and 451");
    } else if (name == "vgg16") {
        net = vgg_native(16);
        native = 224;
        if (scale != 224 && scale != 448)
            throw lookup_error("preset vgg16 supports scales 224 and 448");
    } else if (name == "vgg19") {
        net = vgg_native(19);
        native = 224;
        if (scale != 224)
            throw lookup_error("preset vgg19 supports scale 224");
    } else if (name == "googlenet") {
        net = googlenet_native();
        native = 224;
        if (scale != 224)
            throw lookup_error("preset googlenet supports scale 224");
    } else if (name == "tiny") {
        net = tiny_native();
        native = 32;
        if (scale != 32)
            throw lookup_error("preset tiny supports scale 32");
    } else {
        throw lookup_error("unknown preset '" + name + "'");
    }

    if (scale != native) {
        net = convolutionalize(net);
        net.in_height = net.in_width = scale;
        // The converted feature layer is pooled over its output grid.
        net.feature_pool = PoolModeKind::sum;
    }
    net.meta.code_name = code_name(name, scale);
    net.validate();
    return net;
}

std::vector<std::string> preset_names() {
    return {"alexnet", "vgg16", "vgg19", "googlenet", "tiny"};
}

} // namespace fusecat
