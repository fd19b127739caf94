#include <doctest.h>

#include <random>

#include "fusecat/network.hpp"
#include "fusecat/presets.hpp"
#include "test_helpers.hpp"

using namespace fusecat;
using namespace testutil;

namespace {

// conv(1x1 identity) -> relu toy net used by several cases.
NetworkSpec toy_two_layer() {
    NetworkSpec net;
    net.in_channels = 1;
    net.in_height = net.in_width = 3;
    LayerSpec data;
    data.name = "data";
    data.kind = LayerKind::input;
    net.layers.push_back(data);
    LayerSpec conv;
    conv.name = "conv";
    conv.kind = LayerKind::conv;
    conv.inputs = {"data"};
    conv.out_channels = 1;
    conv.kernel_h = conv.kernel_w = 1;
    net.layers.push_back(conv);
    LayerSpec act;
    act.name = "act";
    act.kind = LayerKind::relu;
    act.inputs = {"conv"};
    net.layers.push_back(act);
    return net;
}

WeightStore identity_conv_weights() {
    WeightStore ws;
    LayerWeights lw;
    lw.weights.shape = {1, 1, 1, 1};
    lw.weights.data = {1.0f};
    lw.bias.shape = {1};
    lw.bias.data = {0.0f};
    ws.entries["conv"] = lw;
    return ws;
}

void check_forward_matches_shapes(const NetworkSpec& net, uint64_t seed,
                                  const std::vector<std::string>& taps) {
    const WeightStore ws = random_weights(net, seed);
    const ShapeMap shapes = infer_shapes(net);
    Tensor in(net.in_channels, net.in_height, net.in_width, 0.1f);
    for (size_t i = 0; i < in.data.size(); ++i)
        in.data[i] = 0.1f + 0.0001f * static_cast<float>(i % 97);
    const TapResult result = forward(net, ws, in, taps);
    for (const std::string& name : taps) {
        const Tensor& t = result.at(name);
        const Shape3& s = shapes.at(name);
        CAPTURE(name);
        REQUIRE(t.channels == s.channels);
        REQUIRE(t.height == s.height);
        REQUIRE(t.width == s.width);
    }
}

std::vector<std::string> all_layer_names(const NetworkSpec& net) {
    std::vector<std::string> names;
    for (const LayerSpec& l : net.layers)
        names.push_back(l.name);
    return names;
}

} // namespace

TEST_CASE("published layer dimensions") {
    const ShapeMap alex = infer_shapes(preset("alexnet", 227));
    CHECK(alex.at("conv1") == Shape3{96, 55, 55});
    CHECK(alex.at("conv2") == Shape3{256, 27, 27});

    const ShapeMap vgg19 = infer_shapes(preset("vgg19", 224));
    CHECK(vgg19.at("conv4-1") == Shape3{512, 28, 28});
    CHECK(vgg19.at("conv5-1") == Shape3{512, 14, 14});

    const ShapeMap goog = infer_shapes(preset("googlenet", 224));
    CHECK(goog.at("inception-5a/output") == Shape3{832, 7, 7});
    CHECK(goog.at("inception-5b/output") == Shape3{1024, 7, 7});
}

TEST_CASE("alexnet preset structure") {
    const NetworkSpec net = preset("alexnet", 227);
    int convs = 0, fcs = 0;
    for (const LayerSpec& l : net.layers) {
        convs += l.kind == LayerKind::conv;
        fcs += l.kind == LayerKind::fc;
    }
    CHECK(convs == 5);
    CHECK(fcs == 3);
    CHECK(net.layer("fc7").out_channels == 4096);
    CHECK(net.fusion_taps.size() == 8);
}

TEST_CASE("googlenet preset structure") {
    const NetworkSpec net = preset("googlenet", 224);
    CHECK(infer_shapes(net).at("inception-5b/output").channels == 1024);
    CHECK(net.feature_tap == "inception-5b/output");
    CHECK(net.fusion_taps.size() == 8);
    CHECK(net.fusion_taps.front() == "inception-3b/output");
}

TEST_CASE("unknown presets and scales are rejected") {
    CHECK_THROWS_AS(preset("resnet", 224), lookup_error);
    CHECK_THROWS_AS(preset("alexnet", 224), lookup_error);
    CHECK_THROWS_AS(preset("vgg19", 448), lookup_error);
}

TEST_CASE("forward shapes agree with infer_shapes on every layer") {
    check_forward_matches_shapes(preset("tiny", 32), 1, all_layer_names(preset("tiny", 32)));
    check_forward_matches_shapes(preset("alexnet", 227), 2,
                                 all_layer_names(preset("alexnet", 227)));
    check_forward_matches_shapes(preset("googlenet", 224), 3,
                                 all_layer_names(preset("googlenet", 224)));
}

TEST_CASE("forward shapes agree with infer_shapes on the vgg stacks") {
    check_forward_matches_shapes(preset("vgg16", 224), 4, all_layer_names(preset("vgg16", 224)));
    check_forward_matches_shapes(preset("vgg19", 224), 5, all_layer_names(preset("vgg19", 224)));
}

TEST_CASE("converted alexnet accepts the jittered scale") {
    const NetworkSpec net = preset("alexnet", 451);
    CHECK(net.size_relaxed);
    CHECK(net.in_height == 451);
    const ShapeMap shapes = infer_shapes(net);
    CHECK(shapes.at("fc6") == Shape3{4096, 8, 8});
    CHECK(shapes.at("fc7") == Shape3{4096, 8, 8});
    check_forward_matches_shapes(net, 6, {"conv1", "pool5", "fc6", "fc7", "prob"});
}

TEST_CASE("vgg16 at 448 produces an 8x8 classifier grid") {
    const NetworkSpec net = preset("vgg16", 448);
    const ShapeMap shapes = infer_shapes(net);
    CHECK(shapes.at("pool5") == Shape3{512, 14, 14});
    CHECK(shapes.at("fc6") == Shape3{4096, 8, 8});
}

TEST_CASE("tap on the input layer returns the input unchanged") {
    const NetworkSpec net = toy_two_layer();
    const WeightStore ws = identity_conv_weights();
    std::mt19937 rng(3);
    Tensor in = random_tensor(1, 3, 3, rng);
    const TapResult result = forward(net, ws, in, {"data"});
    CHECK(result.at("data").data == in.data);
}

TEST_CASE("two-layer toy trace: identity conv then relu") {
    const NetworkSpec net = toy_two_layer();
    const WeightStore ws = identity_conv_weights();
    Tensor in(1, 3, 3, -2.0f);
    const TapResult result = forward(net, ws, in, {"conv", "act"});
    CHECK(result.at("conv").data == in.data);
    for (float v : result.at("act").data)
        CHECK(v == 0.0f);
}

TEST_CASE("early exit taps are bit-identical to a full-graph run") {
    const NetworkSpec net = preset("tiny", 32);
    const WeightStore ws = random_weights(net, 11);
    std::mt19937 rng(12);
    Tensor in = random_tensor(3, 32, 32, rng, 0.0f, 255.0f);
    const TapResult early = forward(net, ws, in, {"conv1"});
    const TapResult full = forward(net, ws, in, {"conv1", "prob"});
    CHECK(early.at("conv1").data == full.at("conv1").data);
}

TEST_CASE("unknown taps raise lookup errors") {
    const NetworkSpec net = toy_two_layer();
    const WeightStore ws = identity_conv_weights();
    Tensor in(1, 3, 3, 0.0f);
    CHECK_THROWS_AS(forward(net, ws, in, {"nope"}), lookup_error);
}

TEST_CASE("weight mismatches name the offending layer") {
    const NetworkSpec net = toy_two_layer();
    WeightStore ws = identity_conv_weights();
    ws.entries["conv"].weights.data = {1.0f, 2.0f};
    ws.entries["conv"].weights.shape = {2, 1, 1, 1};
    Tensor in(1, 3, 3, 0.0f);
    try {
        forward(net, ws, in, {"act"});
        FAIL("expected shape_error");
    } catch (const shape_error& e) {
        CHECK(std::string(e.what()).find("conv") != std::string::npos);
    }
}

TEST_CASE("input shape mismatches are rejected") {
    const NetworkSpec net = toy_two_layer();
    const WeightStore ws = identity_conv_weights();
    Tensor wrong(1, 4, 4, 0.0f);
    CHECK_THROWS_AS(forward(net, ws, wrong, {"act"}), shape_error);
}

TEST_CASE("convolutionalize preserves outputs at native scale") {
    // conv -> relu -> fc -> relu -> fc -> softmax on an 8x8 input.
    NetworkSpec net;
    net.in_channels = 2;
    net.in_height = net.in_width = 8;
    LayerSpec data;
    data.name = "data";
    data.kind = LayerKind::input;
    net.layers.push_back(data);
    LayerSpec conv;
    conv.name = "c1";
    conv.kind = LayerKind::conv;
    conv.inputs = {"data"};
    conv.out_channels = 3;
    conv.kernel_h = conv.kernel_w = 3;
    conv.pad = 1;
    net.layers.push_back(conv);
    LayerSpec act;
    act.name = "r1";
    act.kind = LayerKind::relu;
    act.inputs = {"c1"};
    net.layers.push_back(act);
    LayerSpec fc1;
    fc1.name = "f1";
    fc1.kind = LayerKind::fc;
    fc1.inputs = {"r1"};
    fc1.out_channels = 10;
    net.layers.push_back(fc1);
    LayerSpec act2;
    act2.name = "r2";
    act2.kind = LayerKind::relu;
    act2.inputs = {"f1"};
    net.layers.push_back(act2);
    LayerSpec fc2;
    fc2.name = "f2";
    fc2.kind = LayerKind::fc;
    fc2.inputs = {"r2"};
    fc2.out_channels = 4;
    net.layers.push_back(fc2);
    LayerSpec sm;
    sm.name = "prob";
    sm.kind = LayerKind::softmax;
    sm.inputs = {"f2"};
    net.layers.push_back(sm);

    const WeightStore ws = random_weights(net, 21);
    const NetworkSpec conv_net = convolutionalize(net);
    CHECK(conv_net.layer("f1").kind == LayerKind::conv);
    CHECK(conv_net.layer("f1").kernel_h == 8);
    CHECK(conv_net.layer("f2").kernel_h == 1);

    std::mt19937 rng(22);
    Tensor in = random_tensor(2, 8, 8, rng);
    const TapResult a = forward(net, ws, in, {"prob"});
    const TapResult b = forward(conv_net, ws, in, {"prob"});
    CHECK(a.at("prob").same_shape(b.at("prob")));
    CHECK(max_rel_diff(a.at("prob").data, b.at("prob").data) < 1e-5);

    // The converted graph accepts larger inputs and yields a spatial grid.
    Tensor big = random_tensor(2, 12, 12, rng);
    const TapResult c = forward(conv_net, ws, big, {"f2"});
    CHECK(c.at("f2").height == 5); // (12 - 8) / 1 + 1
    CHECK(c.at("f2").width == 5);

    // Same seed on the converted spec reproduces the same parameter values.
    const WeightStore ws2 = random_weights(conv_net, 21);
    CHECK(ws2.at("f1").weights.data == ws.at("f1").weights.data);
}

TEST_CASE("convolutionalize rejects graphs without fc layers") {
    CHECK_THROWS_AS(convolutionalize(toy_two_layer()), structure_error);
}

TEST_CASE("convolutionalize rejects fc feeding a spatial layer") {
    NetworkSpec net = toy_two_layer();
    LayerSpec fc;
    fc.name = "f1";
    fc.kind = LayerKind::fc;
    fc.inputs = {"act"};
    fc.out_channels = 4;
    net.layers.push_back(fc);
    LayerSpec pool;
    pool.name = "p1";
    pool.kind = LayerKind::maxpool;
    pool.inputs = {"f1"};
    pool.window = 1;
    pool.stride = 1;
    net.layers.push_back(pool);
    CHECK_THROWS_AS(convolutionalize(net), structure_error);
}

TEST_CASE("network validation catches malformed graphs") {
    NetworkSpec net = toy_two_layer();
    net.layers[2].inputs = {"missing"};
    CHECK_THROWS_AS(net.validate(), structure_error);

    NetworkSpec dup = toy_two_layer();
    dup.layers[2].name = "conv";
    CHECK_THROWS_AS(dup.validate(), structure_error);
}

TEST_CASE("random weights are deterministic per seed") {
    const NetworkSpec net = preset("tiny", 32);
    const WeightStore a = random_weights(net, 5);
    const WeightStore b = random_weights(net, 5);
    const WeightStore c = random_weights(net, 6);
    CHECK(a.at("conv1").weights.data == b.at("conv1").weights.data);
    CHECK(a.at("conv1").weights.data != c.at("conv1").weights.data);
    for (float v : a.at("fc4").weights.data) {
        CHECK(v >= -0.05f);
        CHECK(v <= 0.05f);
    }
}

TEST_CASE("validate_weights rejects mismatched stores") {
    const NetworkSpec net = preset("tiny", 32);
    WeightStore ws = random_weights(net, 1);
    CHECK_NOTHROW(validate_weights(net, ws));

    WeightStore missing = ws;
    missing.entries.erase("conv2");
    CHECK_THROWS_AS(validate_weights(net, missing), shape_error);

    WeightStore extra = ws;
    extra.entries["ghost"] = ws.at("conv1");
    CHECK_THROWS_AS(validate_weights(net, extra), shape_error);

    WeightStore bad = ws;
    bad.entries["conv1"].bias.data.pop_back();
    CHECK_THROWS_AS(validate_weights(net, bad), shape_error);
}
