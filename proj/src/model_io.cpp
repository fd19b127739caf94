#include "fusecat/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "fusecat/binio.hpp"
#include "fusecat/presets.hpp"

namespace fusecat {

using nlohmann::json;

namespace {

json layer_to_json(const LayerSpec& l) {
    json j;
    j["name"] = l.name;
    j["kind"] = layer_kind_name(l.kind);
    if (!l.inputs.empty())
        j["inputs"] = l.inputs;
    switch (l.kind) {
    case LayerKind::conv:
        j["out"] = l.out_channels;
        j["kh"] = l.kernel_h;
        j["kw"] = l.kernel_w;
        j["stride"] = l.stride;
        j["pad"] = l.pad;
        if (l.from_fc)
            j["from_fc"] = true;
        break;
    case LayerKind::fc:
        j["out"] = l.out_channels;
        break;
    case LayerKind::maxpool:
    case LayerKind::avgpool:
        j["window"] = l.window;
        j["stride"] = l.stride;
        if (l.pad != 0)
            j["pad"] = l.pad;
        if (l.ceil_pool)
            j["ceil"] = true;
        break;
    case LayerKind::lrn:
        j["local_size"] = l.local_size;
        j["alpha"] = l.alpha;
        j["beta"] = l.beta;
        j["k"] = l.k;
        break;
    default:
        break;
    }
    return j;
}

LayerSpec layer_from_json(const json& j) {
    LayerSpec l;
    l.name = j.at("name").get<std::string>();
    l.kind = layer_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("inputs"))
        l.inputs = j.at("inputs").get<std::vector<std::string>>();
    l.out_channels = j.value("out", 0);
    l.kernel_h = j.value("kh", 0);
    l.kernel_w = j.value("kw", 0);
    l.stride = j.value("stride", 1);
    l.pad = j.value("pad", 0);
    l.window = j.value("window", 0);
    l.ceil_pool = j.value("ceil", false);
    l.local_size = j.value("local_size", 0);
    l.alpha = j.value("alpha", 0.0f);
    l.beta = j.value("beta", 0.0f);
    l.k = j.value("k", 1.0f);
    l.from_fc = j.value("from_fc", false);
    return l;
}

json net_to_json(const NetworkSpec& net) {
    json j;
    j["in"] = {net.in_channels, net.in_height, net.in_width};
    j["meta"] = {{"code_name", net.meta.code_name},
                 {"arch", net.meta.arch},
                 {"native_scale", net.meta.native_scale}};
    if (net.size_relaxed) {
        j["size_relaxed"] = true;
        j["min_in"] = {net.min_in_height, net.min_in_width};
    }
    if (!net.fusion_taps.empty())
        j["fusion_taps"] = net.fusion_taps;
    if (!net.feature_tap.empty()) {
        j["feature_tap"] = net.feature_tap;
        j["feature_pool"] = net.feature_pool == PoolModeKind::flat  ? "flat"
                            : net.feature_pool == PoolModeKind::max ? "max"
                                                                    : "sum";
    }
    json layers = json::array();
    for (const LayerSpec& l : net.layers)
        layers.push_back(layer_to_json(l));
    j["layers"] = layers;
    return j;
}

NetworkSpec net_from_json(const json& j) {
    NetworkSpec net;
    const auto in = j.at("in");
    net.in_channels = in.at(0).get<int>();
    net.in_height = in.at(1).get<int>();
    net.in_width = in.at(2).get<int>();
    if (j.contains("meta")) {
        net.meta.code_name = j["meta"].value("code_name", "");
        net.meta.arch = j["meta"].value("arch", "");
        net.meta.native_scale = j["meta"].value("native_scale", 0);
    }
    net.size_relaxed = j.value("size_relaxed", false);
    if (j.contains("min_in")) {
        net.min_in_height = j["min_in"].at(0).get<int>();
        net.min_in_width = j["min_in"].at(1).get<int>();
    }
    if (j.contains("fusion_taps"))
        net.fusion_taps = j["fusion_taps"].get<std::vector<std::string>>();
    net.feature_tap = j.value("feature_tap", "");
    const std::string fp = j.value("feature_pool", "flat");
    net.feature_pool = fp == "max"   ? PoolModeKind::max
                       : fp == "sum" ? PoolModeKind::sum
                                     : PoolModeKind::flat;
    for (const json& lj : j.at("layers"))
        net.layers.push_back(layer_from_json(lj));
    return net;
}

json preprocess_to_json(const PreprocessSpec& p) {
    return {{"scale", p.target_scale},
            {"means", {p.channel_means[0], p.channel_means[1], p.channel_means[2]}},
            {"resize", p.resize == ResizeMode::warp ? "warp" : "crop"}};
}

PreprocessSpec preprocess_from_json(const json& j) {
    PreprocessSpec p;
    p.target_scale = j.value("scale", 0);
    if (j.contains("means"))
        for (int i = 0; i < 3; ++i)
            p.channel_means[static_cast<size_t>(i)] = j["means"].at(i).get<float>();
    p.resize = j.value("resize", "warp") == "crop" ? ResizeMode::shorter_side_center_crop
                                                   : ResizeMode::warp;
    return p;
}

void write_blob(BinWriter& w, const std::string& name, const Blob& b) {
    w.str(name);
    w.u32(static_cast<uint32_t>(b.shape.size()));
    for (int64_t d : b.shape)
        w.u64(static_cast<uint64_t>(d));
    w.u64(b.data.size() * 4);
    w.floats(b.data);
}

Blob read_blob(BinReader& r, std::string& name) {
    name = r.str();
    Blob b;
    const uint32_t rank = r.u32();
    if (rank > 8)
        throw corrupt_file_error("blob '" + name + "': implausible rank");
    for (uint32_t i = 0; i < rank; ++i)
        b.shape.push_back(static_cast<int64_t>(r.u64()));
    const uint64_t bytes = r.u64();
    if (bytes % 4 != 0)
        throw corrupt_file_error("blob '" + name + "': byte length not a float multiple");
    r.floats(b.data, bytes / 4);
    if (b.size() != static_cast<int64_t>(b.data.size()))
        throw corrupt_file_error("blob '" + name + "': shape does not match data length");
    return b;
}

constexpr char kMagic[4] = {'F', 'C', 'M', '1'};

} // namespace

std::vector<uint8_t> serialize_model(const Model& model) {
    BinWriter w;
    w.bytes(kMagic, 4);
    w.u32(1);  // version
    w.u64(0);  // reserved: offset of a future import-adapter section
    json spec;
    spec["network"] = net_to_json(model.net);
    spec["preprocess"] = preprocess_to_json(model.preprocess);
    w.str(spec.dump());
    w.u64(model.weights.entries.size());
    for (const auto& [name, lw] : model.weights.entries) {
        write_blob(w, name + "/weights", lw.weights);
        write_blob(w, name + "/bias", lw.bias);
    }
    return w.buffer();
}

Model parse_model(const std::vector<uint8_t>& bytes) {
    BinReader r(bytes);
    r.magic(kMagic, "model file");
    const uint32_t version = r.u32();
    if (version != 1)
        throw corrupt_file_error("model file: unsupported version " + std::to_string(version));
    r.u64(); // reserved section offset

    Model m;
    const std::string spec_text = r.str();
    try {
        const json spec = json::parse(spec_text);
        m.net = net_from_json(spec.at("network"));
        m.preprocess = preprocess_from_json(spec.value("preprocess", json::object()));
    } catch (const json::exception& e) {
        throw corrupt_file_error(std::string("model file: bad spec section: ") + e.what());
    }

    const uint64_t blob_count = r.u64();
    for (uint64_t i = 0; i < blob_count; ++i) {
        std::string name;
        Blob b = read_blob(r, name);
        const size_t slash = name.rfind('/');
        if (slash == std::string::npos)
            throw corrupt_file_error("model file: blob name '" + name + "' lacks a role suffix");
        const std::string layer = name.substr(0, slash);
        const std::string role = name.substr(slash + 1);
        if (role == "weights")
            m.weights.entries[layer].weights = std::move(b);
        else if (role == "bias")
            m.weights.entries[layer].bias = std::move(b);
        else
            throw corrupt_file_error("model file: unknown blob role '" + role + "'");
    }
    if (!r.at_end())
        throw corrupt_file_error("model file: trailing bytes after blob section");

    try {
        m.net.validate();
        validate_weights(m.net, m.weights);
    } catch (const error& e) {
        throw corrupt_file_error(std::string("model file: inconsistent contents: ") + e.what());
    }
    return m;
}

void save_model(const std::string& path, const Model& model) {
    BinWriter w;
    const std::vector<uint8_t> bytes = serialize_model(model);
    w.bytes(bytes.data(), bytes.size());
    w.save(path);
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw corrupt_file_error("cannot open '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return parse_model(bytes);
}

Model make_preset_model(const std::string& preset_name, int scale, uint64_t seed) {
    Model m;
    m.net = preset(preset_name, scale);
    m.weights = random_weights(m.net, seed);
    m.preprocess.target_scale = scale;
    m.preprocess.channel_means = {0.0f, 0.0f, 0.0f};
    m.preprocess.resize = ResizeMode::warp;
    return m;
}

} // namespace fusecat
