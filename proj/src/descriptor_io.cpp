#include "fusecat/descriptor_io.hpp"

#include <fstream>

#include <json.hpp>

#include "fusecat/binio.hpp"

namespace fusecat {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'F', 'D', 'S', '1'};

json meta_to_json(const DescriptorSet& set) {
    json j;
    j["model_code"] = set.provenance.model_code;
    j["scale"] = set.provenance.scale;
    json taps = json::array();
    for (const TapSpec& t : set.provenance.taps)
        taps.push_back({t.layer, pool_mode_name(t.mode)});
    j["taps"] = taps;
    if (!set.ids.empty())
        j["ids"] = set.ids;
    if (!set.labels.empty())
        j["labels"] = set.labels;
    if (!set.groups.empty())
        j["groups"] = set.groups;
    if (!set.classes.empty())
        j["classes"] = set.classes;
    return j;
}

void meta_from_json(const json& j, DescriptorSet& set) {
    set.provenance.model_code = j.value("model_code", "");
    set.provenance.scale = j.value("scale", 0);
    if (j.contains("taps"))
        for (const json& t : j["taps"])
            set.provenance.taps.push_back(
                {t.at(0).get<std::string>(), pool_mode_from_name(t.at(1).get<std::string>())});
    if (j.contains("ids"))
        set.ids = j["ids"].get<std::vector<std::string>>();
    if (j.contains("labels"))
        set.labels = j["labels"].get<std::vector<std::string>>();
    if (j.contains("groups"))
        set.groups = j["groups"].get<std::vector<std::string>>();
    if (j.contains("classes"))
        set.classes = j["classes"].get<std::vector<std::string>>();
}

} // namespace

std::vector<uint8_t> serialize_descriptors(const DescriptorSet& set) {
    BinWriter w;
    w.bytes(kMagic, 4);
    w.u32(1);
    w.u64(static_cast<uint64_t>(set.values.rows));
    w.u64(static_cast<uint64_t>(set.values.cols));
    w.str(meta_to_json(set).dump());
    w.floats(set.values.data);
    return w.buffer();
}

DescriptorSet parse_descriptors(const std::vector<uint8_t>& bytes) {
    BinReader r(bytes);
    r.magic(kMagic, "descriptor file");
    const uint32_t version = r.u32();
    if (version != 1)
        throw corrupt_file_error("descriptor file: unsupported version " +
                                 std::to_string(version));
    DescriptorSet set;
    const uint64_t rows = r.u64();
    const uint64_t dim = r.u64();
    const std::string meta_text = r.str();
    try {
        meta_from_json(json::parse(meta_text), set);
    } catch (const json::exception& e) {
        throw corrupt_file_error(std::string("descriptor file: bad meta section: ") + e.what());
    }
    if (rows > 0 && dim > (1ull << 40) / rows)
        throw corrupt_file_error("descriptor file: implausible matrix size");
    set.values.rows = static_cast<int64_t>(rows);
    set.values.cols = static_cast<int64_t>(dim);
    r.floats(set.values.data, static_cast<size_t>(rows * dim));
    if (!r.at_end())
        throw corrupt_file_error("descriptor file: trailing bytes");
    if (!set.ids.empty() && set.ids.size() != rows)
        throw corrupt_file_error("descriptor file: id count does not match row count");
    if (!set.labels.empty() && set.labels.size() != rows)
        throw corrupt_file_error("descriptor file: label count does not match row count");
    if (!set.groups.empty() && set.groups.size() != rows)
        throw corrupt_file_error("descriptor file: group count does not match row count");
    if (!set.classes.empty() && set.classes.size() != dim)
        throw corrupt_file_error("descriptor file: class count does not match column count");
    return set;
}

void save_descriptors(const std::string& path, const DescriptorSet& set) {
    BinWriter w;
    const std::vector<uint8_t> bytes = serialize_descriptors(set);
    w.bytes(bytes.data(), bytes.size());
    w.save(path);
}

DescriptorSet load_descriptors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw corrupt_file_error("cannot open '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return parse_descriptors(bytes);
}

} // namespace fusecat
