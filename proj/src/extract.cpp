#include "fusecat/extract.hpp"

#include "fusecat/fusion.hpp"
#include "fusecat/threading.hpp"

namespace fusecat {

DescriptorSet extract_batch(const Model& model, const std::vector<TapSpec>& taps,
                            const std::vector<ExtractItem>& items, int threads,
                            const ExtractOptions& opts) {
    if (items.empty())
        throw error("empty manifest: nothing to extract");

    const int64_t n = static_cast<int64_t>(items.size());
    std::vector<std::vector<float>> rows(static_cast<size_t>(n));
    parallel_for(n, threads, [&](int64_t i) {
        const ExtractItem& item = items[static_cast<size_t>(i)];
        const Raster raster = item.load();
        const Tensor input = preprocess(raster, model.preprocess);
        Descriptor d = extract_descriptor(model.net, model.weights, input, taps, opts);
        rows[static_cast<size_t>(i)] = std::move(d.values);
    });

    DescriptorSet set;
    set.values.rows = n;
    set.values.cols = static_cast<int64_t>(rows[0].size());
    set.values.data.reserve(static_cast<size_t>(n * set.values.cols));
    for (const auto& row : rows) {
        if (static_cast<int64_t>(row.size()) != set.values.cols)
            throw shape_error("extract_batch: inconsistent descriptor dimensions");
        set.values.data.insert(set.values.data.end(), row.begin(), row.end());
    }
    set.provenance.model_code = model.net.meta.code_name;
    set.provenance.taps = taps;
    set.provenance.scale = model.net.in_height;

    bool any_label = false, any_group = false;
    for (const ExtractItem& it : items) {
        any_label |= !it.label.empty();
        any_group |= !it.group.empty();
    }
    for (const ExtractItem& it : items) {
        set.ids.push_back(it.id);
        if (any_label)
            set.labels.push_back(it.label);
        if (any_group)
            set.groups.push_back(it.group);
    }
    return set;
}

std::vector<ExtractItem> items_from_manifest(const std::string& manifest_path,
                                             const std::vector<ManifestEntry>& entries) {
    std::vector<ExtractItem> items;
    items.reserve(entries.size());
    for (const ManifestEntry& e : entries) {
        const std::string full = resolve_relative(manifest_path, e.path);
        items.push_back({e.path, e.label, "", [full] { return load_image(full); }});
    }
    return items;
}

std::vector<ExtractItem> items_from_frames(const std::string& manifest_path,
                                           const std::vector<FrameEntry>& entries) {
    std::vector<ExtractItem> items;
    items.reserve(entries.size());
    for (const FrameEntry& e : entries) {
        const std::string full = resolve_relative(manifest_path, e.path);
        items.push_back({e.path, "", e.video_id, [full] { return load_image(full); }});
    }
    return items;
}

std::vector<TapSpec> resolve_taps(const NetworkSpec& net, const std::string& taps_arg,
                                  int fuse_layers) {
    if (fuse_layers > 0)
        return fusion_tap_selection(net, fuse_layers);

    std::vector<TapSpec> taps;
    size_t start = 0;
    while (start <= taps_arg.size()) {
        size_t comma = taps_arg.find(',', start);
        if (comma == std::string::npos)
            comma = taps_arg.size();
        const std::string item = taps_arg.substr(start, comma - start);
        if (!item.empty()) {
            const size_t colon = item.find(':');
            TapSpec t;
            if (colon == std::string::npos) {
                t.layer = item;
                t.mode = PoolMode::flat;
            } else {
                t.layer = item.substr(0, colon);
                t.mode = pool_mode_from_name(item.substr(colon + 1));
            }
            if (net.index_of(t.layer) < 0)
                throw lookup_error("unknown tap '" + t.layer + "'");
            taps.push_back(std::move(t));
        }
        start = comma + 1;
    }
    if (taps.empty())
        throw error("no taps requested");
    return taps;
}

} // namespace fusecat
