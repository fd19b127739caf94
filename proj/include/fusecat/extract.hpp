#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fusecat/descriptor_io.hpp"
#include "fusecat/manifest.hpp"
#include "fusecat/model_io.hpp"

namespace fusecat {

// One unit of extraction work: an id, an optional label/group, and a way to
// produce the raster (from disk or synthesized in tests).
struct ExtractItem {
    std::string id;
    std::string label;
    std::string group;
    std::function<Raster()> load;
};

// Extracts a descriptor per item on `threads` workers. Row order always
// matches item order.
DescriptorSet extract_batch(const Model& model, const std::vector<TapSpec>& taps,
                            const std::vector<ExtractItem>& items, int threads,
                            const ExtractOptions& opts = {});

// Manifest entries -> extraction items (paths resolved against the manifest).
std::vector<ExtractItem> items_from_manifest(const std::string& manifest_path,
                                             const std::vector<ManifestEntry>& entries);
std::vector<ExtractItem> items_from_frames(const std::string& manifest_path,
                                           const std::vector<FrameEntry>& entries);

// Resolves --taps syntax ("conv1:max,fc7:flat"; bare names mean flat) against
// a network, or the ground-up k-layer fusion list when fuse_layers > 0.
std::vector<TapSpec> resolve_taps(const NetworkSpec& net, const std::string& taps_arg,
                                  int fuse_layers);

} // namespace fusecat
