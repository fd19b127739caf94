#pragma once

#include <string>
#include <utility>

#include "fusecat/image.hpp"
#include "fusecat/network.hpp"
#include "fusecat/weights.hpp"

namespace fusecat {

// A network spec, its weights, and the preprocessing it expects.
struct Model {
    NetworkSpec net;
    WeightStore weights;
    PreprocessSpec preprocess;
};

// .fcm container: magic + version + reserved extension offset, a JSON spec
// section, then raw little-endian float blobs. The blob section round-trips
// bit-exactly. Loading validates the weight store against the spec before
// returning, so a loaded model can never fail shape checks mid-forward.
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

// In-memory variants (used by save/load and the fuzz tests).
std::vector<uint8_t> serialize_model(const Model& model);
Model parse_model(const std::vector<uint8_t>& bytes);

// Builds a preset model with seeded random weights and a matching
// preprocess spec (warp resize, zero channel means).
Model make_preset_model(const std::string& preset_name, int scale, uint64_t seed);

} // namespace fusecat
