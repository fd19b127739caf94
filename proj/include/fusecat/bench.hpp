#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusecat/model_io.hpp"

namespace fusecat {

struct LayerTimeEntry {
    std::string name;
    double seconds = 0.0; // total across timed frames
};

struct BenchReport {
    std::string code_name;
    std::string arch;
    int scale = 0;
    int64_t frames_processed = 0;
    double wall_seconds = 0.0;
    double fps = 0.0;        // frames_processed / wall_seconds
    double median_fps = 0.0; // 1 / median per-frame seconds
    double mean_fps = 0.0;   // 1 / mean per-frame seconds
    std::vector<LayerTimeEntry> layer_seconds;
    std::string cpu;
    int threads = 1;
};

// Times the full per-frame pipeline (preprocess -> forward -> descriptor)
// on seeded random rasters. Warmup frames run first and are not counted.
BenchReport bench(const Model& model, int iterations, int warmup_iterations, int threads,
                  uint64_t seed);

std::string cpu_description();

} // namespace fusecat
