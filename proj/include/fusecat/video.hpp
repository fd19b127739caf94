#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fusecat/descriptor.hpp"

namespace fusecat {

// Fixed-interval keyframe sampling plan.
struct KeyframePlan {
    double interval_seconds = 2.0;
    double offset_seconds = 0.0;
    std::optional<int64_t> max_frames;
};

// Timestamps offset, offset+interval, ... strictly below the duration. Any
// positive duration yields at least one frame (t = 0); zero duration none.
std::vector<double> sample_timestamps(double duration_seconds, const KeyframePlan& plan);

enum class FrameAggregation { mean, max };

// Frame descriptors -> one video descriptor (elementwise mean or max,
// then L2 normalization).
Descriptor aggregate_video(std::span<const Descriptor> frames,
                           FrameAggregation how = FrameAggregation::mean);

} // namespace fusecat
