#include "fusecat/video.hpp"

#include <algorithm>
#include <cmath>

namespace fusecat {

std::vector<double> sample_timestamps(double duration_seconds, const KeyframePlan& plan) {
    if (plan.interval_seconds <= 0.0)
        throw error("keyframe interval must be positive");
    if (duration_seconds < 0.0)
        throw error("duration must be nonnegative");

    std::vector<double> out;
    if (duration_seconds == 0.0)
        return out;
    for (int64_t k = 0;; ++k) {
        const double t = plan.offset_seconds + static_cast<double>(k) * plan.interval_seconds;
        if (t >= duration_seconds)
            break;
        out.push_back(t);
        if (plan.max_frames && static_cast<int64_t>(out.size()) >= *plan.max_frames)
            return out;
    }
    // Short-clip floor: every nonempty video contributes at least one frame.
    if (out.empty())
        out.push_back(0.0);
    return out;
}

Descriptor aggregate_video(std::span<const Descriptor> frames, FrameAggregation how) {
    if (frames.empty())
        throw error("aggregate_video: no frame descriptors");
    const size_t dim = frames[0].values.size();
    for (const Descriptor& d : frames)
        if (d.values.size() != dim)
            throw shape_error("aggregate_video: frame descriptor dimensions differ");

    std::vector<double> acc(dim, how == FrameAggregation::max
                                     ? -std::numeric_limits<double>::infinity()
                                     : 0.0);
    for (const Descriptor& d : frames) {
        for (size_t j = 0; j < dim; ++j) {
            if (how == FrameAggregation::max)
                acc[j] = std::max(acc[j], static_cast<double>(d.values[j]));
            else
                acc[j] += d.values[j];
        }
    }
    std::vector<float> agg(dim);
    for (size_t j = 0; j < dim; ++j)
        agg[j] = static_cast<float>(how == FrameAggregation::max
                                        ? acc[j]
                                        : acc[j] / static_cast<double>(frames.size()));

    Descriptor out;
    out.values = l2_normalize(agg);
    out.meta = frames[0].meta;
    return out;
}

} // namespace fusecat
