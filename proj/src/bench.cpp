#include "fusecat/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <random>

#include "fusecat/descriptor.hpp"
#include "fusecat/threading.hpp"

namespace fusecat {

std::string cpu_description() {
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("model name", 0) == 0) {
            const size_t colon = line.find(':');
            if (colon != std::string::npos) {
                size_t start = colon + 1;
                while (start < line.size() && line[start] == ' ')
                    ++start;
                return line.substr(start);
            }
        }
    }
    return "unknown";
}

BenchReport bench(const Model& model, int iterations, int warmup_iterations, int threads,
                  uint64_t seed) {
    if (iterations < 1)
        throw error("bench: iterations must be >= 1");
    if (warmup_iterations < 0)
        throw error("bench: warmup must be >= 0");
    if (threads < 1)
        throw error("bench: threads must be >= 1");

    // A small pool of distinct noise frames, cycled across iterations.
    const int distinct = std::min(iterations, 4);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> byte(0, 255);
    std::vector<Raster> frames;
    frames.reserve(static_cast<size_t>(distinct));
    const int raster_scale = std::max(model.preprocess.target_scale, 8);
    for (int f = 0; f < distinct; ++f) {
        Raster r(raster_scale, raster_scale);
        for (uint8_t& v : r.rgb)
            v = static_cast<uint8_t>(byte(rng));
        frames.push_back(std::move(r));
    }

    const TapSpec feature{model.net.feature_tap, model.net.feature_pool};
    const std::vector<TapSpec> taps = {feature};

    auto run_frame = [&](int index, LayerTimings* timings) {
        const Raster& raster = frames[static_cast<size_t>(index % distinct)];
        const Tensor input = preprocess(raster, model.preprocess);
        std::vector<std::string> names = {feature.layer};
        const TapResult result = forward(model.net, model.weights, input, names, timings);
        const Tensor& map = result.at(feature.layer);
        switch (feature.mode) {
        case PoolMode::flat: (void)flatten_concat(map); break;
        case PoolMode::max: (void)spatial_max_pool(map); break;
        case PoolMode::sum: (void)spatial_sum_pool(map); break;
        }
    };

    for (int i = 0; i < warmup_iterations; ++i)
        run_frame(i, nullptr);

    std::vector<double> frame_seconds(static_cast<size_t>(iterations), 0.0);
    std::map<std::string, double> layer_totals;
    std::mutex layer_mutex;

    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(iterations, threads, [&](int64_t i) {
        LayerTimings timings;
        const auto f0 = std::chrono::steady_clock::now();
        run_frame(static_cast<int>(i), &timings);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - f0;
        frame_seconds[static_cast<size_t>(i)] = dt.count();
        std::lock_guard<std::mutex> lock(layer_mutex);
        for (const auto& [name, sec] : timings.seconds)
            layer_totals[name] += sec;
    });
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;

    BenchReport report;
    report.code_name = model.net.meta.code_name;
    report.arch = model.net.meta.arch;
    report.scale = model.net.in_height;
    report.frames_processed = iterations;
    report.wall_seconds = wall.count();
    report.fps = static_cast<double>(iterations) / report.wall_seconds;

    std::vector<double> sorted = frame_seconds;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted.size() % 2 == 1
                              ? sorted[sorted.size() / 2]
                              : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
    double mean = 0.0;
    for (double s : frame_seconds)
        mean += s;
    mean /= static_cast<double>(frame_seconds.size());
    report.median_fps = median > 0.0 ? 1.0 / median : 0.0;
    report.mean_fps = mean > 0.0 ? 1.0 / mean : 0.0;

    // Layer breakdown in graph order.
    for (const LayerSpec& l : model.net.layers) {
        auto it = layer_totals.find(l.name);
        if (it != layer_totals.end())
            report.layer_seconds.push_back({l.name, it->second});
    }
    report.cpu = cpu_description();
    report.threads = threads;
    return report;
}

} // namespace fusecat
