#pragma once

#include <string>
#include <vector>

namespace fusecat {

// Dataset manifest: one record per line, `relative-path<TAB>label<TAB>split`.
struct ManifestEntry {
    std::string path;
    std::string label;
    std::string split; // "train" or "test"
};

std::vector<ManifestEntry> load_manifest(const std::string& path);

// Video frame manifest: `video-id<TAB>frame-path<TAB>timestamp`.
struct FrameEntry {
    std::string video_id;
    std::string path;
    double timestamp = 0.0;
};

std::vector<FrameEntry> load_frame_manifest(const std::string& path);

// Video label table: `video-id<TAB>label[<TAB>split]`.
struct VideoLabel {
    std::string video_id;
    std::string label;
    std::string split;
};

std::vector<VideoLabel> load_video_labels(const std::string& path);

// Resolves a manifest-relative path against the manifest's directory.
std::string resolve_relative(const std::string& manifest_path, const std::string& rel);

} // namespace fusecat
