#include "fusecat/manifest.hpp"

#include <filesystem>
#include <fstream>

#include "fusecat/errors.hpp"

namespace fusecat {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw corrupt_file_error("cannot open manifest '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

} // namespace

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::vector<ManifestEntry> entries;
    int lineno = 0;
    for (const std::string& line : read_lines(path)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        const auto cols = split_tabs(line);
        if (cols.size() != 3)
            throw corrupt_file_error("manifest '" + path + "' line " + std::to_string(lineno) +
                                     ": expected path<TAB>label<TAB>split");
        if (cols[2] != "train" && cols[2] != "test")
            throw corrupt_file_error("manifest '" + path + "' line " + std::to_string(lineno) +
                                     ": split must be train or test");
        entries.push_back({cols[0], cols[1], cols[2]});
    }
    return entries;
}

std::vector<FrameEntry> load_frame_manifest(const std::string& path) {
    std::vector<FrameEntry> entries;
    int lineno = 0;
    for (const std::string& line : read_lines(path)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        const auto cols = split_tabs(line);
        if (cols.size() != 3)
            throw corrupt_file_error("frame manifest '" + path + "' line " +
                                     std::to_string(lineno) +
                                     ": expected video-id<TAB>frame-path<TAB>timestamp");
        FrameEntry e;
        e.video_id = cols[0];
        e.path = cols[1];
        try {
            e.timestamp = std::stod(cols[2]);
        } catch (const std::exception&) {
            throw corrupt_file_error("frame manifest '" + path + "' line " +
                                     std::to_string(lineno) + ": bad timestamp");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<VideoLabel> load_video_labels(const std::string& path) {
    std::vector<VideoLabel> entries;
    int lineno = 0;
    for (const std::string& line : read_lines(path)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        const auto cols = split_tabs(line);
        if (cols.size() != 2 && cols.size() != 3)
            throw corrupt_file_error("video labels '" + path + "' line " +
                                     std::to_string(lineno) +
                                     ": expected video-id<TAB>label[<TAB>split]");
        entries.push_back({cols[0], cols[1], cols.size() == 3 ? cols[2] : ""});
    }
    return entries;
}

std::string resolve_relative(const std::string& manifest_path, const std::string& rel) {
    const std::filesystem::path r(rel);
    if (r.is_absolute())
        return rel;
    return (std::filesystem::path(manifest_path).parent_path() / r).string();
}

} // namespace fusecat
