#pragma once

#include <string>
#include <vector>

#include "fusecat/descriptor.hpp"
#include "fusecat/ops.hpp"

namespace fusecat {

// On-disk descriptor table: shared provenance, one row per image (or video),
// optional per-row ids/labels, and a rows x dim float32 matrix.
struct DescriptorSet {
    Matrix values;                    // rows x dim
    DescriptorMeta provenance;        // shared; image_id field unused here
    std::vector<std::string> ids;     // per row, may be empty
    std::vector<std::string> labels;  // per row, may be empty
    std::vector<std::string> groups;  // per row video/group ids, may be empty
    std::vector<std::string> classes; // column names when rows are score vectors

    int64_t rows() const { return values.rows; }
    int64_t dim() const { return values.cols; }
};

void save_descriptors(const std::string& path, const DescriptorSet& set);
DescriptorSet load_descriptors(const std::string& path);

std::vector<uint8_t> serialize_descriptors(const DescriptorSet& set);
DescriptorSet parse_descriptors(const std::vector<uint8_t>& bytes);

} // namespace fusecat
