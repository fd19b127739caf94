#pragma once

#include <stdexcept>
#include <string>

namespace fusecat {

// Base class for all errors raised by the toolkit.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor/weight dimensions do not line up.
struct shape_error : error {
    explicit shape_error(const std::string& msg) : error(msg) {}
};

// A layer geometry that would produce an empty output (or is otherwise
// impossible to evaluate).
struct geometry_error : error {
    explicit geometry_error(const std::string& msg) : error(msg) {}
};

// A name lookup failed: unknown tap, preset, layer or class label.
struct lookup_error : error {
    explicit lookup_error(const std::string& msg) : error(msg) {}
};

// A graph rewrite found the network in a shape it cannot handle.
struct structure_error : error {
    explicit structure_error(const std::string& msg) : error(msg) {}
};

// A container file failed its magic/version/bounds/consistency checks.
struct corrupt_file_error : error {
    explicit corrupt_file_error(const std::string& msg) : error(msg) {}
};

// An image could not be decoded.
struct decode_error : error {
    explicit decode_error(const std::string& msg) : error(msg) {}
};

} // namespace fusecat
