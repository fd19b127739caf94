#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusecat/errors.hpp"

namespace fusecat {

// Little-endian buffer writer for the container formats.
class BinWriter {
public:
    void u32(uint32_t v);
    void u64(uint64_t v);
    void f32(float v);
    void bytes(const void* p, size_t n);
    void str(const std::string& s); // u32 length + raw bytes
    void floats(const std::vector<float>& v);

    const std::vector<uint8_t>& buffer() const { return buf_; }
    void save(const std::string& path) const;

private:
    std::vector<uint8_t> buf_;
};

// Bounds-checked reader; every overrun raises corrupt_file_error.
class BinReader {
public:
    explicit BinReader(std::vector<uint8_t> data) : buf_(std::move(data)) {}
    static BinReader from_file(const std::string& path);

    uint32_t u32();
    uint64_t u64();
    float f32();
    std::string str();
    void floats(std::vector<float>& out, size_t count);
    void magic(const char expect[4], const std::string& what);

    size_t remaining() const { return buf_.size() - pos_; }
    bool at_end() const { return pos_ == buf_.size(); }

private:
    void need(size_t n);
    std::vector<uint8_t> buf_;
    size_t pos_ = 0;
};

} // namespace fusecat
