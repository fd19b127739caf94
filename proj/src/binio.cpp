#include "fusecat/binio.hpp"

#include <cstring>
#include <fstream>

namespace fusecat {

void BinWriter::u32(uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    bytes(b, 4);
}

void BinWriter::u64(uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<uint8_t>(v >> (8 * i));
    bytes(b, 8);
}

void BinWriter::f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
}

void BinWriter::bytes(const void* p, size_t n) {
    const uint8_t* src = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), src, src + n);
}

void BinWriter::str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
}

void BinWriter::floats(const std::vector<float>& v) {
    // IEEE-754 little-endian; this host layout matches, so bulk-copy.
    static_assert(sizeof(float) == 4);
    bytes(v.data(), v.size() * 4);
}

void BinWriter::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(buf_.data()),
              static_cast<std::streamsize>(buf_.size()));
    if (!out)
        throw error("write failed for '" + path + "'");
}

BinReader BinReader::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw corrupt_file_error("cannot open '" + path + "'");
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    return BinReader(std::move(data));
}

void BinReader::need(size_t n) {
    if (pos_ + n > buf_.size())
        throw corrupt_file_error("truncated file: wanted " + std::to_string(n) +
                                 " bytes at offset " + std::to_string(pos_));
}

uint32_t BinReader::u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | buf_[pos_ + static_cast<size_t>(i)];
    pos_ += 4;
    return v;
}

uint64_t BinReader::u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | buf_[pos_ + static_cast<size_t>(i)];
    pos_ += 8;
    return v;
}

float BinReader::f32() {
    const uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

std::string BinReader::str() {
    const uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
}

void BinReader::floats(std::vector<float>& out, size_t count) {
    if (count > (buf_.size() - pos_) / 4)
        throw corrupt_file_error("truncated file: wanted " + std::to_string(count) +
                                 " floats at offset " + std::to_string(pos_));
    out.resize(count);
    std::memcpy(out.data(), buf_.data() + pos_, count * 4);
    pos_ += count * 4;
}

void BinReader::magic(const char expect[4], const std::string& what) {
    need(4);
    if (std::memcmp(buf_.data() + pos_, expect, 4) != 0)
        throw corrupt_file_error(what + ": bad magic");
    pos_ += 4;
}

} // namespace fusecat
