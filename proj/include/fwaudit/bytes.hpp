#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fwaudit {

using ByteSpan = std::span<const uint8_t>;
using ByteBuf = std::vector<uint8_t>;

inline ByteSpan as_bytes(std::string_view s) {
    return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

// Bounds-checked scalar readers. Out-of-range reads return 0 so callers can
// validate ranges once up front instead of around every field access.
inline uint8_t rd8(ByteSpan b, size_t off) {
    return off < b.size() ? b[off] : 0;
}

inline uint16_t rd16(ByteSpan b, size_t off, bool big_endian) {
    if (off + 2 > b.size()) return 0;
    return big_endian ? static_cast<uint16_t>(b[off] << 8 | b[off + 1])
                      : static_cast<uint16_t>(b[off + 1] << 8 | b[off]);
}

inline uint32_t rd32(ByteSpan b, size_t off, bool big_endian) {
    if (off + 4 > b.size()) return 0;
    uint32_t v = 0;
    if (big_endian) {
        for (int i = 0; i < 4; ++i) v = v << 8 | b[off + i];
    } else {
        for (int i = 3; i >= 0; --i) v = v << 8 | b[off + i];
    }
    return v;
}

inline uint64_t rd64(ByteSpan b, size_t off, bool big_endian) {
    if (off + 8 > b.size()) return 0;
    uint64_t v = 0;
    if (big_endian) {
        for (int i = 0; i < 8; ++i) v = v << 8 | b[off + i];
    } else {
        for (int i = 7; i >= 0; --i) v = v << 8 | b[off + i];
    }
    return v;
}

// NUL-terminated string starting at off, bounded by the buffer (and max_len).
inline std::string rd_cstr(ByteSpan b, size_t off, size_t max_len = 4096) {
    std::string out;
    for (size_t i = off; i < b.size() && out.size() < max_len && b[i]; ++i)
        out.push_back(static_cast<char>(b[i]));
    return out;
}

// All non-overlapping occurrences of needle, ascending.
std::vector<size_t> find_all(ByteSpan haystack, ByteSpan needle);

// First occurrence at or after `from`, or npos.
size_t find_first(ByteSpan haystack, ByteSpan needle, size_t from = 0);

inline constexpr size_t npos = static_cast<size_t>(-1);

}  // namespace fwaudit
