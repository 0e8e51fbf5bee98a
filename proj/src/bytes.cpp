#include "fwaudit/bytes.hpp"

#include <algorithm>

namespace fwaudit {

size_t find_first(ByteSpan haystack, ByteSpan needle, size_t from) {
    if (needle.empty() || haystack.size() < needle.size() || from > haystack.size() - needle.size())
        return npos;
    const void* p = memmem(haystack.data() + from, haystack.size() - from,
                           needle.data(), needle.size());
    if (!p) return npos;
    return static_cast<const uint8_t*>(p) - haystack.data();
}

std::vector<size_t> find_all(ByteSpan haystack, ByteSpan needle) {
    std::vector<size_t> out;
    if (needle.empty()) return out;
    size_t pos = 0;
    while ((pos = find_first(haystack, needle, pos)) != npos) {
        out.push_back(pos);
        pos += needle.size();  // non-overlapping
    }
    return out;
}

}  // namespace fwaudit
