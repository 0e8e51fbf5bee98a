#pragma once

#include <array>
#include <string>

#include "fwaudit/bytes.hpp"

namespace fwaudit {

// 128-bit content digest used for binary identity and dedup accounting.
// MD5 keeps results comparable with established corpus datasets; it is an
// identity key here, not a security primitive.
struct Digest {
    std::array<uint8_t, 16> bytes{};

    std::string hex() const;
    bool operator==(const Digest&) const = default;
    auto operator<=>(const Digest&) const = default;
};

Digest md5(ByteSpan data);

}  // namespace fwaudit
