#include "fwaudit/md5.hpp"

#include <openssl/evp.h>

#include <cstdio>

namespace fwaudit {

Digest md5(ByteSpan data) {
    Digest d;
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_md5(), nullptr);
    return d;
}

std::string Digest::hex() const {
    std::string out;
    out.reserve(32);
    char buf[3];
    for (uint8_t b : bytes) {
        snprintf(buf, sizeof buf, "%02x", b);
        out += buf;
    }
    return out;
}

}  // namespace fwaudit
