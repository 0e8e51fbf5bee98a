#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fwaudit/bytes.hpp"

namespace fwaudit::kernel {

struct KallsymsNotFound : std::runtime_error {
    KallsymsNotFound() : std::runtime_error("kallsyms token table not found") {}
};

// Token table located but the surrounding layout could not be decoded.
struct LayoutUnsupported : std::runtime_error {
    explicit LayoutUnsupported(const std::string& what)
        : std::runtime_error("kallsyms layout unsupported: " + what) {}
};

struct KallsymsDump {
    std::vector<std::string> names;        // symbol names, table order, type stripped
    std::vector<char> types;               // one nm-style type char per name
    std::vector<std::string> token_table;  // the 256 recovered tokens
    ByteBuf names_blob;                    // raw compressed names array
    size_t num_syms = 0;
    size_t token_table_offset = 0;
    size_t token_index_offset = 0;
    size_t names_offset = 0;
    bool big_endian = false;
};

// Locates the in-image kallsyms structures of a decompressed kernel: the
// 256-entry token table, the token index, and the compressed names array;
// decodes names by token substitution. Throws KallsymsNotFound when no token
// table exists, LayoutUnsupported when one exists but cannot be decoded.
KallsymsDump extract_kallsyms_dump(ByteSpan image);

// Decoded names only, in table order.
std::vector<std::string> extract_kallsyms(ByteSpan image);

}  // namespace fwaudit::kernel
