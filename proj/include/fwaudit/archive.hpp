#pragma once

#include <string>
#include <vector>

#include "fwaudit/bytes.hpp"

namespace fwaudit::unpack {

struct ExpandedEntry {
    std::string path;  // virtual path: "outer.tar!/dir/file"
    ByteBuf data;
};

struct ExpandDiagnostics {
    std::vector<std::string> corrupt_entries;  // per-entry failures, expansion continues
    bool depth_exceeded = false;
    size_t memoized_hits = 0;  // self-referencing / duplicate payloads skipped
};

// Recursively expands zip/gzip/bzip2/tar/xz/lzma containers up to
// depth_limit. Unknown formats pass through unchanged. Cycle-safe: payloads
// already expanded on the current path are not re-entered (digest
// memoization). RAR is recognized but not decoded (licensing-encumbered
// decoders); entries surface as pass-through with a diagnostic.
std::vector<ExpandedEntry> expand_archive(ByteSpan bytes, int depth_limit,
                                          ExpandDiagnostics& diag,
                                          const std::string& root_name = "image");

inline constexpr int kDefaultDepthLimit = 4;

bool looks_rar(ByteSpan b);

// Single-container readers used by expand_archive; exposed for tests.
std::vector<std::pair<std::string, ByteBuf>> read_tar(ByteSpan bytes,
                                                      std::vector<std::string>& errors);
std::vector<std::pair<std::string, ByteBuf>> read_zip(ByteSpan bytes,
                                                      std::vector<std::string>& errors);

}  // namespace fwaudit::unpack
