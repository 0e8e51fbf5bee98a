#pragma once

#include <optional>
#include <string>

#include "fwaudit/bytes.hpp"

namespace fwaudit::unpack {

// Stream-magic probes.
bool looks_gzip(ByteSpan b);
bool looks_xz(ByteSpan b);
bool looks_lzma(ByteSpan b);   // legacy LZMA-alone header heuristic
bool looks_bzip2(ByteSpan b);
bool looks_zip(ByteSpan b);
bool looks_tar(ByteSpan b);

// Bounded decompressors: nullopt on corrupt/overlong streams. output_cap
// guards against decompression bombs.
inline constexpr size_t kDefaultOutputCap = 512ull << 20;

std::optional<ByteBuf> gunzip(ByteSpan in, size_t output_cap = kDefaultOutputCap);
std::optional<ByteBuf> xz_decompress(ByteSpan in, size_t output_cap = kDefaultOutputCap);
std::optional<ByteBuf> lzma_alone_decompress(ByteSpan in, size_t output_cap = kDefaultOutputCap);
std::optional<ByteBuf> bzip2_decompress(ByteSpan in, size_t output_cap = kDefaultOutputCap);
// Raw DEFLATE (zip entry payloads).
std::optional<ByteBuf> inflate_raw(ByteSpan in, size_t expected_size, size_t output_cap = kDefaultOutputCap);

}  // namespace fwaudit::unpack
