#include "fwaudit/decompress.hpp"

#include <lzma.h>
#include <zlib.h>

#include <cstring>

// libbz2's decompress API, declared locally; the runtime ships without its
// header in this environment. The ABI has been stable since 1.0.
extern "C" {
typedef struct {
    char* next_in;
    unsigned int avail_in;
    unsigned int total_in_lo32;
    unsigned int total_in_hi32;
    char* next_out;
    unsigned int avail_out;
    unsigned int total_out_lo32;
    unsigned int total_out_hi32;
    void* state;
    void* (*bzalloc)(void*, int, int);
    void (*bzfree)(void*, void*);
    void* opaque;
} fw_bz_stream;
int BZ2_bzDecompressInit(fw_bz_stream*, int, int);
int BZ2_bzDecompress(fw_bz_stream*);
int BZ2_bzDecompressEnd(fw_bz_stream*);
}

namespace fwaudit::unpack {

bool looks_gzip(ByteSpan b) {
    return b.size() >= 3 && b[0] == 0x1f && b[1] == 0x8b && b[2] == 0x08;
}

bool looks_xz(ByteSpan b) {
    static const uint8_t magic[6] = {0xfd, '7', 'z', 'X', 'Z', 0x00};
    return b.size() >= 6 && memcmp(b.data(), magic, 6) == 0;
}

bool looks_lzma(ByteSpan b) {
    // LZMA-alone: properties byte < 225, then a power-of-two-ish dictionary
    // size, then a 64-bit uncompressed size (often all-ones for streamed).
    if (b.size() < 13) return false;
    if (b[0] >= 225) return false;
    uint32_t dict = rd32(b, 1, false);
    if (dict == 0 || dict > (1u << 28)) return false;
    if ((dict & (dict - 1)) != 0 && dict % (1u << 16) != 0) return false;
    return true;
}

bool looks_bzip2(ByteSpan b) {
    return b.size() >= 4 && b[0] == 'B' && b[1] == 'Z' && b[2] == 'h' &&
           b[3] >= '1' && b[3] <= '9';
}

bool looks_zip(ByteSpan b) {
    return b.size() >= 4 && b[0] == 'P' && b[1] == 'K' && b[2] == 0x03 && b[3] == 0x04;
}

bool looks_tar(ByteSpan b) {
    if (b.size() < 512) return false;
    if (memcmp(b.data() + 257, "ustar", 5) == 0) return true;
    // Pre-POSIX tar: validate the header checksum.
    unsigned long stored = 0;
    bool any_digit = false;
    for (size_t i = 148; i < 156; ++i) {
        uint8_t c = b[i];
        if (c >= '0' && c <= '7') {
            stored = stored * 8 + (c - '0');
            any_digit = true;
        } else if (c != ' ' && c != 0) {
            return false;
        }
    }
    if (!any_digit) return false;
    unsigned long sum = 0;
    for (size_t i = 0; i < 512; ++i) sum += (i >= 148 && i < 156) ? ' ' : b[i];
    return sum == stored;
}

std::optional<ByteBuf> gunzip(ByteSpan in, size_t output_cap) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) return std::nullopt;  // gzip or zlib
    ByteBuf out;
    uint8_t buf[64 * 1024];
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    int rc;
    do {
        zs.next_out = buf;
        zs.avail_out = sizeof buf;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            return std::nullopt;
        }
        out.insert(out.end(), buf, buf + (sizeof buf - zs.avail_out));
        if (out.size() > output_cap) {
            inflateEnd(&zs);
            return std::nullopt;
        }
    } while (rc != Z_STREAM_END && (zs.avail_in || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) return std::nullopt;
    return out;
}

std::optional<ByteBuf> inflate_raw(ByteSpan in, size_t expected_size, size_t output_cap) {
    z_stream zs{};
    if (inflateInit2(&zs, -15) != Z_OK) return std::nullopt;
    ByteBuf out;
    out.reserve(std::min(expected_size, output_cap));
    uint8_t buf[64 * 1024];
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    int rc;
    do {
        zs.next_out = buf;
        zs.avail_out = sizeof buf;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            return std::nullopt;
        }
        out.insert(out.end(), buf, buf + (sizeof buf - zs.avail_out));
        if (out.size() > output_cap) {
            inflateEnd(&zs);
            return std::nullopt;
        }
    } while (rc != Z_STREAM_END && (zs.avail_in || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) return std::nullopt;
    return out;
}

namespace {

std::optional<ByteBuf> lzma_run(lzma_stream* strm, ByteSpan in, size_t output_cap) {
    ByteBuf out;
    uint8_t buf[64 * 1024];
    strm->next_in = in.data();
    strm->avail_in = in.size();
    lzma_ret rc;
    do {
        strm->next_out = buf;
        strm->avail_out = sizeof buf;
        rc = lzma_code(strm, LZMA_FINISH);
        if (rc != LZMA_OK && rc != LZMA_STREAM_END) {
            lzma_end(strm);
            return std::nullopt;
        }
        out.insert(out.end(), buf, buf + (sizeof buf - strm->avail_out));
        if (out.size() > output_cap) {
            lzma_end(strm);
            return std::nullopt;
        }
    } while (rc != LZMA_STREAM_END);
    lzma_end(strm);
    return out;
}

}  // namespace

std::optional<ByteBuf> xz_decompress(ByteSpan in, size_t output_cap) {
    lzma_stream strm = LZMA_STREAM_INIT;
    if (lzma_stream_decoder(&strm, 1ull << 30, 0) != LZMA_OK) return std::nullopt;
    return lzma_run(&strm, in, output_cap);
}

std::optional<ByteBuf> lzma_alone_decompress(ByteSpan in, size_t output_cap) {
    lzma_stream strm = LZMA_STREAM_INIT;
    if (lzma_alone_decoder(&strm, 1ull << 30) != LZMA_OK) return std::nullopt;
    // Many firmware lzma streams declare an unknown size; liblzma handles the
    // all-ones marker. Truncated streams fail in lzma_run.
    return lzma_run(&strm, in, output_cap);
}

std::optional<ByteBuf> bzip2_decompress(ByteSpan in, size_t output_cap) {
    fw_bz_stream bz{};
    if (BZ2_bzDecompressInit(&bz, 0, 0) != 0) return std::nullopt;
    ByteBuf out;
    char buf[64 * 1024];
    bz.next_in = const_cast<char*>(reinterpret_cast<const char*>(in.data()));
    bz.avail_in = static_cast<unsigned>(in.size());
    int rc;
    do {
        bz.next_out = buf;
        bz.avail_out = sizeof buf;
        rc = BZ2_bzDecompress(&bz);
        if (rc != 0 && rc != 4 /*BZ_STREAM_END*/) {
            BZ2_bzDecompressEnd(&bz);
            return std::nullopt;
        }
        out.insert(out.end(), buf, buf + (sizeof buf - bz.avail_out));
        if (out.size() > output_cap) {
            BZ2_bzDecompressEnd(&bz);
            return std::nullopt;
        }
    } while (rc != 4);
    BZ2_bzDecompressEnd(&bz);
    return out;
}

}  // namespace fwaudit::unpack
