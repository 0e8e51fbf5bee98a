#include "fwaudit/archive.hpp"

#include <cstring>
#include <set>

#include "fwaudit/decompress.hpp"
#include "fwaudit/md5.hpp"

namespace fwaudit::unpack {

namespace {

uint64_t octal_field(ByteSpan b, size_t off, size_t len) {
    uint64_t v = 0;
    for (size_t i = 0; i < len && off + i < b.size(); ++i) {
        uint8_t c = b[off + i];
        if (c >= '0' && c <= '7')
            v = v * 8 + (c - '0');
        else if (c != ' ')
            break;
    }
    return v;
}

}  // namespace

bool looks_rar(ByteSpan b) {
    return b.size() >= 7 && memcmp(b.data(), "Rar!\x1a\x07", 6) == 0;
}

std::vector<std::pair<std::string, ByteBuf>> read_tar(ByteSpan bytes,
                                                      std::vector<std::string>& errors) {
    std::vector<std::pair<std::string, ByteBuf>> out;
    size_t pos = 0;
    std::string longname;
    while (pos + 512 <= bytes.size()) {
        ByteSpan hdr = bytes.subspan(pos, 512);
        bool all_zero = true;
        for (uint8_t c : hdr)
            if (c) { all_zero = false; break; }
        if (all_zero) break;  // end-of-archive blocks

        std::string name = rd_cstr(hdr, 0, 100);
        uint64_t size = octal_field(hdr, 124, 12);
        uint8_t typeflag = hdr[156];
        std::string prefix = rd_cstr(hdr, 345, 155);
        if (!prefix.empty()) name = prefix + "/" + name;
        if (!longname.empty()) {
            name = longname;
            longname.clear();
        }

        pos += 512;
        if (size > bytes.size() - pos) {
            errors.push_back("tar entry '" + name + "' truncated");
            break;
        }
        if (typeflag == 'L') {  // GNU long name
            longname = rd_cstr(bytes.subspan(pos, size), 0, size);
        } else if (typeflag == 0 || typeflag == '0') {
            out.emplace_back(name, ByteBuf(bytes.begin() + pos, bytes.begin() + pos + size));
        }
        // Directories, links, and pax headers are skipped.
        pos += (size + 511) / 512 * 512;
    }
    return out;
}

std::vector<std::pair<std::string, ByteBuf>> read_zip(ByteSpan bytes,
                                                      std::vector<std::string>& errors) {
    std::vector<std::pair<std::string, ByteBuf>> out;
    // Walk local file headers; tolerates archives without a central directory.
    size_t pos = 0;
    while (pos + 30 <= bytes.size()) {
        if (!(bytes[pos] == 'P' && bytes[pos + 1] == 'K' && bytes[pos + 2] == 3 &&
              bytes[pos + 3] == 4))
            break;
        uint16_t flags = rd16(bytes, pos + 6, false);
        uint16_t method = rd16(bytes, pos + 8, false);
        uint32_t comp_size = rd32(bytes, pos + 18, false);
        uint32_t uncomp_size = rd32(bytes, pos + 22, false);
        uint16_t name_len = rd16(bytes, pos + 26, false);
        uint16_t extra_len = rd16(bytes, pos + 28, false);
        if (pos + 30 + name_len + extra_len > bytes.size()) {
            errors.push_back("zip local header truncated");
            break;
        }
        std::string name(reinterpret_cast<const char*>(bytes.data() + pos + 30), name_len);
        size_t data_off = pos + 30 + name_len + extra_len;
        if (flags & 0x8) {
            // Streamed entries put sizes in a trailing descriptor; without the
            // central directory walk we cannot bound them reliably.
            errors.push_back("zip entry '" + name + "' uses a data descriptor; skipped");
            break;
        }
        if (data_off + comp_size > bytes.size()) {
            errors.push_back("zip entry '" + name + "' truncated");
            break;
        }
        ByteSpan payload = bytes.subspan(data_off, comp_size);
        if (!name.empty() && name.back() != '/') {
            if (method == 0) {
                out.emplace_back(name, ByteBuf(payload.begin(), payload.end()));
            } else if (method == 8) {
                if (auto inf = inflate_raw(payload, uncomp_size))
                    out.emplace_back(name, std::move(*inf));
                else
                    errors.push_back("zip entry '" + name + "' failed to inflate");
            } else {
                errors.push_back("zip entry '" + name + "' uses unsupported method " +
                                 std::to_string(method));
            }
        }
        pos = data_off + comp_size;
    }
    if (out.empty() && errors.empty()) errors.push_back("zip contained no file entries");
    return out;
}

namespace {

void expand_into(ByteSpan bytes, const std::string& name, int depth_left,
                 std::set<Digest>& seen, ExpandDiagnostics& diag,
                 std::vector<ExpandedEntry>& out) {
    bool is_container = looks_tar(bytes) || looks_zip(bytes) || looks_gzip(bytes) ||
                        looks_xz(bytes) || looks_bzip2(bytes) || looks_lzma(bytes);
    if (is_container && depth_left <= 0) {
        diag.depth_exceeded = true;
        out.push_back({name, ByteBuf(bytes.begin(), bytes.end())});
        return;
    }

    Digest d = md5(bytes);
    if (seen.count(d)) {
        // Identical payload already on this path: self-referencing archive.
        ++diag.memoized_hits;
        out.push_back({name, ByteBuf(bytes.begin(), bytes.end())});
        return;
    }
    seen.insert(d);

    auto recurse_list = [&](std::vector<std::pair<std::string, ByteBuf>> entries,
                            const char* sep) {
        for (auto& [ename, edata] : entries)
            expand_into({edata.data(), edata.size()}, name + sep + ename, depth_left - 1,
                        seen, diag, out);
    };

    if (looks_tar(bytes)) {
        std::vector<std::string> errs;
        auto entries = read_tar(bytes, errs);
        for (auto& e : errs) diag.corrupt_entries.push_back(name + ": " + e);
        recurse_list(std::move(entries), "!/");
    } else if (looks_zip(bytes)) {
        std::vector<std::string> errs;
        auto entries = read_zip(bytes, errs);
        for (auto& e : errs) diag.corrupt_entries.push_back(name + ": " + e);
        if (entries.empty()) {
            out.push_back({name, ByteBuf(bytes.begin(), bytes.end())});
        } else {
            recurse_list(std::move(entries), "!/");
        }
    } else if (looks_gzip(bytes)) {
        if (auto dec = gunzip(bytes)) {
            expand_into({dec->data(), dec->size()}, name + "!gunzip", depth_left - 1, seen,
                        diag, out);
        } else {
            diag.corrupt_entries.push_back(name + ": corrupt gzip stream");
            out.push_back({name, ByteBuf(bytes.begin(), bytes.end())});
        }
    } else if (looks_xz(bytes)) {
        if (auto dec = xz_decompress(bytes)) {
            expand_into({dec->data(), dec->size()}, name + "!unxz", depth_left - 1, seen,
                        diag, out);
        } else {
            diag.corrupt_entries.push_back(name + ": corrupt xz stream");
            out.push_back({name, ByteBuf(bytes.begin(), bytes.end())});
        }
    } else if (looks_bzip2(bytes)) {
        if (auto dec = bzip2_decompress(bytes)) {
            expand_into({dec->data(), dec->size()}, name + "!bunzip2", depth_left - 1, seen,
                        diag, out);
        } else {
            diag.corrupt_entries.push_back(name + ": corrupt bzip2 stream");
            out.push_back({name, ByteBuf(bytes.begin(), bytes.end())});
        }
    } else if (looks_lzma(bytes)) {
        if (auto dec = lzma_alone_decompress(bytes)) {
            expand_into({dec->data(), dec->size()}, name + "!unlzma", depth_left - 1, seen,
                        diag, out);
        } else {
            // The LZMA-alone probe is heuristic; treat failures as opaque data.
            out.push_back({name, ByteBuf(bytes.begin(), bytes.end())});
        }
    } else if (looks_rar(bytes)) {
        diag.corrupt_entries.push_back(name + ": rar archive (decoding not built in)");
        out.push_back({name, ByteBuf(bytes.begin(), bytes.end())});
    } else {
        out.push_back({name, ByteBuf(bytes.begin(), bytes.end())});
    }
    seen.erase(d);
}

}  // namespace

std::vector<ExpandedEntry> expand_archive(ByteSpan bytes, int depth_limit,
                                          ExpandDiagnostics& diag,
                                          const std::string& root_name) {
    std::vector<ExpandedEntry> out;
    std::set<Digest> seen;
    expand_into(bytes, root_name, depth_limit, seen, diag, out);
    return out;
}

}  // namespace fwaudit::unpack
