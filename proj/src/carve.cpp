#include "fwaudit/carve.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include "fwaudit/decompress.hpp"

namespace fwaudit::unpack {

namespace {

constexpr std::string_view kBanner = "Linux version ";

// Accept an ELF magic only when the identification and header fields are
// sane; carving scans firmware blobs where stray magics are common.
bool sane_elf_header(ByteSpan b) {
    if (b.size() < 52) return false;
    uint8_t cls = b[4], data = b[5], version = b[6];
    if ((cls != 1 && cls != 2) || (data != 1 && data != 2) || version != 1) return false;
    bool be = data == 2;
    bool is64 = cls == 2;
    if (is64 && b.size() < 64) return false;
    uint16_t ehsize = rd16(b, is64 ? 0x34 : 0x28, be);
    if (ehsize != (is64 ? 64 : 52)) return false;
    uint16_t phentsize = rd16(b, is64 ? 0x36 : 0x2a, be);
    uint16_t phnum = rd16(b, is64 ? 0x38 : 0x2c, be);
    if (phnum && phentsize != (is64 ? 56 : 32)) return false;
    if (phnum > 128) return false;
    return true;
}

}  // namespace

std::vector<CarvedArtifact> carve_elves(ByteSpan bytes, CarveDiagnostics& diag) {
    static const uint8_t magic[4] = {0x7f, 'E', 'L', 'F'};
    std::vector<size_t> accepted;
    size_t pos = 0;
    while ((pos = find_first(bytes, {magic, 4}, pos)) != npos) {
        if (sane_elf_header(bytes.subspan(pos)))
            accepted.push_back(pos);
        else
            ++diag.rejected_magics;
        pos += 4;
    }
    std::vector<CarvedArtifact> out;
    for (size_t i = 0; i < accepted.size(); ++i) {
        size_t start = accepted[i];
        size_t end = i + 1 < accepted.size() ? accepted[i + 1] : bytes.size();
        CarvedArtifact a;
        a.kind = ArtifactKind::Elf;
        a.offset = start;
        a.bytes.assign(bytes.begin() + start, bytes.begin() + end);
        out.push_back(std::move(a));
    }
    return out;
}

const std::vector<KernelSignature>& builtin_kernel_signatures() {
    static const std::vector<KernelSignature> sigs = {
        {"gzip", {0x1f, 0x8b, 0x08}},
        {"xz", {0xfd, '7', 'z', 'X', 'Z', 0x00}},
        {"lzma", {0x5d, 0x00, 0x00}},
    };
    return sigs;
}

std::vector<KernelSignature> load_kernel_signatures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open kernel signatures: " + path);
    std::vector<KernelSignature> out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::string hex, name;
        size_t sp = line.find(' ');
        if (sp == std::string::npos) continue;
        hex = line.substr(0, sp);
        name = line.substr(sp + 1);
        while (!name.empty() && (name.back() == ' ' || name.back() == '\r')) name.pop_back();
        if (hex.size() < 2 || hex.size() % 2) continue;
        KernelSignature sig;
        sig.name = name;
        for (size_t i = 0; i + 1 < hex.size(); i += 2)
            sig.magic.push_back(static_cast<uint8_t>(std::stoi(hex.substr(i, 2), nullptr, 16)));
        out.push_back(std::move(sig));
    }
    return out;
}

std::vector<CarvedArtifact> carve_kernels(ByteSpan bytes, CarveDiagnostics& diag,
                                          const std::vector<KernelSignature>& sigs) {
    std::vector<CarvedArtifact> out;

    // Uncompressed path: the container itself carries a banner.
    if (find_first(bytes, as_bytes(kBanner)) != npos) {
        CarvedArtifact a;
        a.kind = ArtifactKind::KernelCandidate;
        a.offset = 0;
        a.bytes.assign(bytes.begin(), bytes.end());
        out.push_back(std::move(a));
        return out;
    }

    for (const auto& sig : sigs) {
        size_t pos = 0;
        while ((pos = find_first(bytes, {sig.magic.data(), sig.magic.size()}, pos)) != npos) {
            ByteSpan tail = bytes.subspan(pos);
            std::optional<ByteBuf> dec;
            if (sig.name == "gzip" && looks_gzip(tail))
                dec = gunzip(tail);
            else if (sig.name == "xz" && looks_xz(tail))
                dec = xz_decompress(tail);
            else if (sig.name == "lzma" && looks_lzma(tail))
                dec = lzma_alone_decompress(tail);
            if (dec && find_first({dec->data(), dec->size()}, as_bytes(kBanner)) != npos) {
                CarvedArtifact a;
                a.kind = ArtifactKind::KernelCandidate;
                a.offset = pos;
                a.bytes = std::move(*dec);
                out.push_back(std::move(a));
                pos += sig.magic.size();
                continue;
            }
            if (dec || looks_gzip(tail) || looks_xz(tail)) ++diag.failed_candidates;
            pos += sig.magic.size();
        }
    }
    return out;
}

bool looks_kernel_config(ByteSpan bytes) {
    if (bytes.size() < 16 || bytes.size() > (8u << 20)) return false;
    // Textual, with a meaningful density of CONFIG_ lines.
    size_t sample = std::min<size_t>(bytes.size(), 64 * 1024);
    size_t config_lines = 0, lines = 0;
    size_t pos = 0;
    while (pos < sample) {
        size_t nl = find_first(bytes.subspan(0, sample), as_bytes("\n"), pos);
        size_t end = nl == npos ? sample : nl;
        ByteSpan line = bytes.subspan(pos, end - pos);
        for (uint8_t c : line)
            if (c == 0 || (c > 0x7e)) return false;
        ++lines;
        auto starts_with = [&](std::string_view p) {
            return line.size() >= p.size() && memcmp(line.data(), p.data(), p.size()) == 0;
        };
        if (starts_with("CONFIG_") || starts_with("# CONFIG_")) ++config_lines;
        if (nl == npos) break;
        pos = nl + 1;
    }
    return lines >= 4 && config_lines * 2 >= lines;
}

}  // namespace fwaudit::unpack
