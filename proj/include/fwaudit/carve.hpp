#pragma once

#include <string>
#include <vector>

#include "fwaudit/bytes.hpp"

namespace fwaudit::unpack {

enum class ArtifactKind { Elf, KernelCandidate, ConfigFile };

struct CarvedArtifact {
    ArtifactKind kind = ArtifactKind::Elf;
    size_t offset = 0;  // byte offset in the parent container
    ByteBuf bytes;
};

struct CarveDiagnostics {
    size_t rejected_magics = 0;      // ELF magic with insane header fields
    size_t failed_candidates = 0;    // compression streams that did not yield a kernel
    size_t parse_false_positives = 0;  // carved ELFs later rejected by the parser
};

// Finds embedded ELF images by magic + header sanity. Artifacts run to the
// next accepted magic or the container end.
std::vector<CarvedArtifact> carve_elves(ByteSpan bytes, CarveDiagnostics& diag);

// One kernel-stream signature: a magic prefix to probe at any offset.
struct KernelSignature {
    std::string name;   // gzip, xz, lzma
    ByteBuf magic;
};

// Built-in signature set; identical content ships in
// data/kernel_signatures.txt (hex magic + name per line).
const std::vector<KernelSignature>& builtin_kernel_signatures();
std::vector<KernelSignature> load_kernel_signatures(const std::string& path);

// Scans for compression-stream magics, decompresses candidates, and keeps
// streams whose plaintext carries a "Linux version " banner. Uncompressed
// regions holding the banner count too.
std::vector<CarvedArtifact> carve_kernels(ByteSpan bytes, CarveDiagnostics& diag,
                                          const std::vector<KernelSignature>& sigs =
                                              builtin_kernel_signatures());

// Kernel build-config recognizer for extracted files.
bool looks_kernel_config(ByteSpan bytes);

}  // namespace fwaudit::unpack
