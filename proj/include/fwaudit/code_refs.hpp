#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fwaudit/elf.hpp"

namespace fwaudit::elf {

// One code location whose encoded immediate/literal resolves to a target
// virtual address.
struct CodeRef {
    uint64_t file_offset = 0;
    uint64_t vaddr = 0;       // address of the referencing site
    std::string kind;         // "literal_pool", "movw_movt", "adrp_add", ...
};

// Scans executable segments for encoded references to target_vaddr.
// Lightweight per-architecture immediate/literal matching, not disassembly:
//   arm      - literal-pool words and movw/movt pairs
//   aarch64  - ADRP+ADD pairs composing the full address
//   mips     - lui+addiu / lui+ori pairs
//   x86/x64  - 4-byte absolute immediates, plus rip-relative disp32 on x64
// Returns nullopt when no scanner is registered for the architecture; the
// caller must treat that as "unknown", not "absent".
std::optional<std::vector<CodeRef>> find_code_references(const ElfView& view,
                                                         uint64_t target_vaddr);

}  // namespace fwaudit::elf
