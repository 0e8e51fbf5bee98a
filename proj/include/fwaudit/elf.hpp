#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fwaudit/bytes.hpp"

namespace fwaudit::elf {

enum class Machine { Arm, AArch64, Mips, X86, X64, PowerPc, Other };
enum class Endian { Little, Big };
enum class ElfType { Exec, Dyn, Rel, Other };

const char* machine_name(Machine m);

struct ProgramHeader {
    uint32_t type = 0;
    uint32_t flags = 0;  // PF_X | PF_W | PF_R
    uint64_t offset = 0;
    uint64_t filesz = 0;
    uint64_t vaddr = 0;
    uint64_t memsz = 0;
    uint64_t align = 0;

    bool readable() const { return flags & 4; }
    bool writable() const { return flags & 2; }
    bool executable() const { return flags & 1; }
};

struct Section {
    std::string name;
    uint32_t type = 0;
    uint64_t flags = 0;
    uint64_t addr = 0;
    uint64_t offset = 0;
    uint64_t size = 0;
    uint32_t link = 0;
    uint64_t entsize = 0;
};

struct SymbolEntry {
    std::string name;
    uint64_t value = 0;
    uint8_t type = 0;   // STT_*
    bool defined = false;
};

struct RelocEntry {
    uint64_t offset = 0;
    std::string symbol;
};

// Segment/program header type codes we care about.
inline constexpr uint32_t PT_LOAD = 1;
inline constexpr uint32_t PT_DYNAMIC = 2;
inline constexpr uint32_t PT_INTERP = 3;
inline constexpr uint32_t PT_GNU_STACK = 0x6474e551;
inline constexpr uint32_t PT_GNU_RELRO = 0x6474e552;

// Dynamic tags.
inline constexpr int64_t DT_NULL = 0;
inline constexpr int64_t DT_NEEDED = 1;
inline constexpr int64_t DT_HASH = 4;
inline constexpr int64_t DT_STRTAB = 5;
inline constexpr int64_t DT_SYMTAB = 6;
inline constexpr int64_t DT_STRSZ = 10;
inline constexpr int64_t DT_SYMENT = 11;
inline constexpr int64_t DT_SONAME = 14;
inline constexpr int64_t DT_BIND_NOW = 24;
inline constexpr int64_t DT_FLAGS = 30;
inline constexpr int64_t DT_FLAGS_1 = 0x6ffffffb;
inline constexpr uint64_t DF_BIND_NOW = 0x8;
inline constexpr uint64_t DF_1_NOW = 0x1;

// Read-only projection of one ELF file. Immutable after parse; safe to share
// across workers.
struct ElfView {
    ByteBuf raw;

    Machine machine = Machine::Other;
    uint16_t machine_code = 0;
    int bitness = 0;  // 32 or 64
    Endian endianness = Endian::Little;
    ElfType elf_type = ElfType::Other;
    uint16_t elf_type_code = 0;

    std::vector<ProgramHeader> segments;
    std::vector<Section> sections;
    bool sections_valid = false;  // false => degraded to segment-only view

    std::vector<std::pair<int64_t, uint64_t>> dynamic_entries;
    std::vector<SymbolEntry> dynamic_symbols;
    std::vector<SymbolEntry> static_symbols;
    std::vector<RelocEntry> relocations;
    std::optional<std::string> interpreter;

    std::vector<std::string> diagnostics;

    ByteSpan bytes() const { return {raw.data(), raw.size()}; }
    bool big_endian() const { return endianness == Endian::Big; }

    const Section* find_section(std::string_view name) const;
    const ProgramHeader* find_segment(uint32_t type) const;

    // vaddr <-> file offset translation through PT_LOAD segments.
    std::optional<uint64_t> offset_to_vaddr(uint64_t offset) const;
    std::optional<uint64_t> vaddr_to_offset(uint64_t vaddr) const;
    bool vaddr_in_exec_segment(uint64_t vaddr) const;

    std::optional<uint64_t> dynamic_value(int64_t tag) const;
    bool has_dynamic_flag_now() const;  // BIND_NOW / DT_BIND_NOW / DF_1_NOW
    std::vector<std::string> needed_libraries() const;
    std::optional<std::string> soname() const;
};

struct ElfError : std::runtime_error {
    enum class Kind { NotElf, UnsupportedClass, Truncated };
    Kind kind;
    ElfError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Parses an ELF of any supported architecture. Tolerates damaged section
// tables by degrading to a segment-only view; throws only on inputs that
// cannot be modeled at all (bad magic, bad ident codes, program header table
// past EOF).
ElfView parse_elf(ByteBuf bytes);
ElfView parse_elf(ByteSpan bytes);

// All non-overlapping occurrences of needle over the whole file image,
// ascending file offsets.
std::vector<size_t> find_string(const ElfView& view, ByteSpan needle);
std::vector<size_t> find_string(const ElfView& view, std::string_view needle);

}  // namespace fwaudit::elf
