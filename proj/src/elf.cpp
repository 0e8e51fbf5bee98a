#include "fwaudit/elf.hpp"

#include <algorithm>

namespace fwaudit::elf {

namespace {

constexpr uint16_t EM_386 = 3;
constexpr uint16_t EM_MIPS = 8;
constexpr uint16_t EM_PPC = 20;
constexpr uint16_t EM_PPC64 = 21;
constexpr uint16_t EM_ARM = 40;
constexpr uint16_t EM_X86_64 = 62;
constexpr uint16_t EM_AARCH64 = 183;

constexpr uint32_t SHT_SYMTAB = 2;
constexpr uint32_t SHT_STRTAB = 3;
constexpr uint32_t SHT_RELA = 4;
constexpr uint32_t SHT_NOBITS = 8;
constexpr uint32_t SHT_REL = 9;
constexpr uint32_t SHT_DYNSYM = 11;

Machine map_machine(uint16_t code) {
    switch (code) {
        case EM_ARM: return Machine::Arm;
        case EM_AARCH64: return Machine::AArch64;
        case EM_MIPS: return Machine::Mips;
        case EM_386: return Machine::X86;
        case EM_X86_64: return Machine::X64;
        case EM_PPC:
        case EM_PPC64: return Machine::PowerPc;
        default: return Machine::Other;
    }
}

ElfType map_type(uint16_t code) {
    switch (code) {
        case 1: return ElfType::Rel;
        case 2: return ElfType::Exec;
        case 3: return ElfType::Dyn;
        default: return ElfType::Other;
    }
}

struct Layout {
    bool is64;
    bool be;
    uint64_t addr(ByteSpan b, size_t off) const {
        return is64 ? rd64(b, off, be) : rd32(b, off, be);
    }
};

// Symbol table walker shared by .symtab/.dynsym and the segment-only path.
std::vector<SymbolEntry> read_symbols(ByteSpan file, const Layout& l, uint64_t symoff,
                                      uint64_t count, ByteSpan strtab) {
    std::vector<SymbolEntry> out;
    const size_t entsize = l.is64 ? 24 : 16;
    if (count > (1u << 22)) count = 1u << 22;  // damaged-count guard
    for (uint64_t i = 0; i < count; ++i) {
        size_t off = symoff + i * entsize;
        if (off + entsize > file.size()) break;
        SymbolEntry s;
        uint32_t name_off = rd32(file, off, l.be);
        s.name = rd_cstr(strtab, name_off);
        if (l.is64) {
            uint8_t info = rd8(file, off + 4);
            s.type = info & 0xf;
            uint16_t shndx = rd16(file, off + 6, l.be);
            s.value = rd64(file, off + 8, l.be);
            s.defined = shndx != 0;
        } else {
            s.value = rd32(file, off + 4, l.be);
            uint8_t info = rd8(file, off + 12);
            s.type = info & 0xf;
            uint16_t shndx = rd16(file, off + 14, l.be);
            s.defined = shndx != 0;
        }
        out.push_back(std::move(s));
    }
    return out;
}

void read_reloc_section(ByteSpan file, const Layout& l, uint64_t off, uint64_t size,
                        bool rela, const std::vector<SymbolEntry>& syms,
                        std::vector<RelocEntry>& out) {
    const size_t entsize = l.is64 ? (rela ? 24 : 16) : (rela ? 12 : 8);
    for (uint64_t p = off; p + entsize <= off + size && p + entsize <= file.size(); p += entsize) {
        RelocEntry r;
        uint64_t info;
        if (l.is64) {
            r.offset = rd64(file, p, l.be);
            info = rd64(file, p + 8, l.be);
        } else {
            r.offset = rd32(file, p, l.be);
            info = rd32(file, p + 4, l.be);
        }
        uint64_t symidx = l.is64 ? (info >> 32) : (info >> 8);
        if (symidx && symidx < syms.size()) r.symbol = syms[symidx].name;
        out.push_back(std::move(r));
    }
}

}  // namespace

const char* machine_name(Machine m) {
    switch (m) {
        case Machine::Arm: return "arm";
        case Machine::AArch64: return "aarch64";
        case Machine::Mips: return "mips";
        case Machine::X86: return "x86";
        case Machine::X64: return "x64";
        case Machine::PowerPc: return "powerpc";
        default: return "other";
    }
}

const Section* ElfView::find_section(std::string_view name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

const ProgramHeader* ElfView::find_segment(uint32_t type) const {
    for (const auto& p : segments)
        if (p.type == type) return &p;
    return nullptr;
}

std::optional<uint64_t> ElfView::offset_to_vaddr(uint64_t offset) const {
    for (const auto& p : segments) {
        if (p.type != PT_LOAD) continue;
        if (offset >= p.offset && offset < p.offset + p.filesz)
            return p.vaddr + (offset - p.offset);
    }
    return std::nullopt;
}

std::optional<uint64_t> ElfView::vaddr_to_offset(uint64_t vaddr) const {
    for (const auto& p : segments) {
        if (p.type != PT_LOAD) continue;
        if (vaddr >= p.vaddr && vaddr < p.vaddr + p.filesz)
            return p.offset + (vaddr - p.vaddr);
    }
    return std::nullopt;
}

bool ElfView::vaddr_in_exec_segment(uint64_t vaddr) const {
    for (const auto& p : segments)
        if (p.type == PT_LOAD && p.executable() && vaddr >= p.vaddr && vaddr < p.vaddr + p.memsz)
            return true;
    return false;
}

std::optional<uint64_t> ElfView::dynamic_value(int64_t tag) const {
    for (const auto& [t, v] : dynamic_entries)
        if (t == tag) return v;
    return std::nullopt;
}

bool ElfView::has_dynamic_flag_now() const {
    if (dynamic_value(DT_BIND_NOW)) return true;
    if (auto f = dynamic_value(DT_FLAGS); f && (*f & DF_BIND_NOW)) return true;
    if (auto f1 = dynamic_value(DT_FLAGS_1); f1 && (*f1 & DF_1_NOW)) return true;
    return false;
}

std::vector<std::string> ElfView::needed_libraries() const {
    std::vector<std::string> out;
    auto strtab_va = dynamic_value(DT_STRTAB);
    if (!strtab_va) return out;
    auto strtab_off = vaddr_to_offset(*strtab_va);
    if (!strtab_off) return out;
    for (const auto& [t, v] : dynamic_entries)
        if (t == DT_NEEDED) out.push_back(rd_cstr(bytes(), *strtab_off + v));
    return out;
}

std::optional<std::string> ElfView::soname() const {
    auto idx = dynamic_value(DT_SONAME);
    auto strtab_va = dynamic_value(DT_STRTAB);
    if (!idx || !strtab_va) return std::nullopt;
    auto strtab_off = vaddr_to_offset(*strtab_va);
    if (!strtab_off) return std::nullopt;
    return rd_cstr(bytes(), *strtab_off + *idx);
}

ElfView parse_elf(ByteSpan bytes) {
    return parse_elf(ByteBuf(bytes.begin(), bytes.end()));
}

ElfView parse_elf(ByteBuf input) {
    ElfView v;
    v.raw = std::move(input);
    ByteSpan file = v.bytes();

    if (file.size() < 4 || file[0] != 0x7f || file[1] != 'E' || file[2] != 'L' || file[3] != 'F')
        throw ElfError(ElfError::Kind::NotElf, "bad ELF magic");

    if (file.size() < 16)
        throw ElfError(ElfError::Kind::Truncated, "ELF identification truncated");

    uint8_t ei_class = file[4];
    uint8_t ei_data = file[5];
    if (ei_class != 1 && ei_class != 2)
        throw ElfError(ElfError::Kind::UnsupportedClass, "invalid EI_CLASS");
    if (ei_data != 1 && ei_data != 2)
        throw ElfError(ElfError::Kind::UnsupportedClass, "invalid EI_DATA");

    Layout l{ei_class == 2, ei_data == 2};
    v.bitness = l.is64 ? 64 : 32;
    v.endianness = l.be ? Endian::Big : Endian::Little;

    const size_t ehsize = l.is64 ? 64 : 52;
    if (file.size() < ehsize)
        throw ElfError(ElfError::Kind::Truncated, "ELF header truncated");

    v.elf_type_code = rd16(file, 16, l.be);
    v.elf_type = map_type(v.elf_type_code);
    v.machine_code = rd16(file, 18, l.be);
    v.machine = map_machine(v.machine_code);

    uint64_t phoff, shoff;
    uint16_t phentsize, phnum, shentsize, shnum, shstrndx;
    if (l.is64) {
        phoff = rd64(file, 0x20, l.be);
        shoff = rd64(file, 0x28, l.be);
        phentsize = rd16(file, 0x36, l.be);
        phnum = rd16(file, 0x38, l.be);
        shentsize = rd16(file, 0x3a, l.be);
        shnum = rd16(file, 0x3c, l.be);
        shstrndx = rd16(file, 0x3e, l.be);
    } else {
        phoff = rd32(file, 0x1c, l.be);
        shoff = rd32(file, 0x20, l.be);
        phentsize = rd16(file, 0x2a, l.be);
        phnum = rd16(file, 0x2c, l.be);
        shentsize = rd16(file, 0x2e, l.be);
        shnum = rd16(file, 0x30, l.be);
        shstrndx = rd16(file, 0x32, l.be);
    }

    // Program headers are required for everything downstream; a table past
    // EOF is unrecoverable.
    if (phnum) {
        const size_t min_phent = l.is64 ? 56 : 32;
        if (phentsize < min_phent || phoff + static_cast<uint64_t>(phnum) * phentsize > file.size())
            throw ElfError(ElfError::Kind::Truncated, "program header table extends past end of file");
        for (uint16_t i = 0; i < phnum; ++i) {
            size_t off = phoff + static_cast<size_t>(i) * phentsize;
            ProgramHeader p;
            p.type = rd32(file, off, l.be);
            if (l.is64) {
                p.flags = rd32(file, off + 4, l.be);
                p.offset = rd64(file, off + 8, l.be);
                p.vaddr = rd64(file, off + 16, l.be);
                p.filesz = rd64(file, off + 32, l.be);
                p.memsz = rd64(file, off + 40, l.be);
                p.align = rd64(file, off + 48, l.be);
            } else {
                p.offset = rd32(file, off + 4, l.be);
                p.vaddr = rd32(file, off + 8, l.be);
                p.filesz = rd32(file, off + 16, l.be);
                p.memsz = rd32(file, off + 20, l.be);
                p.flags = rd32(file, off + 24, l.be);
                p.align = rd32(file, off + 28, l.be);
            }
            v.segments.push_back(p);
        }
    }

    // Section table: degrade to a segment-only view on any inconsistency.
    // Firmware binaries are routinely carved with damaged tails.
    if (shoff && shnum) {
        const size_t min_shent = l.is64 ? 64 : 40;
        bool ok = shentsize >= min_shent &&
                  shoff + static_cast<uint64_t>(shnum) * shentsize <= file.size() &&
                  shstrndx < shnum;
        std::vector<Section> secs;
        if (ok) {
            auto sh_at = [&](uint16_t i, Section& s) {
                size_t off = shoff + static_cast<size_t>(i) * shentsize;
                uint32_t name_off = rd32(file, off, l.be);
                s.type = rd32(file, off + 4, l.be);
                if (l.is64) {
                    s.flags = rd64(file, off + 8, l.be);
                    s.addr = rd64(file, off + 16, l.be);
                    s.offset = rd64(file, off + 24, l.be);
                    s.size = rd64(file, off + 32, l.be);
                    s.link = rd32(file, off + 40, l.be);
                    s.entsize = rd64(file, off + 56, l.be);
                } else {
                    s.flags = rd32(file, off + 8, l.be);
                    s.addr = rd32(file, off + 12, l.be);
                    s.offset = rd32(file, off + 16, l.be);
                    s.size = rd32(file, off + 20, l.be);
                    s.link = rd32(file, off + 24, l.be);
                    s.entsize = rd32(file, off + 36, l.be);
                }
                return name_off;
            };
            Section shstr;
            sh_at(shstrndx, shstr);
            if (shstr.offset + shstr.size > file.size()) {
                ok = false;
            } else {
                ByteSpan strtab = file.subspan(shstr.offset, shstr.size);
                for (uint16_t i = 0; i < shnum && ok; ++i) {
                    Section s;
                    uint32_t name_off = sh_at(i, s);
                    s.name = rd_cstr(strtab, name_off, 256);
                    // Sections claiming file backing must lie within the image.
                    if (s.type != SHT_NOBITS && s.size &&
                        (s.offset > file.size() || s.offset + s.size > file.size())) {
                        ok = false;
                        break;
                    }
                    secs.push_back(std::move(s));
                }
            }
        }
        if (ok) {
            v.sections = std::move(secs);
            v.sections_valid = true;
        } else {
            v.diagnostics.push_back("section table damaged; degraded to segment-only view");
        }
    }

    // Interpreter.
    if (const auto* interp = v.find_segment(PT_INTERP);
        interp && interp->offset + interp->filesz <= file.size() && interp->filesz) {
        v.interpreter = rd_cstr(file, interp->offset, interp->filesz);
    }

    // Dynamic entries from the PT_DYNAMIC segment.
    if (const auto* dyn = v.find_segment(PT_DYNAMIC);
        dyn && dyn->offset < file.size()) {
        const size_t entsize = l.is64 ? 16 : 8;
        uint64_t end = std::min<uint64_t>(dyn->offset + dyn->filesz, file.size());
        for (uint64_t p = dyn->offset; p + entsize <= end; p += entsize) {
            int64_t tag = l.is64 ? static_cast<int64_t>(rd64(file, p, l.be))
                                 : static_cast<int32_t>(rd32(file, p, l.be));
            uint64_t val = l.addr(file, p + (l.is64 ? 8 : 4));
            if (tag == DT_NULL) break;
            v.dynamic_entries.emplace_back(tag, val);
        }
    }

    // Dynamic symbols: prefer sections, fall back to DT_SYMTAB walking.
    const Section* dynsym_sec = nullptr;
    if (v.sections_valid) {
        for (const auto& s : v.sections)
            if (s.type == SHT_DYNSYM) { dynsym_sec = &s; break; }
    }
    if (dynsym_sec && dynsym_sec->link < v.sections.size()) {
        const Section& str = v.sections[dynsym_sec->link];
        if (str.offset + str.size <= file.size()) {
            ByteSpan strtab = file.subspan(str.offset, str.size);
            uint64_t count = dynsym_sec->entsize ? dynsym_sec->size / dynsym_sec->entsize
                                                 : dynsym_sec->size / (l.is64 ? 24 : 16);
            v.dynamic_symbols = read_symbols(file, l, dynsym_sec->offset, count, strtab);
        }
    } else if (!v.dynamic_entries.empty()) {
        auto symtab_va = v.dynamic_value(DT_SYMTAB);
        auto strtab_va = v.dynamic_value(DT_STRTAB);
        auto strsz = v.dynamic_value(DT_STRSZ);
        if (symtab_va && strtab_va) {
            auto symoff = v.vaddr_to_offset(*symtab_va);
            auto stroff = v.vaddr_to_offset(*strtab_va);
            if (symoff && stroff) {
                uint64_t count = 0;
                // DT_HASH gives the exact symbol count (nchain).
                if (auto hash_va = v.dynamic_value(DT_HASH)) {
                    if (auto hoff = v.vaddr_to_offset(*hash_va))
                        count = rd32(file, *hoff + 4, l.be);
                }
                if (!count && *strtab_va > *symtab_va) {
                    // Common layout: .dynsym immediately precedes .dynstr.
                    count = (*strtab_va - *symtab_va) / (l.is64 ? 24 : 16);
                }
                uint64_t strtab_size = strsz ? *strsz : file.size() - *stroff;
                if (*stroff + strtab_size > file.size()) strtab_size = file.size() - *stroff;
                ByteSpan strtab = file.subspan(*stroff, strtab_size);
                v.dynamic_symbols = read_symbols(file, l, *symoff, count, strtab);
            }
        }
    }

    // Static symbols and relocation entries need the section table.
    if (v.sections_valid) {
        for (const auto& s : v.sections) {
            if (s.type == SHT_SYMTAB && s.link < v.sections.size()) {
                const Section& str = v.sections[s.link];
                if (str.offset + str.size <= file.size()) {
                    ByteSpan strtab = file.subspan(str.offset, str.size);
                    uint64_t count = s.entsize ? s.size / s.entsize : s.size / (l.is64 ? 24 : 16);
                    v.static_symbols = read_symbols(file, l, s.offset, count, strtab);
                }
            }
        }
        for (const auto& s : v.sections) {
            if (s.type != SHT_REL && s.type != SHT_RELA) continue;
            const auto& syms = s.link < v.sections.size() &&
                                       v.sections[s.link].type == SHT_SYMTAB
                                   ? v.static_symbols
                                   : v.dynamic_symbols;
            read_reloc_section(file, l, s.offset, s.size, s.type == SHT_RELA, syms,
                               v.relocations);
        }
    } else {
        // Segment-only relocations via DT_JMPREL / DT_REL / DT_RELA.
        constexpr int64_t DT_RELA_ = 7, DT_RELASZ = 8, DT_REL_ = 17, DT_RELSZ = 18;
        constexpr int64_t DT_JMPREL = 23, DT_PLTRELSZ = 2, DT_PLTREL = 20;
        auto add = [&](int64_t tag, int64_t size_tag, bool rela) {
            auto va = v.dynamic_value(tag);
            auto sz = v.dynamic_value(size_tag);
            if (!va || !sz) return;
            if (auto off = v.vaddr_to_offset(*va))
                read_reloc_section(file, l, *off, *sz, rela, v.dynamic_symbols, v.relocations);
        };
        add(DT_RELA_, DT_RELASZ, true);
        add(DT_REL_, DT_RELSZ, false);
        if (auto pltrel = v.dynamic_value(DT_PLTREL))
            add(DT_JMPREL, DT_PLTRELSZ, *pltrel == 7);
    }

    return v;
}

std::vector<size_t> find_string(const ElfView& view, ByteSpan needle) {
    return find_all(view.bytes(), needle);
}

std::vector<size_t> find_string(const ElfView& view, std::string_view needle) {
    return find_all(view.bytes(), as_bytes(needle));
}

}  // namespace fwaudit::elf
