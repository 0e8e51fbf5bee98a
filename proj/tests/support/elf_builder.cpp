#include "elf_builder.hpp"

#include <cstring>
#include <stdexcept>

namespace testsupport {

namespace {

void wr16(ByteBuf& b, size_t off, uint16_t v, bool be) {
    b[off] = be ? v >> 8 : v & 0xff;
    b[off + 1] = be ? v & 0xff : v >> 8;
}

void wr32(ByteBuf& b, size_t off, uint32_t v, bool be) {
    for (int i = 0; i < 4; ++i)
        b[off + i] = be ? (v >> (8 * (3 - i))) & 0xff : (v >> (8 * i)) & 0xff;
}

void wr64(ByteBuf& b, size_t off, uint64_t v, bool be) {
    for (int i = 0; i < 8; ++i)
        b[off + i] = be ? (v >> (8 * (7 - i))) & 0xff : (v >> (8 * i)) & 0xff;
}

uint64_t align_up(uint64_t v, uint64_t a) { return a ? (v + a - 1) / a * a : v; }

struct StrTab {
    ByteBuf data{0};
    uint32_t add(const std::string& s) {
        if (s.empty()) return 0;
        uint32_t off = static_cast<uint32_t>(data.size());
        data.insert(data.end(), s.begin(), s.end());
        data.push_back(0);
        return off;
    }
};

}  // namespace

ElfBuilder& ElfBuilder::blob(BlobSpec b) {
    blobs_.push_back(std::move(b));
    return *this;
}

ElfBuilder& ElfBuilder::interp(const std::string& path) {
    BlobSpec b;
    b.name = ".interp";
    b.data.assign(path.begin(), path.end());
    b.data.push_back(0);
    b.align = 1;
    blobs_.push_back(std::move(b));
    segments_.push_back({3 /*PT_INTERP*/, 4, {".interp"}, std::nullopt});
    return *this;
}

ElfBuilder& ElfBuilder::dynamic(std::vector<DynEntry> extra) {
    want_dynamic_ = true;
    dyn_extra_ = std::move(extra);
    return *this;
}

ByteBuf ElfBuilder::build() {
    built_vaddr_.clear();
    built_offset_.clear();

    const size_t ehsize = is64_ ? 64 : 52;
    const size_t phentsize = is64_ ? 56 : 32;
    const size_t shentsize = is64_ ? 64 : 40;
    const size_t syment = is64_ ? 24 : 16;
    const size_t relent = is64_ ? 24 : 8;  // RELA on 64, REL on 32

    std::vector<BlobSpec> blobs = blobs_;
    std::vector<SegmentSpec> segments = segments_;

    // Synthesize the dynamic-linking blobs.
    StrTab dynstr;
    std::vector<uint32_t> needed_offs;
    for (const auto& n : needed_) needed_offs.push_back(dynstr.add(n));
    uint32_t soname_off = soname_ ? dynstr.add(*soname_) : 0;

    if (want_dynamic_) {
        ByteBuf symblob(syment * (dynsyms_.size() + 1), 0);
        for (size_t i = 0; i < dynsyms_.size(); ++i) {
            const auto& s = dynsyms_[i];
            size_t off = syment * (i + 1);
            uint32_t name_off = dynstr.add(s.name);
            wr32(symblob, off, name_off, be_);
            if (is64_) {
                symblob[off + 4] = static_cast<uint8_t>(0x10 | s.type);  // GLOBAL
                wr16(symblob, off + 6, s.defined ? 1 : 0, be_);
                wr64(symblob, off + 8, s.value, be_);
            } else {
                wr32(symblob, off + 4, static_cast<uint32_t>(s.value), be_);
                symblob[off + 12] = static_cast<uint8_t>(0x10 | s.type);
                wr16(symblob, off + 14, s.defined ? 1 : 0, be_);
            }
        }

        // Minimal DT_HASH so the segment-only path can recover the count.
        ByteBuf hashblob(8 + 4 * (1 + dynsyms_.size() + 1), 0);
        wr32(hashblob, 0, 1, be_);
        wr32(hashblob, 4, static_cast<uint32_t>(dynsyms_.size() + 1), be_);

        ByteBuf relblob(relent * relocs_.size(), 0);
        for (size_t i = 0; i < relocs_.size(); ++i) {
            uint64_t symidx = 0;
            for (size_t j = 0; j < dynsyms_.size(); ++j)
                if (dynsyms_[j].name == relocs_[i].symbol) symidx = j + 1;
            size_t off = relent * i;
            if (is64_) {
                wr64(relblob, off, relocs_[i].offset, be_);
                wr64(relblob, off + 8, symidx << 32 | 1, be_);
            } else {
                wr32(relblob, off, static_cast<uint32_t>(relocs_[i].offset), be_);
                wr32(relblob, off + 4, static_cast<uint32_t>(symidx << 8 | 1), be_);
            }
        }

        blobs.push_back({".dynstr", 3 /*STRTAB*/, 2, dynstr.data, 0, 1, true});
        blobs.push_back({".dynsym", 11 /*DYNSYM*/, 2, symblob, 0, 8, true});
        blobs.push_back({".hash", 5 /*HASH*/, 2, hashblob, 0, 8, true});
        if (!relocs_.empty())
            blobs.push_back({is64_ ? ".rela.dyn" : ".rel.dyn",
                             is64_ ? 4u : 9u, 2, relblob, 0, 8, true});
        // .dynamic filled after layout (needs addresses); reserve space.
        size_t dynent = is64_ ? 16 : 8;
        size_t ndyn = 6 + needed_offs.size() + (soname_ ? 1 : 0) +
                      (relocs_.empty() ? 0 : 2) + dyn_extra_.size() + 1;
        blobs.push_back({".dynamic", 6 /*DYNAMIC*/, 3, ByteBuf(dynent * ndyn, 0), 0, 8, true});

        segments.push_back({2 /*PT_DYNAMIC*/, 6, {".dynamic"}, std::nullopt});
        segments.push_back({1 /*PT_LOAD*/, 6,
                            relocs_.empty()
                                ? std::vector<std::string>{".dynstr", ".dynsym", ".hash", ".dynamic"}
                                : std::vector<std::string>{".dynstr", ".dynsym", ".hash",
                                                           is64_ ? ".rela.dyn" : ".rel.dyn",
                                                           ".dynamic"},
                            std::nullopt});
    }

    // Static symbol table blobs (non-alloc).
    StrTab strtab;
    if (!symtab_.empty()) {
        ByteBuf symblob(syment * (symtab_.size() + 1), 0);
        for (size_t i = 0; i < symtab_.size(); ++i) {
            const auto& s = symtab_[i];
            size_t off = syment * (i + 1);
            uint32_t name_off = strtab.add(s.name);
            wr32(symblob, off, name_off, be_);
            if (is64_) {
                symblob[off + 4] = static_cast<uint8_t>(0x10 | s.type);
                wr16(symblob, off + 6, s.defined ? 1 : 0, be_);
                wr64(symblob, off + 8, s.value, be_);
            } else {
                wr32(symblob, off + 4, static_cast<uint32_t>(s.value), be_);
                symblob[off + 12] = static_cast<uint8_t>(0x10 | s.type);
                wr16(symblob, off + 14, s.defined ? 1 : 0, be_);
            }
        }
        blobs.push_back({".symtab", 2 /*SYMTAB*/, 0, symblob, 0, 8, true});
        blobs.push_back({".strtab", 3, 0, strtab.data, 0, 1, true});
    }

    // Layout pass: offsets and vaddrs.
    size_t phnum = segments.size();
    uint64_t off = ehsize + phnum * phentsize;
    for (auto& b : blobs) {
        off = align_up(off, b.align);
        built_offset_[b.name] = off;
        bool alloc = b.sh_flags & 2;
        uint64_t va = b.vaddr ? b.vaddr : (alloc ? base_vaddr_ + off : 0);
        built_vaddr_[b.name] = va;
        off += b.data.size();
    }
    uint64_t shoff = align_up(off, 8);

    // Fill .dynamic now that addresses are known.
    if (want_dynamic_) {
        std::vector<DynEntry> entries;
        for (uint32_t noff : needed_offs) entries.push_back({1 /*DT_NEEDED*/, noff});
        if (soname_) entries.push_back({14 /*DT_SONAME*/, soname_off});
        entries.push_back({5 /*DT_STRTAB*/, built_vaddr_[".dynstr"]});
        entries.push_back({10 /*DT_STRSZ*/, dynstr.data.size()});
        entries.push_back({6 /*DT_SYMTAB*/, built_vaddr_[".dynsym"]});
        entries.push_back({11 /*DT_SYMENT*/, syment});
        entries.push_back({4 /*DT_HASH*/, built_vaddr_[".hash"]});
        if (!relocs_.empty()) {
            entries.push_back({is64_ ? 7 : 17 /*DT_RELA : DT_REL*/,
                               built_vaddr_[is64_ ? ".rela.dyn" : ".rel.dyn"]});
            entries.push_back({is64_ ? 8 : 18 /*DT_RELASZ : DT_RELSZ*/,
                               relent * relocs_.size()});
        }
        for (const auto& e : dyn_extra_) entries.push_back(e);
        entries.push_back({0, 0});

        for (auto& b : blobs) {
            if (b.name != ".dynamic") continue;
            size_t dynent = is64_ ? 16 : 8;
            for (size_t i = 0; i < entries.size() && (i + 1) * dynent <= b.data.size(); ++i) {
                if (is64_) {
                    wr64(b.data, i * dynent, static_cast<uint64_t>(entries[i].tag), be_);
                    wr64(b.data, i * dynent + 8, entries[i].value, be_);
                } else {
                    wr32(b.data, i * dynent, static_cast<uint32_t>(entries[i].tag), be_);
                    wr32(b.data, i * dynent + 4, static_cast<uint32_t>(entries[i].value), be_);
                }
            }
        }
    }

    // Section header string table.
    StrTab shstr;
    std::vector<uint32_t> sec_name_offs;
    size_t n_table_sections = 0;
    for (const auto& b : blobs)
        if (b.in_section_table) ++n_table_sections;
    size_t shnum = emit_sections_ ? n_table_sections + 2 : 0;  // +NULL +shstrtab

    ByteBuf out;
    auto total_size = [&] {
        uint64_t end = shoff;
        if (emit_sections_) {
            end += shnum * shentsize;
            end += shstr.data.size();  // placed after the table
        }
        return end;
    };

    // Names must be interned before sizing.
    if (emit_sections_) {
        for (const auto& b : blobs)
            if (b.in_section_table) sec_name_offs.push_back(shstr.add(b.name));
        shstr.add(".shstrtab");
    }

    out.assign(total_size(), 0);

    // ELF header.
    out[0] = 0x7f; out[1] = 'E'; out[2] = 'L'; out[3] = 'F';
    out[4] = is64_ ? 2 : 1;
    out[5] = be_ ? 2 : 1;
    out[6] = 1;  // EV_CURRENT
    wr16(out, 16, type_, be_);
    wr16(out, 18, machine_, be_);
    wr32(out, 20, 1, be_);
    uint64_t shstrtab_file_off = shoff + shnum * shentsize;
    if (is64_) {
        wr64(out, 0x20, ehsize + 0ull ? ehsize : 0, be_);  // e_phoff
        wr64(out, 0x20, ehsize, be_);
        wr64(out, 0x28, emit_sections_ ? (corrupt_shoff_ ? *corrupt_shoff_ : shoff) : 0, be_);
        wr16(out, 0x34, static_cast<uint16_t>(ehsize), be_);
        wr16(out, 0x36, static_cast<uint16_t>(phentsize), be_);
        wr16(out, 0x38, static_cast<uint16_t>(phnum), be_);
        wr16(out, 0x3a, static_cast<uint16_t>(shentsize), be_);
        wr16(out, 0x3c, static_cast<uint16_t>(shnum), be_);
        wr16(out, 0x3e, static_cast<uint16_t>(shnum ? shnum - 1 : 0), be_);
    } else {
        wr32(out, 0x1c, static_cast<uint32_t>(ehsize), be_);
        wr32(out, 0x20, emit_sections_ ? static_cast<uint32_t>(corrupt_shoff_ ? *corrupt_shoff_ : shoff) : 0, be_);
        wr16(out, 0x28, static_cast<uint16_t>(ehsize), be_);
        wr16(out, 0x2a, static_cast<uint16_t>(phentsize), be_);
        wr16(out, 0x2c, static_cast<uint16_t>(phnum), be_);
        wr16(out, 0x2e, static_cast<uint16_t>(shentsize), be_);
        wr16(out, 0x30, static_cast<uint16_t>(shnum), be_);
        wr16(out, 0x32, static_cast<uint16_t>(shnum ? shnum - 1 : 0), be_);
    }

    // Blob contents.
    for (const auto& b : blobs)
        memcpy(out.data() + built_offset_[b.name], b.data.data(), b.data.size());

    // Program headers.
    auto blob_span = [&](const std::vector<std::string>& names) {
        uint64_t lo_off = 0, lo_va = 0, end = 0;
        bool first = true;
        for (const auto& n : names) {
            auto it = built_offset_.find(n);
            if (it == built_offset_.end()) throw std::runtime_error("unknown blob " + n);
            uint64_t o = it->second;
            uint64_t sz = 0;
            for (const auto& b : blobs)
                if (b.name == n) sz = b.data.size();
            if (first || o < lo_off) { lo_off = o; lo_va = built_vaddr_[n]; }
            end = std::max(end, o + sz);
            first = false;
        }
        return std::tuple{lo_off, lo_va, first ? 0 : end - lo_off};
    };

    for (size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        uint64_t p_off = 0, p_va = 0, p_size = 0;
        if (!s.blobs.empty()) std::tie(p_off, p_va, p_size) = blob_span(s.blobs);
        uint64_t memsz = s.force_memsz ? *s.force_memsz : p_size;
        size_t ph = ehsize + i * phentsize;
        wr32(out, ph, s.type, be_);
        if (is64_) {
            wr32(out, ph + 4, s.flags, be_);
            wr64(out, ph + 8, p_off, be_);
            wr64(out, ph + 16, p_va, be_);
            wr64(out, ph + 24, p_va, be_);
            wr64(out, ph + 32, p_size, be_);
            wr64(out, ph + 40, memsz, be_);
            wr64(out, ph + 48, 0x1000, be_);
        } else {
            wr32(out, ph + 4, static_cast<uint32_t>(p_off), be_);
            wr32(out, ph + 8, static_cast<uint32_t>(p_va), be_);
            wr32(out, ph + 12, static_cast<uint32_t>(p_va), be_);
            wr32(out, ph + 16, static_cast<uint32_t>(p_size), be_);
            wr32(out, ph + 20, static_cast<uint32_t>(memsz), be_);
            wr32(out, ph + 24, s.flags, be_);
            wr32(out, ph + 28, 0x1000, be_);
        }
    }

    // Section table.
    if (emit_sections_) {
        memcpy(out.data() + shstrtab_file_off, shstr.data.data(), shstr.data.size());
        // Section index assignment: NULL, blobs in order, shstrtab.
        std::map<std::string, uint32_t> sec_index;
        uint32_t idx = 1;
        for (const auto& b : blobs)
            if (b.in_section_table) sec_index[b.name] = idx++;

        size_t name_i = 0;
        idx = 1;
        for (const auto& b : blobs) {
            if (!b.in_section_table) continue;
            size_t sh = shoff + idx * shentsize;
            uint32_t link = 0;
            if (b.name == ".dynsym") link = sec_index.count(".dynstr") ? sec_index[".dynstr"] : 0;
            if (b.name == ".symtab") link = sec_index.count(".strtab") ? sec_index[".strtab"] : 0;
            if (b.name == ".rela.dyn" || b.name == ".rel.dyn")
                link = sec_index.count(".dynsym") ? sec_index[".dynsym"] : 0;
            uint64_t entsize = 0;
            if (b.sh_type == 2 || b.sh_type == 11) entsize = syment;
            if (b.sh_type == 4 || b.sh_type == 9) entsize = relent;

            wr32(out, sh, sec_name_offs[name_i++], be_);
            wr32(out, sh + 4, b.sh_type, be_);
            if (is64_) {
                wr64(out, sh + 8, b.sh_flags, be_);
                wr64(out, sh + 16, built_vaddr_[b.name], be_);
                wr64(out, sh + 24, built_offset_[b.name], be_);
                wr64(out, sh + 32, b.data.size(), be_);
                wr32(out, sh + 40, link, be_);
                wr64(out, sh + 56, entsize, be_);
            } else {
                wr32(out, sh + 8, static_cast<uint32_t>(b.sh_flags), be_);
                wr32(out, sh + 12, static_cast<uint32_t>(built_vaddr_[b.name]), be_);
                wr32(out, sh + 16, static_cast<uint32_t>(built_offset_[b.name]), be_);
                wr32(out, sh + 20, static_cast<uint32_t>(b.data.size()), be_);
                wr32(out, sh + 24, link, be_);
                wr32(out, sh + 36, static_cast<uint32_t>(entsize), be_);
            }
            ++idx;
        }
        // .shstrtab section (last).
        size_t sh = shoff + (shnum - 1) * shentsize;
        uint32_t shstr_name = 0;
        {  // its own name was interned last
            std::string target = ".shstrtab";
            // find the offset of ".shstrtab" in shstr.data
            for (size_t i = 0; i + target.size() < shstr.data.size(); ++i)
                if (memcmp(shstr.data.data() + i, target.data(), target.size() + 1) == 0) {
                    shstr_name = static_cast<uint32_t>(i);
                    break;
                }
        }
        wr32(out, sh, shstr_name, be_);
        wr32(out, sh + 4, 3 /*STRTAB*/, be_);
        if (is64_) {
            wr64(out, sh + 24, shstrtab_file_off, be_);
            wr64(out, sh + 32, shstr.data.size(), be_);
        } else {
            wr32(out, sh + 16, static_cast<uint32_t>(shstrtab_file_off), be_);
            wr32(out, sh + 20, static_cast<uint32_t>(shstr.data.size()), be_);
        }
    }

    if (truncate_ && *truncate_ < out.size()) out.resize(*truncate_);
    return out;
}

uint64_t ElfBuilder::vaddr_of(const std::string& name) const {
    auto it = built_vaddr_.find(name);
    if (it == built_vaddr_.end()) throw std::runtime_error("no blob " + name);
    return it->second;
}

uint64_t ElfBuilder::offset_of(const std::string& name) const {
    auto it = built_offset_.find(name);
    if (it == built_offset_.end()) throw std::runtime_error("no blob " + name);
    return it->second;
}

ByteBuf minimal_exec64() {
    ElfBuilder b;
    BlobSpec text;
    text.name = ".text";
    text.sh_flags = 2 | 4;  // ALLOC|EXECINSTR
    text.data = {0xc3, 0x90, 0x90, 0x90};
    b.blob(text);
    b.segment({1 /*PT_LOAD*/, 5 /*R|X*/, {".text"}, std::nullopt});
    return b.build();
}

}  // namespace testsupport
