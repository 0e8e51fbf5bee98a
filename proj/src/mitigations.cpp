#include "fwaudit/mitigations.hpp"

#include <algorithm>

namespace fwaudit::mitig {

namespace {

using elf::BinaryClass;
using elf::ElfView;

std::string hexaddr(uint64_t v) {
    char buf[32];
    snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

bool is_canary_symbol(std::string_view name) {
    return name == "__stack_chk_fail" || name == "__stack_chk_fail_local";
}

// Searches symbols and relocations with a caller-supplied predicate.
// Returns a verdict when the predicate matches, nullopt otherwise.
template <typename Pred>
std::optional<Verdict> symbol_evidence(const ElfView& view, Pred&& matches,
                                       const char* what) {
    for (const auto& s : view.dynamic_symbols)
        if (matches(s.name)) {
            Verdict v{Status::Protected, Method::Symbol,
                      {std::string("dynamic symbol ") + s.name}};
            return v;
        }
    for (const auto& s : view.static_symbols)
        if (matches(s.name)) {
            Verdict v{Status::Protected, Method::Symbol,
                      {std::string("symbol ") + s.name}};
            return v;
        }
    for (const auto& r : view.relocations)
        if (matches(r.symbol)) {
            Verdict v{Status::Protected, Method::Relocation,
                      {std::string("relocation entry for ") + r.symbol + " at " +
                       hexaddr(r.offset)}};
            return v;
        }
    (void)what;
    return std::nullopt;
}

// Message-string heuristic shared by canary and fortify detection: the
// message must exist and at least one executable-segment code site must
// reference its address.
Verdict string_heuristic(const ElfView& view, std::string_view message,
                         const char* label) {
    auto offsets = elf::find_string(view, message);
    if (offsets.empty()) {
        Verdict v{Status::NotProtected, Method::StringHeuristic,
                  {std::string(label) + " message absent"}};
        return v;
    }
    bool scanner_missing = false;
    for (size_t off : offsets) {
        auto vaddr = view.offset_to_vaddr(off);
        if (!vaddr) continue;  // string outside any loadable segment
        auto refs = elf::find_code_references(view, *vaddr);
        if (!refs) {
            scanner_missing = true;
            continue;
        }
        size_t exec_refs = 0;
        for (const auto& r : *refs)
            if (view.vaddr_in_exec_segment(r.vaddr)) ++exec_refs;
        if (exec_refs) {
            Verdict v{Status::Protected, Method::StringHeuristic,
                      {std::string(label) + " message at " + hexaddr(off) + " + " +
                           std::to_string(exec_refs) + " code refs",
                       "caller check approximated by code references"}};
            return v;
        }
    }
    if (scanner_missing) {
        Verdict v{Status::Unknown, Method::StringHeuristic,
                  {"no code-reference scanner for this architecture"}};
        return v;
    }
    Verdict v{Status::NotProtected, Method::StringHeuristic,
              {std::string(label) + " message present but unreferenced by code"}};
    return v;
}

bool is_static_stripped(const BinaryClass& cls) {
    return cls.linkage == elf::Linkage::Static && cls.stripped;
}

}  // namespace

const char* status_name(Status s) {
    switch (s) {
        case Status::Protected: return "protected";
        case Status::NotProtected: return "not_protected";
        case Status::NotApplicable: return "not_applicable";
        default: return "unknown";
    }
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Symbol: return "symbol";
        case Method::Relocation: return "relocation";
        case Method::StringHeuristic: return "string_heuristic";
        case Method::Header: return "header";
        default: return "config";
    }
}

const char* relro_level_name(RelroLevel l) {
    switch (l) {
        case RelroLevel::Full: return "full";
        case RelroLevel::Partial: return "partial";
        default: return "none";
    }
}

Verdict canary_string_heuristic(const ElfView& view) {
    return string_heuristic(view, kCanaryMessage, "stack smashing");
}

Verdict detect_canary(const ElfView& view, const BinaryClass& cls) {
    if (auto v = symbol_evidence(view, is_canary_symbol, "canary")) return *v;
    if (is_static_stripped(cls)) return canary_string_heuristic(view);
    Verdict v{Status::NotProtected, Method::Symbol,
              {"no __stack_chk_fail symbol or relocation"}};
    return v;
}

RelroResult detect_relro(const ElfView& view) {
    RelroResult r;
    r.verdict.method = Method::Header;

    std::vector<const elf::ProgramHeader*> relros;
    bool any_writable_relro = false;
    for (const auto& p : view.segments) {
        if (p.type != elf::PT_GNU_RELRO) continue;
        if (p.writable()) {
            any_writable_relro = true;
            continue;
        }
        relros.push_back(&p);
    }

    if (relros.empty()) {
        r.level = RelroLevel::None;
        r.verdict.status = Status::NotProtected;
        r.verdict.evidence.push_back(any_writable_relro ? "GNU_RELRO segment is writable"
                                                        : "no GNU_RELRO segment");
        return r;
    }

    auto covered_by_relro = [&](uint64_t addr, uint64_t size) {
        for (const auto* p : relros)
            if (addr >= p->vaddr && addr + size <= p->vaddr + p->memsz) return true;
        return false;
    };
    auto in_writable_load = [&](uint64_t addr) {
        for (const auto& p : view.segments)
            if (p.type == elf::PT_LOAD && p.writable() && addr >= p.vaddr &&
                addr < p.vaddr + p.memsz)
                return true;
        return false;
    };

    const elf::Section* got = view.sections_valid ? view.find_section(".got") : nullptr;
    const elf::Section* gotplt = view.sections_valid ? view.find_section(".got.plt") : nullptr;
    bool bind_now = view.has_dynamic_flag_now();

    if (!got) {
        // Sections unavailable (or nameless GOT): decide from segments only.
        r.verdict.evidence.push_back("sections unavailable; segment-level decision");
        if (bind_now) {
            r.level = RelroLevel::Full;
            r.verdict.status = Status::Protected;
            r.verdict.evidence.push_back("read-only GNU_RELRO + bind-now flag");
        } else {
            r.level = RelroLevel::Partial;
            r.verdict.status = Status::Protected;
            r.verdict.evidence.push_back("read-only GNU_RELRO, lazy binding");
        }
        return r;
    }

    if (!covered_by_relro(got->addr, got->size)) {
        r.level = RelroLevel::None;
        r.verdict.status = Status::NotProtected;
        r.verdict.evidence.push_back(".got at " + hexaddr(got->addr) +
                                     " outside GNU_RELRO range");
        return r;
    }
    r.verdict.evidence.push_back(".got covered by read-only GNU_RELRO");

    // A .got.plt kept inside the read-only range still counts as protected.
    bool writable_gotplt_outside = gotplt && gotplt->size &&
                                   !covered_by_relro(gotplt->addr, gotplt->size) &&
                                   in_writable_load(gotplt->addr);
    if (writable_gotplt_outside)
        r.verdict.evidence.push_back(".got.plt remains in a writable segment");

    if (bind_now && !writable_gotplt_outside) {
        r.level = RelroLevel::Full;
        r.verdict.status = Status::Protected;
        r.verdict.evidence.push_back("bind-now flag in .dynamic");
    } else {
        r.level = RelroLevel::Partial;
        r.verdict.status = Status::Protected;
        if (!bind_now) r.verdict.evidence.push_back("no bind-now flag in .dynamic");
    }
    return r;
}

Verdict detect_nx(const ElfView& view, const BinaryClass& cls) {
    if (cls.role != elf::Role::Executable) {
        Verdict v{Status::NotApplicable, Method::Header, {"not an executable"}};
        return v;
    }
    const auto* stack = view.find_segment(elf::PT_GNU_STACK);
    if (!stack) {
        Verdict v{Status::NotProtected, Method::Header,
                  {"PT_GNU_STACK absent; loader default is an executable stack"}};
        return v;
    }
    if (stack->executable()) {
        Verdict v{Status::NotProtected, Method::Header, {"PT_GNU_STACK flags=RWE"}};
        return v;
    }
    Verdict v{Status::Protected, Method::Header, {"PT_GNU_STACK flags=RW"}};
    return v;
}

Verdict fortify_string_heuristic(const ElfView& view) {
    return string_heuristic(view, kFortifyMessage, "buffer overflow");
}

Verdict detect_fortify(const ElfView& view, const BinaryClass& cls,
                       const FortifyList& fortify) {
    auto matches = [&](std::string_view name) { return fortify.is_fortified_symbol(name); };
    if (auto v = symbol_evidence(view, matches, "fortify")) return *v;
    if (is_static_stripped(cls)) {
        Verdict v = fortify_string_heuristic(view);
        if (v.status == Status::NotProtected && cls.libc == elf::Libc::Uclibc)
            v.evidence.push_back("libc lacks fortify support");
        return v;
    }
    Verdict v{Status::NotProtected, Method::Symbol, {"no whitelisted __*_chk symbol"}};
    if (cls.libc == elf::Libc::Uclibc) v.evidence.push_back("libc lacks fortify support");
    return v;
}

Verdict detect_pie(const ElfView& view, const BinaryClass& cls) {
    if (cls.role != elf::Role::Executable) {
        Verdict v{Status::NotApplicable, Method::Header, {"not an executable"}};
        return v;
    }
    if (view.elf_type == elf::ElfType::Dyn) {
        Verdict v{Status::Protected, Method::Header, {"ELF type ET_DYN"}};
        return v;
    }
    if (view.elf_type == elf::ElfType::Exec) {
        Verdict v{Status::NotProtected, Method::Header, {"ELF type ET_EXEC"}};
        return v;
    }
    Verdict v{Status::NotProtected, Method::Header,
              {"unexpected ELF type " + std::to_string(view.elf_type_code)}};
    return v;
}

Report scan_view(const ElfView& view, const FortifyList& fortify) {
    Report rep;
    rep.binary_class = elf::classify_binary(view);
    rep.machine = view.machine;
    rep.bitness = view.bitness;
    rep.endianness = view.endianness;
    rep.canary = detect_canary(view, rep.binary_class);
    rep.relro = detect_relro(view);
    rep.nx = detect_nx(view, rep.binary_class);
    rep.fortify = detect_fortify(view, rep.binary_class, fortify);
    rep.pie = detect_pie(view, rep.binary_class);
    rep.content_digest = md5(view.bytes());
    return rep;
}

Report scan_binary(ByteSpan bytes, const FortifyList& fortify) {
    elf::ElfView view = elf::parse_elf(bytes);
    return scan_view(view, fortify);
}

}  // namespace fwaudit::mitig
