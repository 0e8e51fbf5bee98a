#include "fwaudit/classify.hpp"

#include <algorithm>

namespace fwaudit::elf {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

Libc libc_from_name(const std::string& name) {
    std::string n = lower(name);
    if (n.find("uclibc") != std::string::npos) return Libc::Uclibc;
    if (n.find("musl") != std::string::npos) return Libc::Musl;
    return Libc::Unknown;
}

}  // namespace

const char* linkage_name(Linkage l) {
    return l == Linkage::Dynamic ? "dynamic" : "static";
}

const char* role_name(Role r) {
    switch (r) {
        case Role::Executable: return "executable";
        case Role::Library: return "library";
        case Role::RelocatableObject: return "relocatable_object";
        default: return "unknown";
    }
}

const char* libc_name(Libc l) {
    switch (l) {
        case Libc::Glibc: return "glibc";
        case Libc::Uclibc: return "uclibc";
        case Libc::Musl: return "musl";
        default: return "unknown";
    }
}

BinaryClass classify_binary(const ElfView& view) {
    BinaryClass c;
    c.linkage = view.find_segment(PT_DYNAMIC) ? Linkage::Dynamic : Linkage::Static;
    c.stripped = view.static_symbols.empty();

    if (view.interpreter || view.elf_type == ElfType::Exec) {
        c.role = Role::Executable;
    } else if (view.elf_type == ElfType::Dyn) {
        if (view.soname()) {
            c.role = Role::Library;
        } else {
            // Neither PT_INTERP nor DT_SONAME: treat as library, flagged.
            c.role = Role::Library;
            c.diagnostic = "ET_DYN without interpreter or SONAME; classified as library";
        }
    } else if (view.elf_type == ElfType::Rel) {
        c.role = Role::RelocatableObject;
    } else {
        c.role = Role::Unknown;
    }

    // libc from DT_NEEDED and the interpreter path.
    bool libc_linked = false;
    for (const auto& lib : view.needed_libraries()) {
        Libc hint = libc_from_name(lib);
        if (hint != Libc::Unknown) {
            c.libc = hint;
            return c;
        }
        std::string n = lower(lib);
        if (n.rfind("libc.so", 0) == 0 || n.rfind("ld-linux", 0) == 0) {
            libc_linked = true;
            // libc.so.0 is the classic uClibc soname.
            if (n == "libc.so.0") {
                c.libc = Libc::Uclibc;
                return c;
            }
        }
    }
    if (view.interpreter) {
        Libc hint = libc_from_name(*view.interpreter);
        if (hint != Libc::Unknown) {
            c.libc = hint;
            return c;
        }
        // An interpreter is a libc loader; without uClibc/musl markers the
        // GNU loader names (ld-linux*, ld.so.1, ld64.so.*) mean glibc.
        libc_linked = true;
    }
    if (libc_linked) c.libc = Libc::Glibc;
    return c;
}

}  // namespace fwaudit::elf
