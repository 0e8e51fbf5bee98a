#pragma once

#include <string>

#include "fwaudit/elf.hpp"

namespace fwaudit::elf {

enum class Linkage { Static, Dynamic };
enum class Role { Executable, Library, RelocatableObject, Unknown };
enum class Libc { Glibc, Uclibc, Musl, Unknown };

const char* linkage_name(Linkage l);
const char* role_name(Role r);
const char* libc_name(Libc l);

struct BinaryClass {
    Linkage linkage = Linkage::Static;
    Role role = Role::Unknown;
    bool stripped = false;
    Libc libc = Libc::Unknown;
    std::string diagnostic;  // e.g. ET_DYN with neither interpreter nor SONAME
};

// Total classification: every view gets exactly one (linkage, role) pair.
BinaryClass classify_binary(const ElfView& view);

}  // namespace fwaudit::elf
