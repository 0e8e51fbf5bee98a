#pragma once

#include <string>
#include <vector>

#include "fwaudit/classify.hpp"
#include "fwaudit/code_refs.hpp"
#include "fwaudit/elf.hpp"
#include "fwaudit/fortify_list.hpp"
#include "fwaudit/md5.hpp"

namespace fwaudit::mitig {

inline constexpr std::string_view kCanaryMessage = "*** stack smashing detected ***";
inline constexpr std::string_view kFortifyMessage = "*** buffer overflow detected ***";

enum class Status { Protected, NotProtected, NotApplicable, Unknown };
enum class Method { Symbol, Relocation, StringHeuristic, Header, Config };
enum class RelroLevel { None, Partial, Full };

const char* status_name(Status s);
const char* method_name(Method m);
const char* relro_level_name(RelroLevel l);

struct Verdict {
    Status status = Status::Unknown;
    Method method = Method::Header;
    std::vector<std::string> evidence;

    bool is(Status s) const { return status == s; }
};

struct RelroResult {
    RelroLevel level = RelroLevel::None;
    Verdict verdict;
};

struct Report {
    Verdict canary;
    RelroResult relro;
    Verdict nx;
    Verdict fortify;
    Verdict pie;
    elf::BinaryClass binary_class;
    elf::Machine machine = elf::Machine::Other;
    int bitness = 0;
    elf::Endian endianness = elf::Endian::Little;
    Digest content_digest;
};

// Stack Canaries: __stack_chk_fail (or the _local alias) in symbols or
// relocations; statically-linked stripped binaries fall back to the failure
// message plus a code reference to it.
Verdict detect_canary(const elf::ElfView& view, const elf::BinaryClass& cls);

// The string-heuristic path alone, regardless of linkage/strippedness.
// Used directly by the symbol-oracle equivalence checks.
Verdict canary_string_heuristic(const elf::ElfView& view);

// RELRO ladder from GNU_RELRO coverage of the GOT plus bind-now flags.
RelroResult detect_relro(const elf::ElfView& view);

// NX stack from PT_GNU_STACK flags; absent header counts as unprotected.
Verdict detect_nx(const elf::ElfView& view, const elf::BinaryClass& cls);

// Fortify Source: whitelisted __*_chk symbols, with the same string
// heuristic fallback for static+stripped binaries.
Verdict detect_fortify(const elf::ElfView& view, const elf::BinaryClass& cls,
                       const FortifyList& fortify = FortifyList::builtin());

Verdict fortify_string_heuristic(const elf::ElfView& view);

// PIE: ET_DYN executables are ASLR-capable, ET_EXEC are not.
Verdict detect_pie(const elf::ElfView& view, const elf::BinaryClass& cls);

// Full pass: parse, classify, run all five detectors, digest the content.
// Propagates parse errors.
Report scan_binary(ByteSpan bytes, const FortifyList& fortify = FortifyList::builtin());
Report scan_view(const elf::ElfView& view, const FortifyList& fortify = FortifyList::builtin());

}  // namespace fwaudit::mitig
