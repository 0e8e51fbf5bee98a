#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fwaudit/bytes.hpp"
#include "fwaudit/elf.hpp"
#include "fwaudit/fortify_list.hpp"

namespace fwaudit::kernel {

struct KernelVersion {
    int major = 0;
    int minor = 0;
    int patch = 0;  // 0 when absent

    auto operator<=>(const KernelVersion&) const = default;
    std::string str() const;
    static std::optional<KernelVersion> parse(std::string_view dotted);
};

struct Date {
    int year = 0;
    int month = 0;  // 1-12
    int day = 0;    // 1-31

    auto operator<=>(const Date&) const = default;
    std::string iso() const;
    static std::optional<Date> parse_iso(std::string_view s);
};

// Whole months from a to b, negative when b precedes a.
int months_between(const Date& a, const Date& b);

struct BannerInfo {
    KernelVersion version;
    std::string banner;
    std::optional<Date> build_date;
    size_t offset = 0;
};

struct NoVersionFound : std::runtime_error {
    NoVersionFound() : std::runtime_error("no Linux version banner found") {}
};

// Scans a decompressed image for "Linux version <d>.<d>[.<d>]"; first
// well-formed banner wins. The trailing "Day Mon DD HH:MM:SS [TZ] YYYY"
// stamp, when parseable, becomes the build date.
BannerInfo find_kernel_version(ByteSpan image);

// Kernel build configuration. Selected options are `NAME=y|m`; a line
// `# NAME is not set` or plain absence means unset.
class KernelConfig {
public:
    static KernelConfig parse(std::string_view text);

    bool is_set(const std::string& option) const;      // value in {y, m}
    std::optional<std::string> value(const std::string& option) const;
    bool mentions(const std::string& option) const;

    // "# Linux/arm 3.10.20 Kernel Configuration" header, when present.
    std::optional<KernelVersion> version_hint() const { return version_hint_; }
    std::optional<std::string> arch_hint() const { return arch_hint_; }

    const std::vector<std::string>& warnings() const { return warnings_; }
    size_t option_count() const { return values_.size(); }

private:
    std::map<std::string, std::string> values_;  // "y", "m", "n"(explicit unset), raw
    std::optional<KernelVersion> version_hint_;
    std::optional<std::string> arch_hint_;
    std::vector<std::string> warnings_;
};

enum class KernelMitigation {
    StackProtector,
    Pxn,
    Kaslr,
    FreelistRandom,
    Usercopy,
    Fortify,
    KernelRwx,
    VmapStack,  // supplementary detector, excluded from headline statistics
};

inline constexpr KernelMitigation kHeadlineMitigations[] = {
    KernelMitigation::StackProtector, KernelMitigation::Pxn,
    KernelMitigation::Kaslr,          KernelMitigation::FreelistRandom,
    KernelMitigation::Usercopy,       KernelMitigation::Fortify,
    KernelMitigation::KernelRwx,
};

const char* kernel_mitigation_name(KernelMitigation m);
std::optional<const char*> kernel_config_option(KernelMitigation m);
std::optional<const char*> kernel_indicator_symbol(KernelMitigation m);

enum class KernelArch { Arm, AArch64, Mips, PowerPc, X86, X64, Other, Unknown };
const char* kernel_arch_name(KernelArch a);
KernelArch kernel_arch_from_machine(elf::Machine m);
KernelArch kernel_arch_from_string(std::string_view s);

// Applicability gate: supported iff the architecture is covered and
// version >= the gate version for (mitigation, arch). Gate comparison is
// inclusive. MIPS never supports strict kernel RWX.
bool applicable(KernelMitigation m, KernelArch arch, const KernelVersion& v);

enum class KStatus { Protected, NotProtected, Unsupported, Unknown };
enum class KBasis { Config, IndicatorSymbol, VersionGate };
const char* kstatus_name(KStatus s);
const char* kbasis_name(KBasis b);

struct KernelMitigationResult {
    KStatus status = KStatus::Unknown;
    KBasis basis = KBasis::VersionGate;
};

enum class SymbolSource { ElfSymtab, Kallsyms, None };
const char* symbol_source_name(SymbolSource s);

struct KernelRecord {
    KernelVersion version;
    std::string banner;
    std::optional<Date> build_date;
    KernelArch arch = KernelArch::Unknown;
    std::optional<KernelConfig> config;
    std::vector<std::string> symbols;
    SymbolSource symbol_source = SymbolSource::None;
};

struct KernelMitigationStatus {
    std::map<KernelMitigation, KernelMitigationResult> results;

    const KernelMitigationResult& of(KernelMitigation m) const { return results.at(m); }
};

// Evidence precedence: version gate, then config, then indicator symbols.
// PXN carries no config option or indicator; eligible kernels report
// Unknown, gate-based.
KernelMitigationStatus detect_kernel_mitigations(
    const KernelRecord& record, const FortifyList& fortify = FortifyList::builtin());

}  // namespace fwaudit::kernel
