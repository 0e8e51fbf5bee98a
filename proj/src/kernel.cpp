#include "fwaudit/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace fwaudit::kernel {

namespace {

constexpr std::string_view kBannerPrefix = "Linux version ";

bool parse_int(std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

constexpr const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                   "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

int month_number(std::string_view m) {
    for (int i = 0; i < 12; ++i)
        if (m == kMonths[i]) return i + 1;
    return 0;
}

// Tokenizes the banner tail and accepts the common
// `Day Mon DD HH:MM:SS [TZ] YYYY` shape; the last match wins.
std::optional<Date> parse_banner_date(std::string_view banner) {
    std::vector<std::string_view> tok;
    size_t i = 0;
    while (i < banner.size()) {
        while (i < banner.size() && isspace(static_cast<unsigned char>(banner[i]))) ++i;
        size_t j = i;
        while (j < banner.size() && !isspace(static_cast<unsigned char>(banner[j]))) ++j;
        if (j > i) tok.push_back(banner.substr(i, j - i));
        i = j;
    }
    std::optional<Date> best;
    for (size_t t = 0; t + 2 < tok.size(); ++t) {
        int mon = month_number(tok[t]);
        if (!mon) continue;
        int day = 0;
        if (!parse_int(tok[t + 1], day) || day < 1 || day > 31) continue;
        // The time field follows; the year is the next 4-digit token after it.
        for (size_t y = t + 2; y < std::min(tok.size(), t + 5); ++y) {
            int year = 0;
            if (tok[y].size() == 4 && parse_int(tok[y], year) && year >= 1990 && year <= 2100) {
                best = Date{year, mon, day};
                break;
            }
        }
    }
    return best;
}

}  // namespace

std::string KernelVersion::str() const {
    char buf[48];
    snprintf(buf, sizeof buf, "%d.%d.%d", major, minor, patch);
    return buf;
}

std::optional<KernelVersion> KernelVersion::parse(std::string_view dotted) {
    KernelVersion v;
    size_t a = dotted.find('.');
    if (a == std::string_view::npos) return std::nullopt;
    size_t b = dotted.find('.', a + 1);
    if (!parse_int(dotted.substr(0, a), v.major)) return std::nullopt;
    if (b == std::string_view::npos) {
        if (!parse_int(dotted.substr(a + 1), v.minor)) return std::nullopt;
        return v;
    }
    if (!parse_int(dotted.substr(a + 1, b - a - 1), v.minor)) return std::nullopt;
    if (!parse_int(dotted.substr(b + 1), v.patch)) return std::nullopt;
    return v;
}

std::string Date::iso() const {
    char buf[16];
    snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::optional<Date> Date::parse_iso(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    Date d;
    if (!parse_int(s.substr(0, 4), d.year) || !parse_int(s.substr(5, 2), d.month) ||
        !parse_int(s.substr(8, 2), d.day))
        return std::nullopt;
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return std::nullopt;
    return d;
}

int months_between(const Date& a, const Date& b) {
    int m = (b.year - a.year) * 12 + (b.month - a.month);
    if (b.day < a.day) m -= 1;  // not yet a whole month
    return m;
}

BannerInfo find_kernel_version(ByteSpan image) {
    size_t pos = 0;
    while ((pos = find_first(image, as_bytes(kBannerPrefix), pos)) != npos) {
        size_t vstart = pos + kBannerPrefix.size();
        // Require <digits>.<digits>[.<digits>] right after the prefix.
        size_t i = vstart;
        auto digits = [&](int& out) {
            size_t s = i;
            while (i < image.size() && isdigit(image[i])) ++i;
            if (i == s || i - s > 6) return false;
            std::string tmp(reinterpret_cast<const char*>(image.data() + s), i - s);
            return parse_int(tmp, out);
        };
        KernelVersion v;
        bool ok = digits(v.major) && i < image.size() && image[i] == '.';
        if (ok) {
            ++i;
            ok = digits(v.minor);
        }
        if (ok && i < image.size() && image[i] == '.') {
            ++i;
            if (!digits(v.patch)) ok = false;
        }
        if (!ok) {
            pos += kBannerPrefix.size();
            continue;
        }
        // Banner runs to NUL or newline, bounded.
        size_t end = pos;
        while (end < image.size() && image[end] && image[end] != '\n' &&
               end - pos < 512)
            ++end;
        BannerInfo info;
        info.version = v;
        info.banner.assign(reinterpret_cast<const char*>(image.data() + pos), end - pos);
        info.build_date = parse_banner_date(info.banner);
        info.offset = pos;
        return info;
    }
    throw NoVersionFound();
}

KernelConfig KernelConfig::parse(std::string_view text) {
    KernelConfig cfg;
    size_t line_no = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos
                                                       ? std::string_view::npos
                                                       : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty()) continue;

        if (line[0] == '#') {
            // "# CONFIG_FOO is not set" or a plain comment.
            std::string_view rest = line.substr(1);
            while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
            if (rest.rfind("CONFIG_", 0) == 0) {
                size_t sp = rest.find(' ');
                if (sp != std::string_view::npos &&
                    rest.substr(sp) == " is not set") {
                    cfg.values_[std::string(rest.substr(0, sp))] = "n";
                    continue;
                }
                cfg.warnings_.push_back("line " + std::to_string(line_no) +
                                        ": malformed config comment");
                continue;
            }
            // Header hint: "# Linux/arm 3.10.20 Kernel Configuration"
            if (rest.rfind("Linux", 0) == 0 &&
                rest.find("Kernel Configuration") != std::string_view::npos) {
                size_t slash = rest.find('/');
                size_t sp1 = rest.find(' ');
                if (slash != std::string_view::npos && slash < sp1) {
                    cfg.arch_hint_ = std::string(rest.substr(slash + 1, sp1 - slash - 1));
                }
                if (sp1 != std::string_view::npos) {
                    size_t sp2 = rest.find(' ', sp1 + 1);
                    auto ver = KernelVersion::parse(
                        rest.substr(sp1 + 1, sp2 == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : sp2 - sp1 - 1));
                    if (ver) cfg.version_hint_ = ver;
                }
            }
            continue;
        }

        size_t eq = line.find('=');
        if (eq == std::string_view::npos || line.rfind("CONFIG_", 0) != 0) {
            cfg.warnings_.push_back("line " + std::to_string(line_no) + ": malformed line");
            continue;
        }
        // Duplicates resolve to the last occurrence.
        cfg.values_[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
    }
    return cfg;
}

bool KernelConfig::is_set(const std::string& option) const {
    auto it = values_.find(option);
    if (it == values_.end()) return false;  // absence means unset
    return it->second == "y" || it->second == "m";
}

std::optional<std::string> KernelConfig::value(const std::string& option) const {
    auto it = values_.find(option);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

bool KernelConfig::mentions(const std::string& option) const {
    return values_.count(option) > 0;
}

const char* kernel_mitigation_name(KernelMitigation m) {
    switch (m) {
        case KernelMitigation::StackProtector: return "stack_protector";
        case KernelMitigation::Pxn: return "pxn";
        case KernelMitigation::Kaslr: return "kaslr";
        case KernelMitigation::FreelistRandom: return "freelist_random";
        case KernelMitigation::Usercopy: return "usercopy";
        case KernelMitigation::Fortify: return "fortify";
        case KernelMitigation::KernelRwx: return "kernel_rwx";
        default: return "vmap_stack";
    }
}

std::optional<const char*> kernel_config_option(KernelMitigation m) {
    switch (m) {
        case KernelMitigation::StackProtector: return "CONFIG_HAVE_CC_STACKPROTECTOR";
        case KernelMitigation::Kaslr: return "CONFIG_RANDOMIZE_BASE";
        case KernelMitigation::FreelistRandom: return "CONFIG_SLAB_FREELIST_RANDOM";
        case KernelMitigation::Usercopy: return "CONFIG_HARDENED_USERCOPY";
        case KernelMitigation::Fortify: return "CONFIG_FORTIFY_SOURCE";
        case KernelMitigation::KernelRwx: return "CONFIG_STRICT_KERNEL_RWX";
        case KernelMitigation::VmapStack: return "CONFIG_VMAP_STACK";
        default: return std::nullopt;  // PXN is not configuration-driven
    }
}

std::optional<const char*> kernel_indicator_symbol(KernelMitigation m) {
    switch (m) {
        case KernelMitigation::StackProtector: return "__stack_chk_fail";
        case KernelMitigation::Usercopy: return "usercopy_warn";
        case KernelMitigation::FreelistRandom: return "freelist_state_initialize";
        case KernelMitigation::KernelRwx: return "mark_rodata_ro";
        case KernelMitigation::Kaslr: return "rotate_xor";
        case KernelMitigation::VmapStack: return "free_vm_stack_cache";
        default: return std::nullopt;  // Fortify uses the __*_chk whitelist; PXN has none
    }
}

const char* kernel_arch_name(KernelArch a) {
    switch (a) {
        case KernelArch::Arm: return "arm";
        case KernelArch::AArch64: return "aarch64";
        case KernelArch::Mips: return "mips";
        case KernelArch::PowerPc: return "powerpc";
        case KernelArch::X86: return "x86";
        case KernelArch::X64: return "x64";
        case KernelArch::Other: return "other";
        default: return "unknown";
    }
}

KernelArch kernel_arch_from_machine(elf::Machine m) {
    switch (m) {
        case elf::Machine::Arm: return KernelArch::Arm;
        case elf::Machine::AArch64: return KernelArch::AArch64;
        case elf::Machine::Mips: return KernelArch::Mips;
        case elf::Machine::PowerPc: return KernelArch::PowerPc;
        case elf::Machine::X86: return KernelArch::X86;
        case elf::Machine::X64: return KernelArch::X64;
        default: return KernelArch::Other;
    }
}

KernelArch kernel_arch_from_string(std::string_view s) {
    std::string l(s);
    std::transform(l.begin(), l.end(), l.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (l == "arm" || l == "arm32") return KernelArch::Arm;
    if (l == "aarch64" || l == "arm64") return KernelArch::AArch64;
    if (l == "mips" || l == "mipsel" || l == "mips64") return KernelArch::Mips;
    if (l == "powerpc" || l == "ppc" || l == "ppc64") return KernelArch::PowerPc;
    if (l == "x86" || l == "i386" || l == "i686") return KernelArch::X86;
    if (l == "x64" || l == "x86_64" || l == "amd64") return KernelArch::X64;
    if (l == "unknown" || l.empty()) return KernelArch::Unknown;
    return KernelArch::Other;
}

bool applicable(KernelMitigation m, KernelArch arch, const KernelVersion& v) {
    auto gate = [&](int maj, int min) { return v >= KernelVersion{maj, min, 0}; };
    switch (m) {
        case KernelMitigation::StackProtector:
            if (arch == KernelArch::Arm) return gate(2, 6);
            if (arch == KernelArch::Mips) return gate(3, 11);
            if (arch == KernelArch::PowerPc) return gate(4, 20);
            return false;
        case KernelMitigation::Pxn:
            if (arch == KernelArch::Arm) return gate(3, 19);
            if (arch == KernelArch::AArch64) return gate(3, 7);
            return false;
        case KernelMitigation::Kaslr:
            if (arch == KernelArch::Arm) return gate(4, 6);
            if (arch == KernelArch::Mips) return gate(4, 7);
            if (arch == KernelArch::PowerPc) return gate(5, 2);
            return false;
        case KernelMitigation::FreelistRandom:
            if (arch == KernelArch::Arm || arch == KernelArch::AArch64 ||
                arch == KernelArch::Mips || arch == KernelArch::PowerPc)
                return gate(4, 7);
            return false;
        case KernelMitigation::Usercopy:
            if (arch == KernelArch::Arm || arch == KernelArch::AArch64 ||
                arch == KernelArch::Mips || arch == KernelArch::PowerPc)
                return gate(4, 8);
            return false;
        case KernelMitigation::Fortify:
            if (arch == KernelArch::AArch64 || arch == KernelArch::PowerPc) return gate(4, 13);
            if (arch == KernelArch::Arm) return gate(4, 17);
            if (arch == KernelArch::Mips) return gate(5, 5);
            return false;
        case KernelMitigation::KernelRwx:
            if (arch == KernelArch::Arm) return gate(4, 11);
            if (arch == KernelArch::PowerPc) return gate(4, 13);
            // MIPS does not support strict kernel RWX.
            return false;
        case KernelMitigation::VmapStack:
            if (arch == KernelArch::Arm || arch == KernelArch::AArch64 ||
                arch == KernelArch::Mips || arch == KernelArch::PowerPc)
                return gate(4, 9);
            return false;
    }
    return false;
}

const char* kstatus_name(KStatus s) {
    switch (s) {
        case KStatus::Protected: return "protected";
        case KStatus::NotProtected: return "not_protected";
        case KStatus::Unsupported: return "unsupported";
        default: return "unknown";
    }
}

const char* kbasis_name(KBasis b) {
    switch (b) {
        case KBasis::Config: return "config";
        case KBasis::IndicatorSymbol: return "indicator_symbol";
        default: return "version_gate";
    }
}

const char* symbol_source_name(SymbolSource s) {
    switch (s) {
        case SymbolSource::ElfSymtab: return "elf_symtab";
        case SymbolSource::Kallsyms: return "kallsyms";
        default: return "none";
    }
}

KernelMitigationStatus detect_kernel_mitigations(const KernelRecord& record,
                                                 const FortifyList& fortify) {
    KernelMitigationStatus out;
    const bool have_symbols = record.symbol_source != SymbolSource::None &&
                              !record.symbols.empty();

    auto has_symbol = [&](std::string_view name) {
        return std::find(record.symbols.begin(), record.symbols.end(), name) !=
               record.symbols.end();
    };
    auto has_fortified_symbol = [&] {
        for (const auto& s : record.symbols)
            if (fortify.is_fortified_symbol(s)) return true;
        return false;
    };

    KernelMitigation all[] = {
        KernelMitigation::StackProtector, KernelMitigation::Pxn,
        KernelMitigation::Kaslr,          KernelMitigation::FreelistRandom,
        KernelMitigation::Usercopy,       KernelMitigation::Fortify,
        KernelMitigation::KernelRwx,      KernelMitigation::VmapStack,
    };

    for (KernelMitigation m : all) {
        KernelMitigationResult r;
        if (!applicable(m, record.arch, record.version)) {
            r = {KStatus::Unsupported, KBasis::VersionGate};
            out.results[m] = r;
            continue;
        }
        if (m == KernelMitigation::Pxn) {
            // Eligible by arch/version, but enablement has no config option
            // or indicator function to check.
            out.results[m] = {KStatus::Unknown, KBasis::VersionGate};
            continue;
        }
        if (record.config) {
            auto opt = kernel_config_option(m);
            if (opt) {
                r.basis = KBasis::Config;
                r.status = record.config->is_set(*opt) ? KStatus::Protected
                                                       : KStatus::NotProtected;
                out.results[m] = r;
                continue;
            }
        }
        if (have_symbols) {
            r.basis = KBasis::IndicatorSymbol;
            bool present = m == KernelMitigation::Fortify
                               ? has_fortified_symbol()
                               : has_symbol(*kernel_indicator_symbol(m));
            r.status = present ? KStatus::Protected : KStatus::NotProtected;
            out.results[m] = r;
            continue;
        }
        out.results[m] = {KStatus::Unknown, KBasis::VersionGate};
    }
    return out;
}

}  // namespace fwaudit::kernel
