#include <algorithm>
#include <iostream>

#include "commands.hpp"
#include "fwaudit/mitigations.hpp"
#include "fwaudit/walk.hpp"

namespace fwaudit::cli {

namespace {

void print_verdict(const char* label, const mitig::Verdict& v,
                   const std::string& extra = "") {
    std::cout << "  " << label << ": " << mitig::status_name(v.status);
    if (!extra.empty()) std::cout << " (" << extra << ")";
    std::cout << " [" << mitig::method_name(v.method) << "]\n";
    for (const auto& e : v.evidence) std::cout << "      - " << e << "\n";
}

bool passes(const mitig::Report& rep, const std::string& mitigation) {
    if (mitigation == "canary") return rep.canary.status == mitig::Status::Protected;
    if (mitigation == "nx")
        return rep.nx.status == mitig::Status::Protected ||
               rep.nx.status == mitig::Status::NotApplicable;
    if (mitigation == "fortify") return rep.fortify.status == mitig::Status::Protected;
    if (mitigation == "pie")
        return rep.pie.status == mitig::Status::Protected ||
               rep.pie.status == mitig::Status::NotApplicable;
    if (mitigation == "relro") return rep.relro.level != mitig::RelroLevel::None;
    return false;
}

}  // namespace

int cmd_check(const CheckArgs& args) {
    ByteBuf bytes;
    try {
        bytes = unpack::read_file(args.path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    mitig::Report rep;
    try {
        rep = mitig::scan_binary({bytes.data(), bytes.size()});
    } catch (const elf::ElfError& e) {
        std::cerr << args.path << ": not an ELF binary (" << e.what() << ")\n";
        return 2;
    }

    std::cout << args.path << "\n"
              << "  arch: " << elf::machine_name(rep.machine) << rep.bitness
              << (rep.endianness == elf::Endian::Big ? " BE" : " LE")
              << ", " << elf::linkage_name(rep.binary_class.linkage) << " "
              << elf::role_name(rep.binary_class.role)
              << (rep.binary_class.stripped ? ", stripped" : "")
              << ", libc=" << elf::libc_name(rep.binary_class.libc) << "\n"
              << "  md5: " << rep.content_digest.hex() << "\n";
    print_verdict("canary ", rep.canary);
    print_verdict("relro  ", rep.relro.verdict, mitig::relro_level_name(rep.relro.level));
    print_verdict("nx     ", rep.nx);
    print_verdict("fortify", rep.fortify);
    print_verdict("pie    ", rep.pie);

    for (const auto& m : args.fail_on) {
        if (!passes(rep, m)) {
            std::cerr << "fail-on: " << m << " not satisfied\n";
            return 1;
        }
    }
    return 0;
}

}  // namespace fwaudit::cli
