#include "fwaudit/fortify_list.hpp"

#include <fstream>
#include <stdexcept>

namespace fwaudit {

namespace {

// Fortifiable glibc functions with __*_chk replacements.
constexpr const char* kStems[] = {
    "asprintf", "confstr", "dprintf", "explicit_bzero", "fdelt", "fgets",
    "fgets_unlocked", "fgetws", "fgetws_unlocked", "fprintf", "fread",
    "fread_unlocked", "fwprintf", "getcwd", "getdomainname", "getgroups",
    "gethostname", "getlogin_r", "gets", "getwd", "longjmp", "mbsnrtowcs",
    "mbsrtowcs", "mbstowcs", "memcpy", "memmove", "mempcpy", "memset",
    "obstack_printf", "obstack_vprintf", "poll", "ppoll", "pread", "pread64",
    "printf", "ptsname_r", "read", "readlink", "readlinkat", "realpath",
    "recv", "recvfrom", "snprintf", "sprintf", "stpcpy", "stpncpy", "strcat",
    "strcpy", "strncat", "strncpy", "swprintf", "syslog", "ttyname_r",
    "vasprintf", "vdprintf", "vfprintf", "vfwprintf", "vprintf", "vsnprintf",
    "vsprintf", "vswprintf", "vsyslog", "vwprintf", "wcpcpy", "wcpncpy",
    "wcrtomb", "wcscat", "wcscpy", "wcsncat", "wcsncpy", "wcsnrtombs",
    "wcsrtombs", "wcstombs", "wctomb", "wmemcpy", "wmemmove", "wmempcpy",
    "wmemset", "wprintf",
};

}  // namespace

const FortifyList& FortifyList::builtin() {
    static FortifyList list = [] {
        FortifyList l;
        for (const char* s : kStems) l.stems_.insert(s);
        return l;
    }();
    return list;
}

FortifyList FortifyList::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fortify list: " + path);
    FortifyList l;
    std::string line;
    while (std::getline(in, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t'))
            line.pop_back();
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        l.stems_.insert(line.substr(start));
    }
    return l;
}

bool FortifyList::contains_stem(std::string_view stem) const {
    return stems_.count(std::string(stem)) > 0;
}

bool FortifyList::is_fortified_symbol(std::string_view symbol) const {
    if (symbol.size() < 7) return false;  // __x_chk
    if (symbol.substr(0, 2) != "__") return false;
    if (symbol.substr(symbol.size() - 4) != "_chk") return false;
    std::string_view stem = symbol.substr(2, symbol.size() - 6);
    // Tolerate the isoc99/isoc23 scanf-family prefixes glibc uses.
    for (std::string_view pfx : {"isoc99_", "isoc23_"})
        if (stem.rfind(pfx, 0) == 0) {
            std::string_view rest = stem.substr(pfx.size());
            if (contains_stem(rest)) return true;
        }
    return contains_stem(stem);
}

}  // namespace fwaudit
