#pragma once

#include <set>
#include <string>
#include <string_view>

namespace fwaudit {

// Whitelist of libc function stems that have fortified __<stem>_chk
// replacements. Symbols merely ending in _chk but not derived from this list
// are ignored (false-positive guard).
class FortifyList {
public:
    // Built-in list; identical content ships in data/fortify_functions.txt.
    static const FortifyList& builtin();

    // Loads one stem per line; '#' comments and blank lines ignored.
    static FortifyList from_file(const std::string& path);

    bool contains_stem(std::string_view stem) const;

    // True iff symbol has the shape __<stem>_chk with a whitelisted stem.
    bool is_fortified_symbol(std::string_view symbol) const;

    const std::set<std::string>& stems() const { return stems_; }

private:
    std::set<std::string> stems_;
};

}  // namespace fwaudit
