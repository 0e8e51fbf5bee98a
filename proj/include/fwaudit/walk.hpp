#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fwaudit/bytes.hpp"

namespace fwaudit::unpack {

struct WalkResult {
    // Regular files starting with the ELF magic, relative paths preserved.
    std::vector<std::filesystem::path> elf_files;
    std::vector<std::filesystem::path> other_files;
    std::vector<std::string> errors;       // unreadable entries, non-fatal
    std::vector<std::string> loop_diags;   // symlink cycles detected
};

// Recursive traversal following symlinks with cycle detection.
WalkResult walk_tree(const std::filesystem::path& root);

ByteBuf read_file(const std::filesystem::path& p);

}  // namespace fwaudit::unpack
