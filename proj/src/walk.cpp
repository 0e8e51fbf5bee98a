#include "fwaudit/walk.hpp"

#include <sys/stat.h>

#include <fstream>
#include <set>

namespace fwaudit::unpack {

namespace fs = std::filesystem;

namespace {

struct Walker {
    WalkResult result;
    std::set<std::pair<dev_t, ino_t>> visited_dirs;

    void visit_dir(const fs::path& dir, int depth) {
        if (depth > 64) {
            result.errors.push_back(dir.string() + ": directory nesting too deep");
            return;
        }
        struct stat st{};
        if (stat(dir.c_str(), &st) != 0) {
            result.errors.push_back(dir.string() + ": stat failed");
            return;
        }
        auto key = std::make_pair(st.st_dev, st.st_ino);
        if (visited_dirs.count(key)) {
            result.loop_diags.push_back(dir.string() + ": directory cycle, skipped");
            return;
        }
        visited_dirs.insert(key);

        std::error_code ec;
        fs::directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec);
        if (ec) {
            result.errors.push_back(dir.string() + ": " + ec.message());
            return;
        }
        for (const auto& entry : it) {
            std::error_code sec;
            fs::file_status st2 = fs::status(entry.path(), sec);  // follows symlinks
            if (sec) {
                result.errors.push_back(entry.path().string() + ": " + sec.message());
                continue;
            }
            if (fs::is_directory(st2)) {
                visit_dir(entry.path(), depth + 1);
            } else if (fs::is_regular_file(st2)) {
                classify_file(entry.path());
            }
        }
    }

    void classify_file(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) {
            result.errors.push_back(p.string() + ": unreadable");
            return;
        }
        char magic[4] = {};
        in.read(magic, 4);
        if (in.gcount() == 4 && magic[0] == 0x7f && magic[1] == 'E' && magic[2] == 'L' &&
            magic[3] == 'F')
            result.elf_files.push_back(p);
        else
            result.other_files.push_back(p);
    }
};

}  // namespace

WalkResult walk_tree(const fs::path& root) {
    Walker w;
    w.visit_dir(root, 0);
    std::sort(w.result.elf_files.begin(), w.result.elf_files.end());
    std::sort(w.result.other_files.begin(), w.result.other_files.end());
    return w.result;
}

ByteBuf read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    return ByteBuf(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace fwaudit::unpack
