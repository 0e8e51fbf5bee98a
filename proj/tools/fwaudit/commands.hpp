#pragma once

#include <string>
#include <vector>

namespace fwaudit::cli {

struct ScanArgs {
    std::vector<std::string> inputs;
    std::string manifest_path;
    std::string output_dir = "fwaudit-out";
    unsigned jobs = 0;  // 0 = hardware concurrency
    int depth_limit = 4;
    bool carve = true;
    bool kallsyms = true;
    bool rar_support = false;
    bool keep_extracted = false;
};

struct StatsArgs {
    std::vector<std::string> results_dirs;
    std::string query_path;
    std::string out_dir;  // empty = stdout
    std::string format = "csv";
};

struct CheckArgs {
    std::string path;
    std::vector<std::string> fail_on;
};

int cmd_scan(const ScanArgs& args);
int cmd_stats(const StatsArgs& args);
int cmd_check(const CheckArgs& args);
int cmd_manifest_validate(const std::string& path);

}  // namespace fwaudit::cli
