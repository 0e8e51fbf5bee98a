#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "fwaudit/manifest.hpp"

namespace fwaudit::cli {

int cmd_manifest_validate(const std::string& path) {
    try {
        auto result = unpack::ingest_manifest(path);
        std::cout << path << ": " << result.accepted.size() << " rows accepted, "
                  << result.flagged.size() << " flagged\n";
        for (const auto& f : result.flagged)
            std::cout << "  flagged: " << f.image_id << " (" << f.file_path << "): "
                      << f.flag_reason << "\n";
        return 0;
    } catch (const unpack::SchemaError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}

}  // namespace fwaudit::cli

int main(int argc, char** argv) {
    using namespace fwaudit::cli;

    CLI::App app{"fwaudit - firmware exploit-mitigation audit toolkit"};
    app.require_subcommand(1);

    ScanArgs scan_args;
    auto* scan = app.add_subcommand(
        "scan", "Unpack firmware images and analyze contained binaries and kernels");
    scan->add_option("inputs", scan_args.inputs,
                     "Firmware images, directories, or ELF files")
        ->required()
        ->expected(-1);
    scan->add_option("--manifest", scan_args.manifest_path,
                     "Corpus manifest (CSV or JSON) with image metadata");
    scan->add_option("-o,--output-dir", scan_args.output_dir, "Record output directory");
    scan->add_option("-j,--jobs", scan_args.jobs, "Worker count (default: processors)");
    scan->add_option("--depth", scan_args.depth_limit, "Archive nesting depth limit");
    scan->add_flag("!--no-carve", scan_args.carve, "Disable embedded-ELF carving");
    scan->add_flag("!--no-kallsyms", scan_args.kallsyms,
                   "Disable kallsyms symbol recovery");
    scan->add_flag("--rar", scan_args.rar_support, "Enable rar expansion when available");

    StatsArgs stats_args;
    auto* stats = app.add_subcommand("stats", "Compute corpus statistics from scan records");
    stats->add_option("--results", stats_args.results_dirs,
                      "Directories holding scan NDJSON records")
        ->required()
        ->expected(-1);
    stats->add_option("--query", stats_args.query_path, "Query spec JSON file");
    stats->add_option("--out", stats_args.out_dir,
                      "Write tables as CSV files here instead of stdout");

    CheckArgs check_args;
    auto* check = app.add_subcommand("check", "Audit a single ELF binary");
    check->add_option("binary", check_args.path, "ELF file to audit")->required();
    check->add_option("--fail-on", check_args.fail_on,
                      "Exit 1 unless this mitigation is present (repeatable)");

    auto* manifest = app.add_subcommand("manifest", "Manifest utilities");
    std::string manifest_path;
    auto* validate = manifest->add_subcommand("validate", "Validate a corpus manifest");
    validate->add_option("file", manifest_path, "Manifest file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan->parsed()) return cmd_scan(scan_args);
        if (stats->parsed()) return cmd_stats(stats_args);
        if (check->parsed()) return cmd_check(check_args);
        if (manifest->parsed() && validate->parsed())
            return cmd_manifest_validate(manifest_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << app.help();
    return 1;
}
