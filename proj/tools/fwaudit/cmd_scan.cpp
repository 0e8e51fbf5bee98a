#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "commands.hpp"
#include "fwaudit/manifest.hpp"
#include "fwaudit/pipeline.hpp"

namespace fwaudit::cli {

namespace fs = std::filesystem;

namespace {

records::Meta meta_for_input(const std::string& input,
                             const std::vector<unpack::FirmwareMeta>& manifest) {
    records::Meta meta;
    std::string base = fs::path(input).filename().string();
    for (const auto& m : manifest) {
        if (m.file_path == input || fs::path(m.file_path).filename().string() == base) {
            meta.image_id = m.image_id;
            meta.vendor = m.vendor;
            meta.product = m.product;
            meta.firmware_version = m.firmware_version;
            meta.release_date = m.release_date;
            meta.device_type = m.device_type;
            return meta;
        }
    }
    meta.image_id = base;
    return meta;
}

}  // namespace

int cmd_scan(const ScanArgs& args) {
    std::vector<unpack::FirmwareMeta> manifest;
    if (!args.manifest_path.empty()) {
        auto result = unpack::ingest_manifest(args.manifest_path);
        manifest = result.accepted;
        for (const auto& f : result.flagged)
            std::cerr << "manifest: flagged " << f.file_path << " (" << f.flag_reason
                      << ")\n";
    }

    pipeline::ScanOptions opts;
    opts.depth_limit = args.depth_limit;
    opts.carve = args.carve;
    opts.kallsyms = args.kallsyms;
    opts.rar_support = args.rar_support;

    fs::create_directories(args.output_dir);

    unsigned jobs = args.jobs ? args.jobs : std::max(1u, std::thread::hardware_concurrency());
    std::vector<pipeline::ImageScanResult> results(args.inputs.size());
    std::vector<int> ok(args.inputs.size(), 0);
    std::atomic<size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= args.inputs.size()) return;
            const std::string& input = args.inputs[i];
            try {
                auto meta = meta_for_input(input, manifest);
                results[i] = pipeline::scan_path(input, meta, opts);
                ok[i] = 1;
            } catch (const std::exception& e) {
                std::lock_guard lock(log_mutex);
                std::cerr << input << ": " << e.what() << "\n";
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t + 1 < jobs && t + 1 < args.inputs.size(); ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // Ordered sink: records land in input order regardless of worker timing.
    std::ofstream out(fs::path(args.output_dir) / "scan.ndjson");
    size_t images = 0, unpacked = 0, binaries = 0, kernels = 0, errors = 0, processed = 0;
    for (size_t i = 0; i < results.size(); ++i) {
        if (!ok[i]) {
            ++errors;
            continue;
        }
        ++processed;
        const auto& r = results[i];
        for (const auto& b : r.binaries) out << records::to_json(b).dump() << "\n";
        for (const auto& k : r.kernels) out << records::to_json(k).dump() << "\n";
        if (r.firmware) {
            out << records::to_json(*r.firmware).dump() << "\n";
            ++images;
            if (r.firmware->unpack_status == "unpacked") ++unpacked;
        }
        binaries += r.binaries.size();
        kernels += r.kernels.size();
        errors += r.errors.size();
    }

    nlohmann::json summary{
        {"schema_version", records::kSchemaVersion},
        {"type", "summary"},
        {"images", images},
        {"unpacked", unpacked},
        {"binaries", binaries},
        {"kernels", kernels},
        {"errors", errors},
        {"timestamp",
         std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
             .count()},
    };
    out << summary.dump() << "\n";

    std::cout << "scanned " << processed << "/" << args.inputs.size() << " inputs: " << images
              << " images (" << unpacked << " unpacked), " << binaries << " binaries, "
              << kernels << " kernels, " << errors << " errors\n"
              << "records: " << (fs::path(args.output_dir) / "scan.ndjson").string() << "\n";

    return processed == 0 ? 1 : 0;
}

}  // namespace fwaudit::cli
