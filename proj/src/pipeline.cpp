#include "fwaudit/pipeline.hpp"

#include <cmath>

#include "fwaudit/kallsyms.hpp"
#include "fwaudit/walk.hpp"

namespace fwaudit::pipeline {

namespace {

namespace fs = std::filesystem;

bool starts_with_elf(ByteSpan b) {
    return b.size() >= 4 && b[0] == 0x7f && b[1] == 'E' && b[2] == 'L' && b[3] == 'F';
}

// Threshold for calling an unrecognized image encrypted rather than merely
// unknown: near-maximal entropy over a non-trivial amount of data.
constexpr double kEncryptedEntropy = 7.98;
constexpr size_t kEncryptedMinSize = 256 * 1024;

struct KernelAnalysis {
    kernel::KernelRecord record;
    kernel::KernelMitigationStatus status;
};

std::optional<KernelAnalysis> analyze_kernel(ByteSpan candidate, bool kallsyms_enabled,
                                             const std::optional<kernel::KernelConfig>& config,
                                             std::vector<std::string>& errors,
                                             const std::string& name) {
    KernelAnalysis out;
    try {
        auto banner = kernel::find_kernel_version(candidate);
        out.record.version = banner.version;
        out.record.banner = banner.banner;
        out.record.build_date = banner.build_date;
    } catch (const kernel::NoVersionFound&) {
        return std::nullopt;
    }

    // vmlinux ELF images carry machine and symbols directly.
    if (starts_with_elf(candidate)) {
        try {
            elf::ElfView view = elf::parse_elf(candidate);
            out.record.arch = kernel::kernel_arch_from_machine(view.machine);
            for (const auto& s : view.static_symbols)
                if (!s.name.empty()) out.record.symbols.push_back(s.name);
            if (!out.record.symbols.empty())
                out.record.symbol_source = kernel::SymbolSource::ElfSymtab;
        } catch (const elf::ElfError& e) {
            errors.push_back(name + ": kernel ELF unparseable: " + e.what());
        }
    }

    if (out.record.symbols.empty() && kallsyms_enabled) {
        try {
            out.record.symbols = kernel::extract_kallsyms(candidate);
            out.record.symbol_source = kernel::SymbolSource::Kallsyms;
        } catch (const kernel::KallsymsNotFound&) {
            // No symbol table embedded; config or version gates still apply.
        } catch (const kernel::LayoutUnsupported& e) {
            errors.push_back(name + ": " + e.what());
        }
    }

    out.record.config = config;
    if (config) {
        if (out.record.arch == kernel::KernelArch::Unknown && config->arch_hint())
            out.record.arch = kernel::kernel_arch_from_string(*config->arch_hint());
    }
    out.status = kernel::detect_kernel_mitigations(out.record);
    return out;
}

struct Collector {
    const records::Meta& meta;
    const ScanOptions& opts;
    ImageScanResult& result;
    size_t kernel_seq = 0;

    void add_binary(ByteSpan bytes, const std::string& path) {
        try {
            auto rep = mitig::scan_binary(bytes);
            result.binaries.push_back(records::make_binary_record(rep, path, meta));
        } catch (const elf::ElfError& e) {
            ++result.carve_diag.parse_false_positives;
            result.errors.push_back(path + ": " + e.what());
        }
    }

    void add_kernel_candidate(ByteSpan candidate, const std::string& path,
                              const std::optional<kernel::KernelConfig>& config) {
        auto analysis =
            analyze_kernel(candidate, opts.kallsyms, config, result.errors, path);
        if (!analysis) return;
        std::string id = "k-" + md5(candidate).hex();
        result.kernels.push_back(
            records::make_kernel_record(analysis->record, analysis->status, id, path, meta));
        ++kernel_seq;
    }
};

}  // namespace

double byte_entropy(ByteSpan bytes) {
    if (bytes.empty()) return 0.0;
    size_t hist[256] = {};
    for (uint8_t b : bytes) ++hist[b];
    double h = 0.0;
    for (size_t c : hist) {
        if (!c) continue;
        double p = static_cast<double>(c) / bytes.size();
        h -= p * std::log2(p);
    }
    return h;
}

ImageScanResult scan_image_bytes(ByteSpan bytes, const std::string& name,
                                 const records::Meta& meta, const ScanOptions& opts) {
    ImageScanResult result;
    Collector col{meta, opts, result};

    unpack::ExpandDiagnostics ediag;
    auto entries = unpack::expand_archive(bytes, opts.depth_limit, ediag, name);
    result.archive_diagnostics = ediag.corrupt_entries.size();
    for (const auto& e : ediag.corrupt_entries) result.errors.push_back(e);

    // First pass: recover any build configuration shipped alongside.
    std::optional<kernel::KernelConfig> config;
    size_t configs_seen = 0;
    for (const auto& entry : entries) {
        ByteSpan data{entry.data.data(), entry.data.size()};
        if (!starts_with_elf(data) && unpack::looks_kernel_config(data)) {
            ++configs_seen;
            if (configs_seen == 1)
                config = kernel::KernelConfig::parse(
                    std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
        }
    }
    // Ambiguous: more than one config in the image; attach none.
    if (configs_seen > 1) config.reset();

    for (const auto& entry : entries) {
        ByteSpan data{entry.data.data(), entry.data.size()};
        if (starts_with_elf(data)) {
            col.add_binary(data, entry.path);
            continue;
        }
        auto kernels = unpack::carve_kernels(data, result.carve_diag);
        for (const auto& k : kernels) {
            std::string kpath = entry.path;
            if (k.offset) kpath += "@" + std::to_string(k.offset);
            col.add_kernel_candidate({k.bytes.data(), k.bytes.size()}, kpath, config);
        }
        if (opts.carve && kernels.empty()) {
            auto elves = unpack::carve_elves(data, result.carve_diag);
            for (const auto& a : elves)
                col.add_binary({a.bytes.data(), a.bytes.size()},
                               entry.path + "@" + std::to_string(a.offset));
        }
    }

    records::FirmwareOutRecord fw;
    fw.meta = meta;
    fw.source_path = name;
    for (const auto& b : result.binaries) fw.binary_digests.push_back(b.digest);
    for (const auto& k : result.kernels) fw.kernel_ids.push_back(k.id);
    fw.n_binaries = result.binaries.size();
    fw.n_kernels = result.kernels.size();
    fw.n_errors = result.errors.size();
    if (!result.binaries.empty() || !result.kernels.empty()) {
        fw.unpack_status = unpack::unpack_status_name(unpack::UnpackStatus::Unpacked);
    } else if (bytes.size() >= kEncryptedMinSize && byte_entropy(bytes) >= kEncryptedEntropy) {
        fw.unpack_status =
            unpack::unpack_status_name(unpack::UnpackStatus::EncryptedOrNonlinux);
    } else {
        fw.unpack_status =
            unpack::unpack_status_name(unpack::UnpackStatus::NothingRecognized);
    }
    result.firmware = std::move(fw);
    return result;
}

ImageScanResult scan_path(const fs::path& path, const records::Meta& meta,
                          const ScanOptions& opts) {
    if (fs::is_directory(path)) {
        ImageScanResult result;
        Collector col{meta, opts, result};
        auto walk = unpack::walk_tree(path);
        for (const auto& e : walk.errors) result.errors.push_back(e);
        for (const auto& e : walk.loop_diags) result.errors.push_back(e);

        std::optional<kernel::KernelConfig> config;
        size_t configs_seen = 0;
        for (const auto& f : walk.other_files) {
            std::string fname = f.filename().string();
            if (fname.find("config") == std::string::npos) continue;
            try {
                ByteBuf data = unpack::read_file(f);
                if (unpack::looks_kernel_config({data.data(), data.size()})) {
                    ++configs_seen;
                    if (configs_seen == 1)
                        config = kernel::KernelConfig::parse(std::string_view(
                            reinterpret_cast<const char*>(data.data()), data.size()));
                }
            } catch (const std::exception& e) {
                result.errors.push_back(e.what());
            }
        }
        if (configs_seen > 1) config.reset();

        for (const auto& f : walk.elf_files) {
            try {
                ByteBuf data = unpack::read_file(f);
                col.add_binary({data.data(), data.size()},
                               fs::relative(f, path).string());
            } catch (const std::exception& e) {
                result.errors.push_back(e.what());
            }
        }
        if (opts.kallsyms || opts.carve) {
            for (const auto& f : walk.other_files) {
                std::error_code ec;
                auto size = fs::file_size(f, ec);
                if (ec || size > (64u << 20) || size < 64) continue;
                try {
                    ByteBuf data = unpack::read_file(f);
                    auto kernels =
                        unpack::carve_kernels({data.data(), data.size()}, result.carve_diag);
                    for (const auto& k : kernels) {
                        std::string kpath = fs::relative(f, path).string();
                        if (k.offset) kpath += "@" + std::to_string(k.offset);
                        col.add_kernel_candidate({k.bytes.data(), k.bytes.size()}, kpath,
                                                 config);
                    }
                } catch (const std::exception& e) {
                    result.errors.push_back(e.what());
                }
            }
        }

        records::FirmwareOutRecord fw;
        fw.meta = meta;
        fw.source_path = path.string();
        for (const auto& b : result.binaries) fw.binary_digests.push_back(b.digest);
        for (const auto& k : result.kernels) fw.kernel_ids.push_back(k.id);
        fw.n_binaries = result.binaries.size();
        fw.n_kernels = result.kernels.size();
        fw.n_errors = result.errors.size();
        fw.unpack_status = unpack::unpack_status_name(
            fw.n_binaries || fw.n_kernels ? unpack::UnpackStatus::Unpacked
                                          : unpack::UnpackStatus::NothingRecognized);
        result.firmware = std::move(fw);
        return result;
    }

    ByteBuf data = unpack::read_file(path);
    if (starts_with_elf({data.data(), data.size()})) {
        // A bare binary: no firmware wrapper record.
        ImageScanResult result;
        Collector col{meta, opts, result};
        col.add_binary({data.data(), data.size()}, path.string());
        return result;
    }
    return scan_image_bytes({data.data(), data.size()}, path.string(), meta, opts);
}

}  // namespace fwaudit::pipeline
