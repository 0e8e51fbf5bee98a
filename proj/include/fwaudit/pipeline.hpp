#pragma once

#include <filesystem>
#include <optional>

#include "fwaudit/archive.hpp"
#include "fwaudit/carve.hpp"
#include "fwaudit/records.hpp"

namespace fwaudit::pipeline {

struct ScanOptions {
    int depth_limit = unpack::kDefaultDepthLimit;
    bool carve = true;        // carve embedded ELFs out of opaque blobs
    bool kallsyms = true;     // recover symbols from raw kernel images
    bool rar_support = false; // recognized but not decoded when off
};

struct ImageScanResult {
    std::optional<records::FirmwareOutRecord> firmware;
    std::vector<records::BinaryRecord> binaries;
    std::vector<records::KernelOutRecord> kernels;
    std::vector<std::string> errors;
    unpack::CarveDiagnostics carve_diag;
    size_t archive_diagnostics = 0;
};

// Scans one firmware image held in memory: expand, identify ELF binaries and
// kernel candidates, analyze, and assemble records.
ImageScanResult scan_image_bytes(ByteSpan bytes, const std::string& name,
                                 const records::Meta& meta, const ScanOptions& opts);

// Path dispatch: directories walk as pre-extracted trees, ELF files scan
// directly, anything else is treated as a firmware image.
ImageScanResult scan_path(const std::filesystem::path& path, const records::Meta& meta,
                          const ScanOptions& opts);

// Shannon entropy in bits per byte; encrypted images sit near 8.
double byte_entropy(ByteSpan bytes);

}  // namespace fwaudit::pipeline
