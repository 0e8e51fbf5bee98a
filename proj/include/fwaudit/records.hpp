#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fwaudit/kernel.hpp"
#include "fwaudit/manifest.hpp"
#include "fwaudit/mitigations.hpp"

namespace fwaudit::records {

// Bump the major on breaking field/enum changes; stats refuses mixed majors.
inline constexpr std::string_view kSchemaVersion = "1.0";

int schema_major(std::string_view version);

struct SchemaMismatch : std::runtime_error {
    explicit SchemaMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

// Firmware metadata stamped onto contained artifact records.
struct Meta {
    std::string image_id;
    std::string vendor;
    std::string product;
    std::string firmware_version;
    std::optional<kernel::Date> release_date;
    std::string device_type = "unknown";
};

struct VerdictOut {
    std::string status;  // protected | not_protected | not_applicable | unknown
    std::string method;  // symbol | relocation | string_heuristic | header | config
    std::vector<std::string> evidence;
};

struct BinaryRecord {
    Meta meta;
    std::string path;
    std::string digest;  // md5 hex
    std::string arch;
    int bits = 0;
    std::string endianness;  // little | big
    std::string linkage;
    std::string role;
    bool stripped = false;
    std::string libc;
    VerdictOut canary, nx, fortify, pie;
    std::string relro_level;  // none | partial | full
    VerdictOut relro;

    bool is_executable() const { return role == "executable"; }
    bool verdict_protected(const std::string& mitigation) const;
};

struct KernelOutRecord {
    Meta meta;
    std::string id;
    std::string path;
    kernel::KernelVersion version;
    std::string banner;
    std::optional<kernel::Date> build_date;
    std::string arch;
    bool has_config = false;
    std::string symbol_source = "none";
    // mitigation name -> (status, basis)
    std::map<std::string, std::pair<std::string, std::string>> mitigations;
};

struct FirmwareOutRecord {
    Meta meta;
    std::string source_path;
    std::string unpack_status;
    std::vector<std::string> binary_digests;
    std::vector<std::string> kernel_ids;
    size_t n_binaries = 0;
    size_t n_kernels = 0;
    size_t n_errors = 0;
};

nlohmann::json to_json(const BinaryRecord& r);
nlohmann::json to_json(const KernelOutRecord& r);
nlohmann::json to_json(const FirmwareOutRecord& r);

BinaryRecord binary_from_json(const nlohmann::json& j);
KernelOutRecord kernel_from_json(const nlohmann::json& j);
FirmwareOutRecord firmware_from_json(const nlohmann::json& j);

// Converts a detector report plus metadata into the wire record.
BinaryRecord make_binary_record(const mitig::Report& rep, const std::string& path,
                                const Meta& meta);

KernelOutRecord make_kernel_record(const kernel::KernelRecord& rec,
                                   const kernel::KernelMitigationStatus& status,
                                   const std::string& id, const std::string& path,
                                   const Meta& meta);

struct RecordSet {
    std::vector<BinaryRecord> binaries;
    std::vector<KernelOutRecord> kernels;
    std::vector<FirmwareOutRecord> firmware;
};

// Reads every *.ndjson under dir (recursively); one JSON object per line.
RecordSet load_ndjson_dir(const std::string& dir);
void parse_ndjson_line(const std::string& line, RecordSet& into);

}  // namespace fwaudit::records
