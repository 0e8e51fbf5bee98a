#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fwaudit/kernel.hpp"

namespace fwaudit::unpack {

enum class UnpackStatus { Unpacked, NothingRecognized, EncryptedOrNonlinux };
const char* unpack_status_name(UnpackStatus s);

// Crawler-style metadata for one firmware image.
struct FirmwareMeta {
    std::string image_id;
    std::string vendor;
    std::string product;
    std::string firmware_version;
    std::optional<kernel::Date> release_date;
    std::string device_type = "unknown";  // taxonomy value or "unknown"
    std::string file_path;
    bool extension_ok = true;  // false => flagged by the extension filter
    std::string flag_reason;
};

struct SchemaError : std::runtime_error {
    size_t row;
    SchemaError(size_t row_no, const std::string& msg)
        : std::runtime_error("manifest row " + std::to_string(row_no) + ": " + msg),
          row(row_no) {}
};

struct ManifestResult {
    std::vector<FirmwareMeta> accepted;
    std::vector<FirmwareMeta> flagged;  // rows excluded by the extension filter
};

// CSV (with header) or JSON array; columns/keys:
// image_id, vendor, product, firmware_version, release_date, device_type,
// file_path. Rows whose file extension is outside the firmware-extension
// list are flagged and excluded.
ManifestResult ingest_manifest(const std::string& path);
ManifestResult ingest_manifest_text(const std::string& text, bool json);

// Accepted firmware download extensions.
bool firmware_extension_ok(const std::string& file_path);

// Device-type taxonomy: known categories normalize to lowercase with
// underscores; anything else maps to "unknown".
std::string normalize_device_type(const std::string& raw);
const std::vector<std::string>& device_type_taxonomy();

}  // namespace fwaudit::unpack
