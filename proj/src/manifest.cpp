#include "fwaudit/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace fwaudit::unpack {

namespace {

const std::vector<std::string> kExtensions = {"img", "bin", "rar", "pkg", "chk",
                                              "tar", "zip", "stk", "rmt"};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// RFC4180-ish CSV line splitting with quoted fields.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

FirmwareMeta meta_from_fields(const std::map<std::string, std::string>& fields, size_t row) {
    FirmwareMeta m;
    auto get = [&](const char* key) {
        auto it = fields.find(key);
        return it == fields.end() ? std::string() : it->second;
    };
    m.image_id = get("image_id");
    m.vendor = get("vendor");
    m.product = get("product");
    m.firmware_version = get("firmware_version");
    m.device_type = normalize_device_type(get("device_type"));
    m.file_path = get("file_path");
    if (m.image_id.empty()) throw SchemaError(row, "missing image_id");
    if (m.file_path.empty()) throw SchemaError(row, "missing file_path");
    std::string date = get("release_date");
    if (!date.empty()) {
        m.release_date = kernel::Date::parse_iso(date);
        if (!m.release_date) throw SchemaError(row, "release_date is not ISO-8601: " + date);
    }
    if (!firmware_extension_ok(m.file_path)) {
        m.extension_ok = false;
        m.flag_reason = "extension outside firmware download list";
    }
    return m;
}

}  // namespace

const char* unpack_status_name(UnpackStatus s) {
    switch (s) {
        case UnpackStatus::Unpacked: return "unpacked";
        case UnpackStatus::NothingRecognized: return "nothing_recognized";
        default: return "encrypted_or_nonlinux";
    }
}

bool firmware_extension_ok(const std::string& file_path) {
    auto dot = file_path.rfind('.');
    if (dot == std::string::npos || dot + 1 == file_path.size()) return false;
    std::string ext = lower(file_path.substr(dot + 1));
    return std::find(kExtensions.begin(), kExtensions.end(), ext) != kExtensions.end();
}

const std::vector<std::string>& device_type_taxonomy() {
    static const std::vector<std::string> taxonomy = {
        "router", "web_camera", "network_port", "network_switch", "network_storage",
        "network_access_point", "repeater", "adapter", "wifi_extender", "wifi_system",
        "wifi_bridge", "controller", "video_recorder", "radio", "mother_board",
        "gateway", "media_connector", "printer", "firewall_modem", "unknown",
    };
    return taxonomy;
}

std::string normalize_device_type(const std::string& raw) {
    std::string n = lower(raw);
    std::replace_if(n.begin(), n.end(), [](char c) { return c == ' ' || c == '-'; }, '_');
    const auto& tax = device_type_taxonomy();
    if (std::find(tax.begin(), tax.end(), n) != tax.end()) return n;
    return "unknown";
}

ManifestResult ingest_manifest_text(const std::string& text, bool json) {
    ManifestResult result;
    if (json) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(0, std::string("invalid JSON: ") + e.what());
        }
        if (!doc.is_array()) throw SchemaError(0, "expected a JSON array of objects");
        size_t row = 0;
        for (const auto& obj : doc) {
            ++row;
            if (!obj.is_object()) throw SchemaError(row, "expected an object");
            std::map<std::string, std::string> fields;
            for (auto it = obj.begin(); it != obj.end(); ++it)
                if (!it.value().is_null())
                    fields[it.key()] = it.value().is_string()
                                           ? it.value().get<std::string>()
                                           : it.value().dump();
            auto m = meta_from_fields(fields, row);
            (m.extension_ok ? result.accepted : result.flagged).push_back(std::move(m));
        }
        return result;
    }

    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        auto fields = split_csv_line(line);
        if (header.empty()) {
            header = fields;
            for (auto& h : header) h = lower(h);
            if (std::find(header.begin(), header.end(), "image_id") == header.end())
                throw SchemaError(row, "header must name image_id");
            continue;
        }
        if (fields.size() != header.size())
            throw SchemaError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                       std::to_string(fields.size()));
        std::map<std::string, std::string> named;
        for (size_t i = 0; i < header.size(); ++i) named[header[i]] = fields[i];
        auto m = meta_from_fields(named, row);
        (m.extension_ok ? result.accepted : result.flagged).push_back(std::move(m));
    }
    return result;
}

ManifestResult ingest_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(0, "cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bool json = false;
    for (char c : text) {
        if (isspace(static_cast<unsigned char>(c))) continue;
        json = c == '[';
        break;
    }
    return ingest_manifest_text(text, json);
}

}  // namespace fwaudit::unpack
