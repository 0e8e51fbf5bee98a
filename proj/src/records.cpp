#include "fwaudit/records.hpp"

#include <filesystem>
#include <fstream>

namespace fwaudit::records {

namespace {

using nlohmann::json;

json verdict_json(const VerdictOut& v) {
    return json{{"status", v.status}, {"method", v.method}, {"evidence", v.evidence}};
}

VerdictOut verdict_from(const json& j) {
    VerdictOut v;
    v.status = j.at("status").get<std::string>();
    v.method = j.at("method").get<std::string>();
    if (j.contains("evidence")) v.evidence = j.at("evidence").get<std::vector<std::string>>();
    return v;
}

json meta_json(const Meta& m) {
    json j{{"image_id", m.image_id},
           {"vendor", m.vendor},
           {"product", m.product},
           {"firmware_version", m.firmware_version},
           {"device_type", m.device_type}};
    j["release_date"] = m.release_date ? json(m.release_date->iso()) : json(nullptr);
    return j;
}

Meta meta_from(const json& j) {
    Meta m;
    if (!j.is_object()) return m;
    m.image_id = j.value("image_id", "");
    m.vendor = j.value("vendor", "");
    m.product = j.value("product", "");
    m.firmware_version = j.value("firmware_version", "");
    m.device_type = j.value("device_type", "unknown");
    if (j.contains("release_date") && j["release_date"].is_string())
        m.release_date = kernel::Date::parse_iso(j["release_date"].get<std::string>());
    return m;
}

VerdictOut verdict_out(const mitig::Verdict& v) {
    return {mitig::status_name(v.status), mitig::method_name(v.method), v.evidence};
}

void check_schema(const json& j) {
    std::string v = j.value("schema_version", "");
    if (schema_major(v) != schema_major(kSchemaVersion))
        throw SchemaMismatch("record schema_version '" + v + "' incompatible with '" +
                             std::string(kSchemaVersion) + "'");
}

}  // namespace

int schema_major(std::string_view version) {
    int major = -1;
    auto dot = version.find('.');
    std::string head(version.substr(0, dot));
    try {
        major = std::stoi(head);
    } catch (...) {
        return -1;
    }
    return major;
}

bool BinaryRecord::verdict_protected(const std::string& mitigation) const {
    if (mitigation == "canary") return canary.status == "protected";
    if (mitigation == "nx") return nx.status == "protected";
    if (mitigation == "fortify") return fortify.status == "protected";
    if (mitigation == "pie") return pie.status == "protected";
    if (mitigation == "relro") return relro_level == "partial" || relro_level == "full";
    return false;
}

json to_json(const BinaryRecord& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = "binary";
    j["path"] = r.path;
    j["digest"] = r.digest;
    j["arch"] = r.arch;
    j["bits"] = r.bits;
    j["endianness"] = r.endianness;
    j["class"] = {{"linkage", r.linkage},
                  {"role", r.role},
                  {"stripped", r.stripped},
                  {"libc", r.libc}};
    j["canary"] = verdict_json(r.canary);
    j["relro"] = verdict_json(r.relro);
    j["relro"]["level"] = r.relro_level;
    j["nx"] = verdict_json(r.nx);
    j["fortify"] = verdict_json(r.fortify);
    j["pie"] = verdict_json(r.pie);
    j["meta"] = meta_json(r.meta);
    return j;
}

BinaryRecord binary_from_json(const json& j) {
    check_schema(j);
    BinaryRecord r;
    r.path = j.at("path").get<std::string>();
    r.digest = j.at("digest").get<std::string>();
    r.arch = j.value("arch", "other");
    r.bits = j.value("bits", 0);
    r.endianness = j.value("endianness", "little");
    const auto& cls = j.at("class");
    r.linkage = cls.value("linkage", "static");
    r.role = cls.value("role", "unknown");
    r.stripped = cls.value("stripped", false);
    r.libc = cls.value("libc", "unknown");
    r.canary = verdict_from(j.at("canary"));
    r.relro = verdict_from(j.at("relro"));
    r.relro_level = j.at("relro").value("level", "none");
    r.nx = verdict_from(j.at("nx"));
    r.fortify = verdict_from(j.at("fortify"));
    r.pie = verdict_from(j.at("pie"));
    r.meta = meta_from(j.value("meta", json::object()));
    return r;
}

json to_json(const KernelOutRecord& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = "kernel";
    j["id"] = r.id;
    j["path"] = r.path;
    j["version"] = {{"major", r.version.major},
                    {"minor", r.version.minor},
                    {"patch", r.version.patch},
                    {"string", r.version.str()}};
    j["banner"] = r.banner;
    j["build_date"] = r.build_date ? json(r.build_date->iso()) : json(nullptr);
    j["arch"] = r.arch;
    j["has_config"] = r.has_config;
    // Module options (=m) count as set; recorded for consumers.
    j["config_set_policy"] = "y_or_m";
    j["symbol_source"] = r.symbol_source;
    json mit = json::object();
    for (const auto& [name, sb] : r.mitigations)
        mit[name] = {{"status", sb.first}, {"basis", sb.second}};
    j["mitigations"] = mit;
    j["meta"] = meta_json(r.meta);
    return j;
}

KernelOutRecord kernel_from_json(const json& j) {
    check_schema(j);
    KernelOutRecord r;
    r.id = j.at("id").get<std::string>();
    r.path = j.value("path", "");
    const auto& v = j.at("version");
    r.version = {v.value("major", 0), v.value("minor", 0), v.value("patch", 0)};
    r.banner = j.value("banner", "");
    if (j.contains("build_date") && j["build_date"].is_string())
        r.build_date = kernel::Date::parse_iso(j["build_date"].get<std::string>());
    r.arch = j.value("arch", "unknown");
    r.has_config = j.value("has_config", false);
    r.symbol_source = j.value("symbol_source", "none");
    if (j.contains("mitigations"))
        for (auto it = j["mitigations"].begin(); it != j["mitigations"].end(); ++it)
            r.mitigations[it.key()] = {it.value().value("status", "unknown"),
                                       it.value().value("basis", "version_gate")};
    r.meta = meta_from(j.value("meta", json::object()));
    return r;
}

json to_json(const FirmwareOutRecord& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = "firmware";
    j["source_path"] = r.source_path;
    j["unpack_status"] = r.unpack_status;
    j["binaries"] = r.binary_digests;
    j["kernels"] = r.kernel_ids;
    j["counts"] = {{"binaries", r.n_binaries}, {"kernels", r.n_kernels}, {"errors", r.n_errors}};
    j["meta"] = meta_json(r.meta);
    return j;
}

FirmwareOutRecord firmware_from_json(const json& j) {
    check_schema(j);
    FirmwareOutRecord r;
    r.source_path = j.value("source_path", "");
    r.unpack_status = j.value("unpack_status", "nothing_recognized");
    if (j.contains("binaries")) r.binary_digests = j["binaries"].get<std::vector<std::string>>();
    if (j.contains("kernels")) r.kernel_ids = j["kernels"].get<std::vector<std::string>>();
    if (j.contains("counts")) {
        r.n_binaries = j["counts"].value("binaries", 0);
        r.n_kernels = j["counts"].value("kernels", 0);
        r.n_errors = j["counts"].value("errors", 0);
    }
    r.meta = meta_from(j.value("meta", json::object()));
    return r;
}

BinaryRecord make_binary_record(const mitig::Report& rep, const std::string& path,
                                const Meta& meta) {
    BinaryRecord r;
    r.meta = meta;
    r.path = path;
    r.digest = rep.content_digest.hex();
    r.arch = elf::machine_name(rep.machine);
    r.bits = rep.bitness;
    r.endianness = rep.endianness == elf::Endian::Big ? "big" : "little";
    r.linkage = elf::linkage_name(rep.binary_class.linkage);
    r.role = elf::role_name(rep.binary_class.role);
    r.stripped = rep.binary_class.stripped;
    r.libc = elf::libc_name(rep.binary_class.libc);
    r.canary = verdict_out(rep.canary);
    r.relro = verdict_out(rep.relro.verdict);
    r.relro_level = mitig::relro_level_name(rep.relro.level);
    r.nx = verdict_out(rep.nx);
    r.fortify = verdict_out(rep.fortify);
    r.pie = verdict_out(rep.pie);
    return r;
}

KernelOutRecord make_kernel_record(const kernel::KernelRecord& rec,
                                   const kernel::KernelMitigationStatus& status,
                                   const std::string& id, const std::string& path,
                                   const Meta& meta) {
    KernelOutRecord r;
    r.meta = meta;
    r.id = id;
    r.path = path;
    r.version = rec.version;
    r.banner = rec.banner;
    r.build_date = rec.build_date;
    r.arch = kernel::kernel_arch_name(rec.arch);
    r.has_config = rec.config.has_value();
    r.symbol_source = kernel::symbol_source_name(rec.symbol_source);
    for (const auto& [m, res] : status.results)
        r.mitigations[kernel::kernel_mitigation_name(m)] = {
            kernel::kstatus_name(res.status), kernel::kbasis_name(res.basis)};
    return r;
}

void parse_ndjson_line(const std::string& line, RecordSet& into) {
    if (line.empty()) return;
    json j = json::parse(line);
    std::string type = j.value("type", "");
    if (type == "binary")
        into.binaries.push_back(binary_from_json(j));
    else if (type == "kernel")
        into.kernels.push_back(kernel_from_json(j));
    else if (type == "firmware")
        into.firmware.push_back(firmware_from_json(j));
    // Unknown types (e.g. run summaries) are skipped.
}

RecordSet load_ndjson_dir(const std::string& dir) {
    RecordSet set;
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".ndjson")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f);
        std::string line;
        while (std::getline(in, line)) parse_ndjson_line(line, set);
    }
    return set;
}

}  // namespace fwaudit::records
