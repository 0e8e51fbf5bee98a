#include "fwaudit/stats.hpp"

#include <algorithm>
#include <cmath>

namespace fwaudit::stats {

namespace {

using records::BinaryRecord;
using records::KernelOutRecord;

struct FamilyKey {
    std::string vendor;
    std::string product;
    auto operator<=>(const FamilyKey&) const = default;
};

struct VersionInstance {
    kernel::Date date;
    std::string firmware_version;
    std::string image_id;
    auto operator<=>(const VersionInstance&) const = default;
};

// Distinct dated firmware versions per (vendor, product) family, sorted by
// (date, firmware_version ascending).
std::map<FamilyKey, std::vector<VersionInstance>> collect_families(
    const std::vector<BinaryRecord>& rs) {
    std::map<FamilyKey, std::set<VersionInstance>> raw;
    for (const auto& r : rs) {
        if (!r.meta.release_date) continue;
        if (r.meta.vendor.empty() || r.meta.product.empty()) continue;
        raw[{r.meta.vendor, r.meta.product}].insert(
            {*r.meta.release_date, r.meta.firmware_version, r.meta.image_id});
    }
    std::map<FamilyKey, std::vector<VersionInstance>> out;
    for (auto& [k, v] : raw) out[k] = std::vector<VersionInstance>(v.begin(), v.end());
    return out;
}

std::string base_name(const std::string& path) {
    auto slash = path.find_last_of("/!");
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

}  // namespace

const std::map<std::string, double> kDebianBaselinePercent = {
    {"canary", 85.3}, {"relro", 98.1}, {"nx", 99.7}, {"fortify", 55.6}, {"pie", 94.0},
};

const char* mitigation_name(Mitigation m) {
    switch (m) {
        case Mitigation::Canary: return "canary";
        case Mitigation::Relro: return "relro";
        case Mitigation::Nx: return "nx";
        case Mitigation::Fortify: return "fortify";
        default: return "pie";
    }
}

std::optional<Mitigation> mitigation_from_name(std::string_view name) {
    for (Mitigation m : kAllMitigations)
        if (name == mitigation_name(m)) return m;
    return std::nullopt;
}

int first_release_year(Mitigation m) {
    switch (m) {
        case Mitigation::Canary: return 2005;   // GCC
        case Mitigation::Relro: return 2004;    // GCC
        case Mitigation::Nx: return 2003;       // GCC
        case Mitigation::Fortify: return 2004;  // glibc
        default: return 2003;                   // PIE, GCC
    }
}

std::string binary_class_label(const BinaryRecord& r) {
    std::string role = r.role == "executable" ? "exe"
                       : r.role == "library"  ? "lib"
                                              : r.role;
    return r.linkage + "_" + role;
}

std::string time_bucket_label(const std::optional<kernel::Date>& d) {
    if (!d) return "unknown";
    if (d->year <= 2009) return "~2010";
    int start = 2010 + (d->year - 2010) / 2 * 2;
    return std::to_string(start) + "-" + std::to_string(start + 1);
}

bool record_applicable(const BinaryRecord& r, Mitigation m) {
    // NX and PIE are meaningful for executables only.
    if ((m == Mitigation::Nx || m == Mitigation::Pie) && !r.is_executable()) return false;
    // Binaries released before the mitigation existed are excluded.
    if (r.meta.release_date && r.meta.release_date->year < first_release_year(m))
        return false;
    return true;
}

bool record_protected(const BinaryRecord& r, Mitigation m) {
    switch (m) {
        case Mitigation::Canary: return r.canary.status == "protected";
        case Mitigation::Nx: return r.nx.status == "protected";
        case Mitigation::Fortify: return r.fortify.status == "protected";
        case Mitigation::Pie: return r.pie.status == "protected";
        // Full and partial RELRO count together as adopted.
        case Mitigation::Relro:
            return r.relro_level == "partial" || r.relro_level == "full";
    }
    return false;
}

bool filter_matches(const BinaryRecord& r, const RateFilter& f) {
    if (f.vendor && r.meta.vendor != *f.vendor) return false;
    if (f.arch && r.arch != *f.arch) return false;
    if (f.device_type && r.meta.device_type != *f.device_type) return false;
    if (f.binary_class && binary_class_label(r) != *f.binary_class) return false;
    if (f.time_bucket && time_bucket_label(r.meta.release_date) != *f.time_bucket)
        return false;
    if (f.image_id && r.meta.image_id != *f.image_id) return false;
    for (const auto& ex : f.exclude_libc)
        if (r.libc == ex) return false;
    return true;
}

RateResult adoption_rate(const std::vector<BinaryRecord>& rs, Mitigation m,
                         const RateFilter& f) {
    RateResult out;
    for (const auto& r : rs) {
        if (!filter_matches(r, f) || !record_applicable(r, m)) continue;
        ++out.denominator;
        if (record_protected(r, m)) ++out.numerator;
    }
    return out;
}

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::Vendor: return "vendor";
        case Axis::Arch: return "arch";
        case Axis::BinaryClass: return "binary_class";
        case Axis::DeviceType: return "device_type";
        default: return "time_bucket";
    }
}

std::optional<Axis> axis_from_name(std::string_view name) {
    for (Axis a : {Axis::Vendor, Axis::Arch, Axis::BinaryClass, Axis::DeviceType,
                   Axis::TimeBucket})
        if (name == axis_name(a)) return a;
    return std::nullopt;
}

std::string axis_value(const BinaryRecord& r, Axis a) {
    switch (a) {
        case Axis::Vendor: return r.meta.vendor.empty() ? "unknown" : r.meta.vendor;
        case Axis::Arch: return r.arch;
        case Axis::BinaryClass: return binary_class_label(r);
        case Axis::DeviceType: return r.meta.device_type;
        default: return time_bucket_label(r.meta.release_date);
    }
}

BreakdownTable breakdown(const std::vector<BinaryRecord>& rs, Axis axis,
                         const RateFilter& base) {
    BreakdownTable table;
    table.axis = axis;
    std::map<std::string, std::map<Mitigation, RateResult>> cells;
    for (const auto& r : rs) {
        if (!filter_matches(r, base)) continue;
        std::string value = axis_value(r, axis);
        for (Mitigation m : kAllMitigations) {
            if (!record_applicable(r, m)) continue;
            auto& cell = cells[value][m];
            ++cell.denominator;
            if (record_protected(r, m)) ++cell.numerator;
            auto& pooled = table.ave_binary[m];
            ++pooled.denominator;
            if (record_protected(r, m)) ++pooled.numerator;
        }
    }
    for (auto& [value, rates] : cells) table.rows.push_back({value, std::move(rates)});

    if (axis == Axis::Vendor) {
        for (Mitigation m : kAllMitigations) {
            double sum = 0;
            size_t n = 0;
            for (const auto& row : table.rows) {
                auto it = row.rates.find(m);
                if (it == row.rates.end() || !it->second.defined()) continue;
                sum += it->second.rate();
                ++n;
            }
            if (n) table.ave_vendor[m] = sum / n;
        }
    }
    return table;
}

EvolutionResult evolution_scores(const std::vector<BinaryRecord>& rs, Mitigation m) {
    EvolutionResult out;
    auto families = collect_families(rs);
    for (const auto& [key, versions] : families) {
        if (versions.size() < 2) {
            ++out.skipped_families;
            continue;
        }
        RateFilter earliest_f, latest_f;
        earliest_f.image_id = versions.front().image_id;
        latest_f.image_id = versions.back().image_id;
        RateResult earliest = adoption_rate(rs, m, earliest_f);
        RateResult latest = adoption_rate(rs, m, latest_f);
        if (!earliest.defined() || !latest.defined()) {
            ++out.skipped_families;
            continue;
        }
        EvolutionScore s;
        s.vendor = key.vendor;
        s.product = key.product;
        s.earliest = earliest;
        s.latest = latest;
        s.score = latest.rate() - earliest.rate();
        out.scores.push_back(std::move(s));
    }
    std::sort(out.scores.begin(), out.scores.end(), [](const auto& a, const auto& b) {
        return std::tie(a.score, a.vendor, a.product) < std::tie(b.score, b.vendor, b.product);
    });
    return out;
}

std::map<Mitigation, ChangeCounts> versioned_binary_changes(
    const std::vector<BinaryRecord>& rs) {
    std::map<Mitigation, ChangeCounts> out;
    for (Mitigation m : kAllMitigations) out[m];

    auto families = collect_families(rs);
    // (image_id, name) -> any-instance-protected per mitigation.
    std::map<std::pair<std::string, std::string>, std::map<Mitigation, bool>> presence;
    for (const auto& r : rs) {
        auto& p = presence[{r.meta.image_id, base_name(r.path)}];
        for (Mitigation m : kAllMitigations) {
            bool& cur = p[m];
            cur = cur || record_protected(r, m);
        }
    }

    for (const auto& [key, versions] : families) {
        if (versions.size() < 2) continue;
        const std::string& first = versions.front().image_id;
        const std::string& last = versions.back().image_id;
        // Names present in both versions.
        std::set<std::string> first_names, last_names;
        for (const auto& [k, v] : presence) {
            if (k.first == first) first_names.insert(k.second);
            if (k.first == last) last_names.insert(k.second);
        }
        for (const auto& name : first_names) {
            if (!last_names.count(name)) continue;
            const auto& before = presence[{first, name}];
            const auto& after = presence[{last, name}];
            for (Mitigation m : kAllMitigations) {
                bool b = before.at(m), a = after.at(m);
                if (b == a)
                    ++out[m].no_change;
                else if (a)
                    ++out[m].positive;
                else
                    ++out[m].negative;
            }
        }
    }
    return out;
}

ReuseStats reuse_stats(const std::vector<BinaryRecord>& rs) {
    ReuseStats out;
    std::map<std::string, std::set<std::string>> digest_vendors;
    std::map<std::string, std::set<std::string>> vendor_digests;
    for (const auto& r : rs) {
        std::string vendor = r.meta.vendor.empty() ? "unknown" : r.meta.vendor;
        ++out.per_vendor[vendor].total;
        vendor_digests[vendor].insert(r.digest);
        digest_vendors[r.digest].insert(vendor);
    }
    for (auto& [vendor, digests] : vendor_digests)
        out.per_vendor[vendor].unique = digests.size();
    out.distinct_digests = digest_vendors.size();
    for (const auto& [digest, vendors] : digest_vendors) {
        ++out.vendor_multiplicity[static_cast<int>(vendors.size())];
        if (vendors.size() < 2) continue;
        for (auto a = vendors.begin(); a != vendors.end(); ++a)
            for (auto b = std::next(a); b != vendors.end(); ++b)
                ++out.pair_matrix[{*a, *b}];
    }
    return out;
}

std::map<Mitigation, RateResult> shared_binary_rates(const std::vector<BinaryRecord>& rs) {
    std::map<std::string, std::set<std::string>> digest_vendors;
    // Deterministic representative: smallest (path, image_id) per digest.
    std::map<std::string, const BinaryRecord*> representative;
    std::map<std::string, std::optional<kernel::Date>> earliest_date;
    for (const auto& r : rs) {
        digest_vendors[r.digest].insert(r.meta.vendor.empty() ? "unknown" : r.meta.vendor);
        auto& rep = representative[r.digest];
        if (!rep || std::tie(r.path, r.meta.image_id) <
                        std::tie(rep->path, rep->meta.image_id))
            rep = &r;
        auto& d = earliest_date[r.digest];
        if (r.meta.release_date && (!d || *r.meta.release_date < *d))
            d = r.meta.release_date;
    }
    std::map<Mitigation, RateResult> out;
    for (const auto& [digest, vendors] : digest_vendors) {
        if (vendors.size() < 2) continue;
        const BinaryRecord* rep = representative[digest];
        BinaryRecord gated = *rep;
        gated.meta.release_date = earliest_date[digest];
        for (Mitigation m : kAllMitigations) {
            if (!record_applicable(gated, m)) continue;
            auto& cell = out[m];
            ++cell.denominator;
            if (record_protected(*rep, m)) ++cell.numerator;
        }
    }
    return out;
}

KernelGapResult kernel_gap(const std::vector<KernelOutRecord>& ks,
                           const kernel::ReleaseDateTable& table) {
    KernelGapResult out;
    std::map<std::string, std::vector<int>> gaps;
    for (const auto& k : ks) {
        auto released = table.lookup(k.version);
        if (!released || !k.build_date) {
            ++out.excluded;
            continue;
        }
        int g = kernel::months_between(*released, *k.build_date);
        if (g < 0) {
            g = 0;
            ++out.clamped_negative;
        }
        std::string vendor = k.meta.vendor.empty() ? "unknown" : k.meta.vendor;
        gaps[vendor].push_back(g);
    }
    double sum_means = 0;
    for (auto& [vendor, v] : gaps) {
        GapSummary s;
        s.kernels = v.size();
        s.min_months = *std::min_element(v.begin(), v.end());
        s.max_months = *std::max_element(v.begin(), v.end());
        double sum = 0;
        for (int g : v) sum += g;
        s.mean_months = sum / v.size();
        sum_means += s.mean_months;
        out.per_vendor[vendor] = s;
    }
    if (!out.per_vendor.empty()) out.overall_mean = sum_means / out.per_vendor.size();
    return out;
}

void PartialAggregate::add(Mitigation m, const std::string& cell, bool protected_flag) {
    auto& r = cells_[std::string(mitigation_name(m)) + "|" + cell];
    ++r.denominator;
    if (protected_flag) ++r.numerator;
}

void PartialAggregate::merge(const PartialAggregate& other) {
    for (const auto& [key, r] : other.cells_) {
        auto& mine = cells_[key];
        mine.numerator += r.numerator;
        mine.denominator += r.denominator;
    }
}

RateResult PartialAggregate::rate(Mitigation m, const std::string& cell) const {
    auto it = cells_.find(std::string(mitigation_name(m)) + "|" + cell);
    if (it == cells_.end()) return {};
    return it->second;
}

nlohmann::json PartialAggregate::to_json() const {
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& [key, r] : cells_)
        cells[key] = {r.numerator, r.denominator};
    return nlohmann::json{{"schema", kAggregateSchema}, {"cells", cells}};
}

PartialAggregate PartialAggregate::from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != kAggregateSchema)
        throw records::SchemaMismatch("aggregate schema mismatch: " + j.value("schema", ""));
    PartialAggregate agg;
    for (auto it = j.at("cells").begin(); it != j.at("cells").end(); ++it) {
        RateResult r;
        r.numerator = it.value().at(0).get<uint64_t>();
        r.denominator = it.value().at(1).get<uint64_t>();
        agg.cells_[it.key()] = r;
    }
    return agg;
}

PartialAggregate aggregate_records(const std::vector<BinaryRecord>& rs, Axis axis,
                                   const RateFilter& base) {
    PartialAggregate agg;
    for (const auto& r : rs) {
        if (!filter_matches(r, base)) continue;
        std::string value = axis_value(r, axis);
        for (Mitigation m : kAllMitigations) {
            if (!record_applicable(r, m)) continue;
            agg.add(m, value, record_protected(r, m));
        }
    }
    return agg;
}

}  // namespace fwaudit::stats
