#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fwaudit/records.hpp"
#include "fwaudit/release_dates.hpp"

namespace fwaudit::stats {

enum class Mitigation { Canary, Relro, Nx, Fortify, Pie };
inline constexpr Mitigation kAllMitigations[] = {Mitigation::Canary, Mitigation::Relro,
                                                 Mitigation::Nx, Mitigation::Fortify,
                                                 Mitigation::Pie};

const char* mitigation_name(Mitigation m);
std::optional<Mitigation> mitigation_from_name(std::string_view name);

// Year each mitigation first shipped in a mainstream toolchain/libc; binaries
// released earlier are excluded from that mitigation's rates.
int first_release_year(Mitigation m);

// Desktop (Debian stable) reference rates, percent. Documented comparison
// constants, not recomputed by this tool.
extern const std::map<std::string, double> kDebianBaselinePercent;

struct RateResult {
    uint64_t numerator = 0;
    uint64_t denominator = 0;

    bool defined() const { return denominator != 0; }
    double rate() const { return defined() ? double(numerator) / double(denominator) : 0.0; }
    bool operator==(const RateResult&) const = default;
};

struct RateFilter {
    std::optional<std::string> vendor;
    std::optional<std::string> arch;
    std::optional<std::string> device_type;
    std::optional<std::string> binary_class;  // dynamic_exe | dynamic_lib | static_exe | ...
    std::optional<std::string> time_bucket;
    std::optional<std::string> image_id;
    std::vector<std::string> exclude_libc;  // e.g. {"uclibc"} for fortify
};

// "dynamic_exe", "static_lib", "relocatable_object", ...
std::string binary_class_label(const records::BinaryRecord& r);

// Two-calendar-year buckets, everything before 2010 pooled into "~2010".
std::string time_bucket_label(const std::optional<kernel::Date>& d);

// Release-year and executables-only gates.
bool record_applicable(const records::BinaryRecord& r, Mitigation m);
bool record_protected(const records::BinaryRecord& r, Mitigation m);
bool filter_matches(const records::BinaryRecord& r, const RateFilter& f);

// protected/applicable over the filtered record set. Zero denominator means
// the rate is undefined, never zero.
RateResult adoption_rate(const std::vector<records::BinaryRecord>& rs, Mitigation m,
                         const RateFilter& f = {});

enum class Axis { Vendor, Arch, BinaryClass, DeviceType, TimeBucket };
const char* axis_name(Axis a);
std::optional<Axis> axis_from_name(std::string_view name);
std::string axis_value(const records::BinaryRecord& r, Axis a);

struct BreakdownRow {
    std::string value;
    std::map<Mitigation, RateResult> rates;
};

struct BreakdownTable {
    Axis axis;
    std::vector<BreakdownRow> rows;  // sorted by axis value
    // Unweighted mean of per-vendor rates vs pooled rate over all records.
    std::map<Mitigation, double> ave_vendor;   // only when axis == Vendor
    std::map<Mitigation, RateResult> ave_binary;
};

BreakdownTable breakdown(const std::vector<records::BinaryRecord>& rs, Axis axis,
                         const RateFilter& base = {});

struct EvolutionScore {
    std::string vendor;
    std::string product;
    RateResult earliest;
    RateResult latest;
    double score = 0.0;  // latest - earliest, in [-1, 1]
};

struct EvolutionResult {
    std::vector<EvolutionScore> scores;  // sorted by score, then vendor/product
    size_t skipped_families = 0;         // <2 dated versions or undefined rates
};

// Multi-version families: rate in the earliest- vs latest-dated firmware.
// Date ties break by firmware_version string ascending.
EvolutionResult evolution_scores(const std::vector<records::BinaryRecord>& rs,
                                 Mitigation m);

struct ChangeCounts {
    uint64_t no_change = 0;
    uint64_t positive = 0;  // absent in first version, present in last
    uint64_t negative = 0;
};

// Versioned binaries: same name in a family's earliest and latest firmware.
std::map<Mitigation, ChangeCounts> versioned_binary_changes(
    const std::vector<records::BinaryRecord>& rs);

struct VendorReuse {
    uint64_t total = 0;
    uint64_t unique = 0;
    double ratio() const { return total ? double(unique) / double(total) : 0.0; }
};

struct ReuseStats {
    std::map<std::string, VendorReuse> per_vendor;
    std::map<int, uint64_t> vendor_multiplicity;  // k -> digests in exactly k vendors
    // Unordered vendor pairs -> distinct shared digests; zero diagonal.
    std::map<std::pair<std::string, std::string>, uint64_t> pair_matrix;
    uint64_t distinct_digests = 0;
};

ReuseStats reuse_stats(const std::vector<records::BinaryRecord>& rs);

// Rates over digests appearing in >= 2 vendors, each digest counted once.
std::map<Mitigation, RateResult> shared_binary_rates(
    const std::vector<records::BinaryRecord>& rs);

struct GapSummary {
    uint64_t kernels = 0;
    double mean_months = 0.0;
    int min_months = 0;
    int max_months = 0;
};

struct KernelGapResult {
    std::map<std::string, GapSummary> per_vendor;
    size_t excluded = 0;          // missing build date or unmapped version
    size_t clamped_negative = 0;  // build date precedes the mapped release
    double overall_mean = 0.0;    // unweighted mean of vendor means
};

KernelGapResult kernel_gap(const std::vector<records::KernelOutRecord>& ks,
                           const kernel::ReleaseDateTable& table =
                               kernel::ReleaseDateTable::builtin());

// Mergeable partial aggregate keyed by (mitigation, cell).
class PartialAggregate {
public:
    static constexpr std::string_view kAggregateSchema = "fwaudit-aggregate-1";

    void add(Mitigation m, const std::string& cell, bool protected_flag);
    void merge(const PartialAggregate& other);  // throws SchemaMismatch on skew

    RateResult rate(Mitigation m, const std::string& cell) const;
    nlohmann::json to_json() const;
    static PartialAggregate from_json(const nlohmann::json& j);

    bool operator==(const PartialAggregate&) const = default;
    bool empty() const { return cells_.empty(); }
    const std::map<std::string, RateResult>& cells() const { return cells_; }

private:
    std::map<std::string, RateResult> cells_;
};

// Shards records into an aggregate along an axis; rate(merge(shards)) equals
// the single-pass rate.
PartialAggregate aggregate_records(const std::vector<records::BinaryRecord>& rs, Axis axis,
                                   const RateFilter& base = {});

}  // namespace fwaudit::stats
