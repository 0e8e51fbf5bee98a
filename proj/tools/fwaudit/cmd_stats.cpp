#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "fwaudit/stats.hpp"

namespace fwaudit::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fwaudit::stats;

namespace {

std::string fmt_rate(const RateResult& r) {
    if (!r.defined()) return "undefined";
    char buf[32];
    snprintf(buf, sizeof buf, "%.4f", r.rate());
    return buf;
}

struct Sink {
    std::string out_dir;
    std::ostringstream stdout_buf;

    void table(const std::string& name, const std::string& csv) {
        if (out_dir.empty()) {
            stdout_buf << "# " << name << "\n" << csv << "\n";
        } else {
            std::ofstream f(fs::path(out_dir) / (name + ".csv"));
            f << csv;
        }
    }
};

RateFilter parse_filters(const json& op) {
    RateFilter f;
    if (!op.contains("filters")) return f;
    const auto& j = op["filters"];
    if (j.contains("vendor")) f.vendor = j["vendor"].get<std::string>();
    if (j.contains("arch")) f.arch = j["arch"].get<std::string>();
    if (j.contains("device_type")) f.device_type = j["device_type"].get<std::string>();
    if (j.contains("binary_class")) f.binary_class = j["binary_class"].get<std::string>();
    if (j.contains("time_bucket")) f.time_bucket = j["time_bucket"].get<std::string>();
    if (j.contains("image_id")) f.image_id = j["image_id"].get<std::string>();
    if (j.contains("exclude_libc"))
        f.exclude_libc = j["exclude_libc"].get<std::vector<std::string>>();
    return f;
}

Mitigation parse_mitigation(const json& op) {
    std::string name = op.value("mitigation", "canary");
    auto m = mitigation_from_name(name);
    if (!m) throw std::runtime_error("unknown mitigation: " + name);
    return *m;
}

std::string breakdown_csv(const BreakdownTable& t) {
    std::ostringstream csv;
    csv << axis_name(t.axis);
    for (Mitigation m : kAllMitigations) csv << "," << mitigation_name(m);
    csv << "\n";
    for (const auto& row : t.rows) {
        csv << row.value;
        for (Mitigation m : kAllMitigations) {
            auto it = row.rates.find(m);
            csv << "," << (it == row.rates.end() ? "undefined" : fmt_rate(it->second));
        }
        csv << "\n";
    }
    if (!t.ave_vendor.empty()) {
        csv << "ave_vendor";
        for (Mitigation m : kAllMitigations) {
            auto it = t.ave_vendor.find(m);
            if (it == t.ave_vendor.end()) {
                csv << ",undefined";
            } else {
                char buf[32];
                snprintf(buf, sizeof buf, "%.4f", it->second);
                csv << "," << buf;
            }
        }
        csv << "\n";
    }
    csv << "ave_binary";
    for (Mitigation m : kAllMitigations) {
        auto it = t.ave_binary.find(m);
        csv << "," << (it == t.ave_binary.end() ? "undefined" : fmt_rate(it->second));
    }
    csv << "\n";
    return csv.str();
}

}  // namespace

int cmd_stats(const StatsArgs& args) {
    records::RecordSet set;
    for (const auto& dir : args.results_dirs) {
        auto part = records::load_ndjson_dir(dir);
        set.binaries.insert(set.binaries.end(), part.binaries.begin(), part.binaries.end());
        set.kernels.insert(set.kernels.end(), part.kernels.begin(), part.kernels.end());
        set.firmware.insert(set.firmware.end(), part.firmware.begin(), part.firmware.end());
    }
    if (set.binaries.empty() && set.kernels.empty())
        std::cerr << "warning: no records found under the given results directories\n";

    json query{{"operations", json::array({json{{"op", "breakdown"}, {"axis", "vendor"}}})}};
    if (!args.query_path.empty()) {
        std::ifstream in(args.query_path);
        if (!in) {
            std::cerr << "cannot open query spec: " << args.query_path << "\n";
            return 1;
        }
        in >> query;
    }

    Sink sink{args.out_dir};
    if (!args.out_dir.empty()) fs::create_directories(args.out_dir);

    size_t op_index = 0;
    for (const auto& op : query.at("operations")) {
        std::string kind = op.at("op").get<std::string>();
        std::string name = op.value("name", kind + "-" + std::to_string(op_index++));

        if (kind == "adoption_rate") {
            Mitigation m = parse_mitigation(op);
            auto r = adoption_rate(set.binaries, m, parse_filters(op));
            std::ostringstream csv;
            csv << "mitigation,numerator,denominator,rate\n";
            csv << mitigation_name(m) << "," << r.numerator << "," << r.denominator << ","
                << fmt_rate(r) << "\n";
            sink.table(name, csv.str());
        } else if (kind == "breakdown") {
            auto axis = axis_from_name(op.value("axis", "vendor"));
            if (!axis) throw std::runtime_error("unknown axis");
            sink.table(name, breakdown_csv(breakdown(set.binaries, *axis, parse_filters(op))));
        } else if (kind == "time_series") {
            // Plot-data CSV: one (x, y) series over the two-year buckets.
            Mitigation m = parse_mitigation(op);
            auto t = breakdown(set.binaries, Axis::TimeBucket, parse_filters(op));
            std::ostringstream csv;
            csv << "bucket," << mitigation_name(m) << "\n";
            for (const auto& row : t.rows) {
                auto it = row.rates.find(m);
                csv << row.value << ","
                    << (it == row.rates.end() ? "undefined" : fmt_rate(it->second)) << "\n";
            }
            sink.table(name, csv.str());
        } else if (kind == "evolution") {
            Mitigation m = parse_mitigation(op);
            auto result = evolution_scores(set.binaries, m);
            std::ostringstream csv;
            csv << "vendor,product,earliest_rate,latest_rate,score\n";
            for (const auto& s : result.scores) {
                char buf[32];
                snprintf(buf, sizeof buf, "%+.4f", s.score);
                csv << s.vendor << "," << s.product << "," << fmt_rate(s.earliest) << ","
                    << fmt_rate(s.latest) << "," << buf << "\n";
            }
            sink.table(name, csv.str());
        } else if (kind == "versioned_changes") {
            auto changes = versioned_binary_changes(set.binaries);
            std::ostringstream csv;
            csv << "mitigation,no_change,positive,negative\n";
            for (Mitigation m : kAllMitigations) {
                const auto& c = changes.at(m);
                csv << mitigation_name(m) << "," << c.no_change << "," << c.positive << ","
                    << c.negative << "\n";
            }
            sink.table(name, csv.str());
        } else if (kind == "reuse") {
            auto r = reuse_stats(set.binaries);
            std::ostringstream csv;
            csv << "vendor,total,unique,ratio\n";
            for (const auto& [vendor, v] : r.per_vendor) {
                char buf[32];
                snprintf(buf, sizeof buf, "%.4f", v.ratio());
                csv << vendor << "," << v.total << "," << v.unique << "," << buf << "\n";
            }
            sink.table(name, csv.str());
            std::ostringstream hist;
            hist << "vendors,digests\n";
            for (const auto& [k, count] : r.vendor_multiplicity)
                hist << k << "," << count << "\n";
            sink.table(name + "-sharing", hist.str());
            std::ostringstream matrix;
            matrix << "vendor_a,vendor_b,shared_digests\n";
            for (const auto& [pair, count] : r.pair_matrix)
                matrix << pair.first << "," << pair.second << "," << count << "\n";
            sink.table(name + "-matrix", matrix.str());
        } else if (kind == "shared_rates") {
            auto rates = shared_binary_rates(set.binaries);
            std::ostringstream csv;
            csv << "mitigation,numerator,denominator,rate\n";
            for (Mitigation m : kAllMitigations) {
                auto it = rates.find(m);
                RateResult r = it == rates.end() ? RateResult{} : it->second;
                csv << mitigation_name(m) << "," << r.numerator << "," << r.denominator
                    << "," << fmt_rate(r) << "\n";
            }
            sink.table(name, csv.str());
        } else if (kind == "kernel_gap") {
            auto result = kernel_gap(set.kernels);
            std::ostringstream csv;
            csv << "vendor,kernels,gap_mean_months,gap_min,gap_max\n";
            for (const auto& [vendor, s] : result.per_vendor) {
                char buf[32];
                snprintf(buf, sizeof buf, "%.1f", s.mean_months);
                csv << vendor << "," << s.kernels << "," << buf << "," << s.min_months
                    << "," << s.max_months << "\n";
            }
            char buf[32];
            snprintf(buf, sizeof buf, "%.1f", result.overall_mean);
            csv << "average,-," << buf << ",-,-\n";
            sink.table(name, csv.str());
        } else {
            throw std::runtime_error("unknown stats operation: " + kind);
        }
    }

    if (args.out_dir.empty()) std::cout << sink.stdout_buf.str();
    return 0;
}

}  // namespace fwaudit::cli
