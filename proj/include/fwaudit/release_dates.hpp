#pragma once

#include <map>
#include <optional>
#include <string>

#include "fwaudit/kernel.hpp"

namespace fwaudit::kernel {

// Upstream release dates of mainline kernels, keyed by release name
// ("2.6.36", "4.14"). Lookups try major.minor.patch first (the 2.x series
// released three-component mainlines), then major.minor.
class ReleaseDateTable {
public:
    static const ReleaseDateTable& builtin();

    // CSV: version,date — identical format to data/kernel_release_dates.csv.
    static ReleaseDateTable from_csv_file(const std::string& path);

    std::optional<Date> lookup(const KernelVersion& v) const;
    std::optional<Date> lookup_key(const std::string& key) const;
    size_t size() const { return dates_.size(); }
    const std::map<std::string, Date>& entries() const { return dates_; }

private:
    std::map<std::string, Date> dates_;
};

}  // namespace fwaudit::kernel
