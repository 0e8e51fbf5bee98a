#include "fwaudit/release_dates.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fwaudit::kernel {

namespace {

struct Row {
    const char* version;
    const char* date;
};

// Mainline release dates. 2.0/2.2/2.4 entries are series openings and act as
// fallback keys for stable-branch kernels of those series; the 2.6 series
// released three-component mainlines, so each gets its own row.
constexpr Row kReleases[] = {
    {"2.0", "1996-06-09"},   {"2.2", "1999-01-26"},   {"2.4", "2001-01-04"},
    {"2.6.0", "2003-12-18"}, {"2.6.1", "2004-01-09"}, {"2.6.2", "2004-02-04"},
    {"2.6.3", "2004-02-18"}, {"2.6.4", "2004-03-11"}, {"2.6.5", "2004-04-04"},
    {"2.6.6", "2004-05-10"}, {"2.6.7", "2004-06-16"}, {"2.6.8", "2004-08-14"},
    {"2.6.9", "2004-10-18"}, {"2.6.10", "2004-12-24"}, {"2.6.11", "2005-03-02"},
    {"2.6.12", "2005-06-17"}, {"2.6.13", "2005-08-28"}, {"2.6.14", "2005-10-27"},
    {"2.6.15", "2006-01-02"}, {"2.6.16", "2006-03-20"}, {"2.6.17", "2006-06-17"},
    {"2.6.18", "2006-09-19"}, {"2.6.19", "2006-11-29"}, {"2.6.20", "2007-02-04"},
    {"2.6.21", "2007-04-25"}, {"2.6.22", "2007-07-08"}, {"2.6.23", "2007-10-09"},
    {"2.6.24", "2008-01-24"}, {"2.6.25", "2008-04-16"}, {"2.6.26", "2008-07-13"},
    {"2.6.27", "2008-10-09"}, {"2.6.28", "2008-12-24"}, {"2.6.29", "2009-03-23"},
    {"2.6.30", "2009-06-09"}, {"2.6.31", "2009-09-09"}, {"2.6.32", "2009-12-02"},
    {"2.6.33", "2010-02-24"}, {"2.6.34", "2010-05-16"}, {"2.6.35", "2010-08-01"},
    {"2.6.36", "2010-10-20"}, {"2.6.37", "2011-01-04"}, {"2.6.38", "2011-03-14"},
    {"2.6.39", "2011-05-18"},
    {"3.0", "2011-07-21"},  {"3.1", "2011-10-24"},  {"3.2", "2012-01-04"},
    {"3.3", "2012-03-18"},  {"3.4", "2012-05-20"},  {"3.5", "2012-07-21"},
    {"3.6", "2012-09-30"},  {"3.7", "2012-12-10"},  {"3.8", "2013-02-18"},
    {"3.9", "2013-04-28"},  {"3.10", "2013-06-30"}, {"3.11", "2013-09-02"},
    {"3.12", "2013-11-03"}, {"3.13", "2014-01-19"}, {"3.14", "2014-03-30"},
    {"3.15", "2014-06-08"}, {"3.16", "2014-08-03"}, {"3.17", "2014-10-05"},
    {"3.18", "2014-12-07"}, {"3.19", "2015-02-08"},
    {"4.0", "2015-04-12"},  {"4.1", "2015-06-21"},  {"4.2", "2015-08-30"},
    {"4.3", "2015-11-01"},  {"4.4", "2016-01-10"},  {"4.5", "2016-03-13"},
    {"4.6", "2016-05-15"},  {"4.7", "2016-07-24"},  {"4.8", "2016-10-02"},
    {"4.9", "2016-12-11"},  {"4.10", "2017-02-19"}, {"4.11", "2017-04-30"},
    {"4.12", "2017-07-02"}, {"4.13", "2017-09-03"}, {"4.14", "2017-11-12"},
    {"4.15", "2018-01-28"}, {"4.16", "2018-04-01"}, {"4.17", "2018-06-03"},
    {"4.18", "2018-08-12"}, {"4.19", "2018-10-22"}, {"4.20", "2018-12-23"},
    {"5.0", "2019-03-03"},  {"5.1", "2019-05-05"},  {"5.2", "2019-07-07"},
    {"5.3", "2019-09-15"},  {"5.4", "2019-11-24"},  {"5.5", "2020-01-26"},
    {"5.6", "2020-03-29"},  {"5.7", "2020-05-31"},  {"5.8", "2020-08-02"},
    {"5.9", "2020-10-11"},  {"5.10", "2020-12-13"}, {"5.11", "2021-02-14"},
    {"5.12", "2021-04-25"}, {"5.13", "2021-06-27"}, {"5.14", "2021-08-29"},
    {"5.15", "2021-10-31"},
};

}  // namespace

const ReleaseDateTable& ReleaseDateTable::builtin() {
    static ReleaseDateTable table = [] {
        ReleaseDateTable t;
        for (const auto& r : kReleases) {
            auto d = Date::parse_iso(r.date);
            t.dates_[r.version] = *d;
        }
        return t;
    }();
    return table;
}

ReleaseDateTable ReleaseDateTable::from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open release-date table: " + path);
    ReleaseDateTable t;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected version,date");
        std::string key = line.substr(0, comma);
        if (key == "version") continue;  // header
        auto d = Date::parse_iso(line.substr(comma + 1));
        if (!d)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad date");
        t.dates_[key] = *d;
    }
    return t;
}

std::optional<Date> ReleaseDateTable::lookup_key(const std::string& key) const {
    auto it = dates_.find(key);
    if (it == dates_.end()) return std::nullopt;
    return it->second;
}

std::optional<Date> ReleaseDateTable::lookup(const KernelVersion& v) const {
    char buf[48];
    snprintf(buf, sizeof buf, "%d.%d.%d", v.major, v.minor, v.patch);
    if (auto d = lookup_key(buf)) return d;
    snprintf(buf, sizeof buf, "%d.%d", v.major, v.minor);
    return lookup_key(buf);
}

}  // namespace fwaudit::kernel
