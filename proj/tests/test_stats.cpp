#include <doctest.h>

#include <random>

#include "fwaudit/stats.hpp"

using namespace fwaudit;
using namespace fwaudit::stats;
using records::BinaryRecord;
using records::KernelOutRecord;

namespace {

struct RecBuilder {
    BinaryRecord r;

    RecBuilder() {
        r.path = "bin/app";
        r.digest = "d0";
        r.arch = "arm";
        r.bits = 32;
        r.endianness = "little";
        r.linkage = "dynamic";
        r.role = "executable";
        r.libc = "glibc";
        r.meta.image_id = "img1";
        r.meta.vendor = "VendorA";
        r.meta.product = "P1";
        r.meta.firmware_version = "1.0";
        r.meta.release_date = kernel::Date{2018, 6, 1};
        r.meta.device_type = "router";
        for (auto* v : {&r.canary, &r.nx, &r.fortify, &r.pie, &r.relro}) {
            v->status = "not_protected";
            v->method = "symbol";
            v->evidence = {"test"};
        }
        r.relro_level = "none";
    }
    RecBuilder& vendor(std::string v) { r.meta.vendor = std::move(v); return *this; }
    RecBuilder& product(std::string v) { r.meta.product = std::move(v); return *this; }
    RecBuilder& image(std::string v) { r.meta.image_id = std::move(v); return *this; }
    RecBuilder& fwver(std::string v) { r.meta.firmware_version = std::move(v); return *this; }
    RecBuilder& path(std::string v) { r.path = std::move(v); return *this; }
    RecBuilder& digest(std::string v) { r.digest = std::move(v); return *this; }
    RecBuilder& arch(std::string v) { r.arch = std::move(v); return *this; }
    RecBuilder& role(std::string v) { r.role = std::move(v); return *this; }
    RecBuilder& linkage(std::string v) { r.linkage = std::move(v); return *this; }
    RecBuilder& libc(std::string v) { r.libc = std::move(v); return *this; }
    RecBuilder& date(int y, int m, int d) { r.meta.release_date = kernel::Date{y, m, d}; return *this; }
    RecBuilder& no_date() { r.meta.release_date.reset(); return *this; }
    RecBuilder& device(std::string v) { r.meta.device_type = std::move(v); return *this; }
    RecBuilder& canary(bool on) { r.canary.status = on ? "protected" : "not_protected"; return *this; }
    RecBuilder& nx(bool on) { r.nx.status = on ? "protected" : "not_protected"; return *this; }
    RecBuilder& fortify(bool on) { r.fortify.status = on ? "protected" : "not_protected"; return *this; }
    RecBuilder& pie(bool on) { r.pie.status = on ? "protected" : "not_protected"; return *this; }
    RecBuilder& relro(std::string level) { r.relro_level = std::move(level); return *this; }
    BinaryRecord build() const { return r; }
};

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("adoption rate: 3 of 10 applicable executables") {
    std::vector<BinaryRecord> rs;
    for (int i = 0; i < 10; ++i)
        rs.push_back(RecBuilder().digest("d" + std::to_string(i)).canary(i < 3).build());
    auto rate = adoption_rate(rs, Mitigation::Canary, {});
    CHECK(rate.numerator == 3);
    CHECK(rate.denominator == 10);
    CHECK(rate.rate() == doctest::Approx(0.30));
}

TEST_CASE("libraries are excluded from NX and PIE rates entirely") {
    std::vector<BinaryRecord> rs;
    rs.push_back(RecBuilder().role("library").nx(true).build());
    rs.push_back(RecBuilder().role("executable").nx(true).build());
    rs.push_back(RecBuilder().role("executable").nx(false).build());
    auto nx = adoption_rate(rs, Mitigation::Nx, {});
    CHECK(nx.numerator == 1);
    CHECK(nx.denominator == 2);
    // Removing an inapplicable record leaves the rate unchanged.
    std::vector<BinaryRecord> no_lib(rs.begin() + 1, rs.end());
    auto nx2 = adoption_rate(no_lib, Mitigation::Nx, {});
    CHECK(nx.numerator == nx2.numerator);
    CHECK(nx.denominator == nx2.denominator);
    // Canary still counts the library.
    CHECK(adoption_rate(rs, Mitigation::Canary, {}).denominator == 3);
}

TEST_CASE("binaries predating a mitigation are excluded; empty set is Undefined") {
    std::vector<BinaryRecord> rs;
    for (int i = 0; i < 4; ++i)
        rs.push_back(RecBuilder().date(2003, 5, 1).canary(true).build());
    auto rate = adoption_rate(rs, Mitigation::Canary, {});  // canary shipped 2005
    CHECK_FALSE(rate.defined());
    // NX shipped 2003: the same records stay applicable there.
    CHECK(adoption_rate(rs, Mitigation::Nx, {}).denominator == 4);
    // Cutoff is calendar-year granular: 2005 itself is in.
    rs.push_back(RecBuilder().date(2005, 1, 1).canary(true).build());
    CHECK(adoption_rate(rs, Mitigation::Canary, {}).denominator == 1);
}

TEST_CASE("relro counts partial and full together") {
    std::vector<BinaryRecord> rs;
    rs.push_back(RecBuilder().relro("none").build());
    rs.push_back(RecBuilder().relro("partial").build());
    rs.push_back(RecBuilder().relro("full").build());
    auto rate = adoption_rate(rs, Mitigation::Relro, {});
    CHECK(rate.numerator == 2);
    CHECK(rate.denominator == 3);
}

TEST_CASE("uclibc exclusion filter adjusts fortify denominators") {
    std::vector<BinaryRecord> rs;
    rs.push_back(RecBuilder().libc("uclibc").fortify(false).build());
    rs.push_back(RecBuilder().libc("glibc").fortify(true).build());
    RateFilter f;
    f.exclude_libc = {"uclibc"};
    auto raw = adoption_rate(rs, Mitigation::Fortify, {});
    auto adjusted = adoption_rate(rs, Mitigation::Fortify, f);
    CHECK(raw.denominator == 2);
    CHECK(adjusted.denominator == 1);
    CHECK(adjusted.rate() == doctest::Approx(1.0));
}

TEST_CASE("time buckets pool pre-2010 and pair later years") {
    CHECK(time_bucket_label(kernel::Date{2009, 12, 31}) == "~2010");
    CHECK(time_bucket_label(kernel::Date{1998, 1, 1}) == "~2010");
    CHECK(time_bucket_label(kernel::Date{2010, 1, 1}) == "2010-2011");
    CHECK(time_bucket_label(kernel::Date{2011, 12, 31}) == "2010-2011");
    CHECK(time_bucket_label(kernel::Date{2016, 7, 1}) == "2016-2017");
    CHECK(time_bucket_label(kernel::Date{2021, 2, 1}) == "2020-2021");
    CHECK(time_bucket_label(std::nullopt) == "unknown");
}

TEST_CASE("vendor breakdown distinguishes Ave(Vendor) from Ave(Binary)") {
    std::vector<BinaryRecord> rs;
    // VendorA: 8 binaries, 2 protected (0.25). VendorB: 2 binaries, 2 protected (1.0).
    for (int i = 0; i < 8; ++i)
        rs.push_back(RecBuilder().vendor("VendorA").digest("a" + std::to_string(i)).canary(i < 2).build());
    for (int i = 0; i < 2; ++i)
        rs.push_back(RecBuilder().vendor("VendorB").digest("b" + std::to_string(i)).canary(true).build());

    auto table = breakdown(rs, Axis::Vendor, {});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].value == "VendorA");
    CHECK(table.rows[0].rates.at(Mitigation::Canary).rate() == doctest::Approx(0.25));
    CHECK(table.rows[1].rates.at(Mitigation::Canary).rate() == doctest::Approx(1.0));
    // Unweighted vendor mean: (0.25 + 1.0) / 2; binary-pooled: 4/10.
    CHECK(table.ave_vendor.at(Mitigation::Canary) == doctest::Approx(0.625));
    CHECK(table.ave_binary.at(Mitigation::Canary).rate() == doctest::Approx(0.4));
}

TEST_CASE("single-vendor corpus: Ave(Vendor) equals Ave(Binary)") {
    std::vector<BinaryRecord> rs;
    for (int i = 0; i < 5; ++i)
        rs.push_back(RecBuilder().canary(i % 2 == 0).build());
    auto table = breakdown(rs, Axis::Vendor, {});
    CHECK(table.ave_vendor.at(Mitigation::Canary) ==
          doctest::Approx(table.ave_binary.at(Mitigation::Canary).rate()));
}

TEST_CASE("breakdown by time bucket places a 2009 binary into ~2010") {
    std::vector<BinaryRecord> rs;
    rs.push_back(RecBuilder().date(2009, 3, 1).build());
    rs.push_back(RecBuilder().date(2015, 3, 1).build());
    auto table = breakdown(rs, Axis::TimeBucket, {});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].value == "2014-2015");
    CHECK(table.rows[1].value == "~2010");
}

TEST_CASE("evolution: 3-of-5 binaries gaining canary scores +0.60") {
    std::vector<BinaryRecord> rs;
    for (int i = 0; i < 5; ++i)
        rs.push_back(RecBuilder().image("v1").fwver("1.0").date(2015, 1, 1)
                         .path("bin/t" + std::to_string(i)).canary(false).build());
    for (int i = 0; i < 5; ++i)
        rs.push_back(RecBuilder().image("v2").fwver("2.0").date(2017, 1, 1)
                         .path("bin/t" + std::to_string(i)).canary(i < 3).build());
    auto result = evolution_scores(rs, Mitigation::Canary);
    REQUIRE(result.scores.size() == 1);
    CHECK(result.scores[0].score == doctest::Approx(0.60));
    // Compositional: score equals the two adoption_rate calls done directly.
    RateFilter f1, f2;
    f1.image_id = "v1";
    f2.image_id = "v2";
    double direct = adoption_rate(rs, Mitigation::Canary, f2).rate() -
                    adoption_rate(rs, Mitigation::Canary, f1).rate();
    CHECK(result.scores[0].score == doctest::Approx(direct));
}

TEST_CASE("evolution: identical rates score zero; single-version families skipped") {
    std::vector<BinaryRecord> rs;
    rs.push_back(RecBuilder().image("v1").fwver("1.0").date(2015, 1, 1).canary(true).build());
    rs.push_back(RecBuilder().image("v2").fwver("2.0").date(2016, 1, 1).canary(true).build());
    rs.push_back(RecBuilder().product("Solo").image("s1").date(2016, 1, 1).build());
    auto result = evolution_scores(rs, Mitigation::Canary);
    REQUIRE(result.scores.size() == 1);
    CHECK(result.scores[0].score == doctest::Approx(0.0));
    CHECK(result.skipped_families == 1);
}

TEST_CASE("evolution: date ties break by firmware_version ascending") {
    std::vector<BinaryRecord> rs;
    rs.push_back(RecBuilder().image("a").fwver("1.0").date(2015, 1, 1).canary(false).build());
    rs.push_back(RecBuilder().image("b").fwver("2.0").date(2015, 1, 1).canary(true).build());
    auto result = evolution_scores(rs, Mitigation::Canary);
    REQUIRE(result.scores.size() == 1);
    CHECK(result.scores[0].score == doctest::Approx(1.0));  // 1.0 at "2.0" minus 0.0 at "1.0"
}

TEST_CASE("versioned binary changes: 8 unchanged, 1 gained, 1 dropped") {
    std::vector<BinaryRecord> rs;
    for (int i = 0; i < 10; ++i) {
        bool first = i == 8, last = i == 9;  // t8 drops, t9 gains
        rs.push_back(RecBuilder().image("v1").fwver("1.0").date(2015, 1, 1)
                         .path("bin/t" + std::to_string(i)).canary(first).build());
        rs.push_back(RecBuilder().image("v2").fwver("2.0").date(2016, 1, 1)
                         .path("bin/t" + std::to_string(i)).canary(last).build());
    }
    auto changes = versioned_binary_changes(rs);
    CHECK(changes.at(Mitigation::Canary).no_change == 8);
    CHECK(changes.at(Mitigation::Canary).positive == 1);
    CHECK(changes.at(Mitigation::Canary).negative == 1);
    // Names present in only one version are excluded.
    rs.push_back(RecBuilder().image("v2").fwver("2.0").date(2016, 1, 1)
                     .path("bin/only-new").canary(true).build());
    auto changes2 = versioned_binary_changes(rs);
    CHECK(changes2.at(Mitigation::Canary).positive == 1);
}

TEST_CASE("reuse: all digests distinct") {
    std::vector<BinaryRecord> rs;
    for (int i = 0; i < 6; ++i)
        rs.push_back(RecBuilder().digest("d" + std::to_string(i)).build());
    auto stats = reuse_stats(rs);
    CHECK(stats.per_vendor.at("VendorA").ratio() == doctest::Approx(1.0));
    CHECK(stats.vendor_multiplicity.at(1) == 6);
    CHECK(stats.pair_matrix.empty());
    CHECK(stats.distinct_digests == 6);
}

TEST_CASE("reuse: one digest shared across three vendors") {
    std::vector<BinaryRecord> rs;
    rs.push_back(RecBuilder().vendor("A").digest("shared").build());
    rs.push_back(RecBuilder().vendor("B").digest("shared").build());
    rs.push_back(RecBuilder().vendor("C").digest("shared").build());
    auto stats = reuse_stats(rs);
    CHECK(stats.vendor_multiplicity.at(3) == 1);
    CHECK(stats.pair_matrix.size() == 3);
    CHECK(stats.pair_matrix.at({"A", "B"}) == 1);
    CHECK(stats.pair_matrix.at({"A", "C"}) == 1);
    CHECK(stats.pair_matrix.at({"B", "C"}) == 1);
}

TEST_CASE("reuse histogram mass conservation on a random corpus (brute force)") {
    std::mt19937 rng(11);
    std::vector<BinaryRecord> rs;
    const char* vendors[] = {"V1", "V2", "V3"};
    for (int i = 0; i < 20; ++i)
        rs.push_back(RecBuilder().vendor(vendors[rng() % 3])
                         .digest("d" + std::to_string(rng() % 15)).build());
    auto stats = reuse_stats(rs);
    uint64_t mass = 0;
    for (const auto& [k, count] : stats.vendor_multiplicity) mass += count;
    CHECK(mass == stats.distinct_digests);

    // Brute force per-vendor uniques.
    std::map<std::string, std::set<std::string>> brute;
    for (const auto& r : rs) brute[r.meta.vendor].insert(r.digest);
    for (const auto& [vendor, set] : brute)
        CHECK(stats.per_vendor.at(vendor).unique == set.size());
}

TEST_CASE("shared-binary rates count each multi-vendor digest once") {
    std::vector<BinaryRecord> rs;
    // Digest s1 in A+B, protected. Digest s2 in A+C, unprotected. Digest u only in A.
    rs.push_back(RecBuilder().vendor("A").digest("s1").canary(true).build());
    rs.push_back(RecBuilder().vendor("B").digest("s1").canary(true).build());
    rs.push_back(RecBuilder().vendor("A").digest("s2").build());
    rs.push_back(RecBuilder().vendor("C").digest("s2").build());
    rs.push_back(RecBuilder().vendor("A").digest("u").canary(true).build());
    auto rates = shared_binary_rates(rs);
    CHECK(rates.at(Mitigation::Canary).numerator == 1);
    CHECK(rates.at(Mitigation::Canary).denominator == 2);

    // No sharing: undefined (absent cells).
    std::vector<BinaryRecord> lone = {RecBuilder().digest("x").build()};
    auto none = shared_binary_rates(lone);
    CHECK((none.empty() || !none.begin()->second.defined()));
}

TEST_CASE("kernel gap: paper banner example yields 75 months") {
    KernelOutRecord k;
    k.id = "k1";
    k.version = {2, 6, 36};
    k.build_date = kernel::Date{2017, 1, 20};
    k.meta.vendor = "VendorA";
    auto result = kernel_gap({k});
    REQUIRE(result.per_vendor.count("VendorA"));
    CHECK(result.per_vendor.at("VendorA").mean_months == doctest::Approx(75.0));
    CHECK(result.per_vendor.at("VendorA").min_months == 75);
}

TEST_CASE("kernel gap: same month is zero, negative clamps, missing excluded") {
    KernelOutRecord same;
    same.version = {2, 6, 36};
    same.build_date = kernel::Date{2010, 10, 25};
    same.meta.vendor = "V";
    KernelOutRecord backport;
    backport.version = {4, 14, 0};
    backport.build_date = kernel::Date{2016, 1, 1};  // predates 4.14
    backport.meta.vendor = "V";
    KernelOutRecord dateless;
    dateless.version = {4, 4, 0};
    dateless.meta.vendor = "V";
    KernelOutRecord unmapped;
    unmapped.version = {9, 9, 9};
    unmapped.build_date = kernel::Date{2020, 1, 1};
    unmapped.meta.vendor = "V";

    auto result = kernel_gap({same, backport, dateless, unmapped});
    CHECK(result.per_vendor.at("V").kernels == 2);
    CHECK(result.per_vendor.at("V").min_months == 0);
    CHECK(result.clamped_negative == 1);
    CHECK(result.excluded == 2);
}

TEST_CASE("aggregate merge: identity, commutativity, associativity (randomized)") {
    std::mt19937 rng(5);
    auto random_agg = [&] {
        PartialAggregate a;
        const char* cells[] = {"VendorA", "VendorB", "arm", "mips"};
        int n = 1 + rng() % 20;
        for (int i = 0; i < n; ++i)
            a.add(kAllMitigations[rng() % 5], cells[rng() % 4], rng() % 2);
        return a;
    };
    for (int trial = 0; trial < 1000; ++trial) {
        auto a = random_agg(), b = random_agg(), c = random_agg();

        PartialAggregate a_id = a;
        a_id.merge(PartialAggregate{});
        CHECK(a_id == a);

        PartialAggregate ab = a, ba = b;
        ab.merge(b);
        ba.merge(a);
        CHECK(ab == ba);

        PartialAggregate ab_c = a, a_bc = b;
        ab_c.merge(b);
        ab_c.merge(c);
        a_bc.merge(c);
        PartialAggregate left = a;
        left.merge(a_bc);
        CHECK(ab_c == left);
    }
}

TEST_CASE("sharded aggregation equals single pass exactly") {
    std::mt19937 rng(17);
    std::vector<BinaryRecord> rs;
    const char* vendors[] = {"V1", "V2", "V3", "V4"};
    for (int i = 0; i < 500; ++i) {
        rs.push_back(RecBuilder().vendor(vendors[rng() % 4])
                         .digest("d" + std::to_string(i))
                         .role(rng() % 3 ? "executable" : "library")
                         .canary(rng() % 2).nx(rng() % 2).pie(rng() % 2)
                         .relro(rng() % 2 ? "partial" : "none")
                         .fortify(rng() % 2).build());
    }
    auto single = aggregate_records(rs, Axis::Vendor, {});
    PartialAggregate merged;
    for (size_t start = 0; start < rs.size(); start += 100) {
        std::vector<BinaryRecord> shard(rs.begin() + start,
                                        rs.begin() + std::min(rs.size(), start + 100));
        merged.merge(aggregate_records(shard, Axis::Vendor, {}));
    }
    CHECK(merged == single);
    for (const char* v : vendors)
        CHECK(merged.rate(Mitigation::Canary, v) == single.rate(Mitigation::Canary, v));
}

TEST_CASE("aggregate JSON round trip and schema guard") {
    PartialAggregate a;
    a.add(Mitigation::Canary, "VendorA", true);
    a.add(Mitigation::Canary, "VendorA", false);
    auto j = a.to_json();
    auto back = PartialAggregate::from_json(j);
    CHECK(back == a);
    j["schema"] = "something-else";
    CHECK_THROWS_AS(PartialAggregate::from_json(j), records::SchemaMismatch);
}

TEST_CASE("outputs are independent of record order") {
    std::mt19937 rng(23);
    std::vector<BinaryRecord> rs;
    for (int i = 0; i < 60; ++i)
        rs.push_back(RecBuilder().vendor(i % 2 ? "A" : "B")
                         .digest("d" + std::to_string(rng() % 30))
                         .canary(rng() % 2).build());
    auto t1 = breakdown(rs, Axis::Vendor, {});
    std::shuffle(rs.begin(), rs.end(), rng);
    auto t2 = breakdown(rs, Axis::Vendor, {});
    REQUIRE(t1.rows.size() == t2.rows.size());
    for (size_t i = 0; i < t1.rows.size(); ++i) {
        CHECK(t1.rows[i].value == t2.rows[i].value);
        CHECK(t1.rows[i].rates.at(Mitigation::Canary).numerator ==
              t2.rows[i].rates.at(Mitigation::Canary).numerator);
    }
}

TEST_CASE("rates never exceed one and respect numerator <= denominator") {
    std::mt19937 rng(31);
    std::vector<BinaryRecord> rs;
    for (int i = 0; i < 200; ++i)
        rs.push_back(RecBuilder().role(rng() % 2 ? "executable" : "library")
                         .canary(rng() % 2).nx(rng() % 2)
                         .relro(rng() % 3 == 0 ? "full" : "none").build());
    for (Mitigation m : kAllMitigations) {
        auto r = adoption_rate(rs, m, {});
        CHECK(r.numerator <= r.denominator);
        if (r.defined()) CHECK(r.rate() <= 1.0);
    }
}

TEST_CASE("reference constants: Debian baseline row and first-release years") {
    CHECK(kDebianBaselinePercent.at("canary") == doctest::Approx(85.3));
    CHECK(kDebianBaselinePercent.at("relro") == doctest::Approx(98.1));
    CHECK(kDebianBaselinePercent.at("nx") == doctest::Approx(99.7));
    CHECK(kDebianBaselinePercent.at("fortify") == doctest::Approx(55.6));
    CHECK(kDebianBaselinePercent.at("pie") == doctest::Approx(94.0));
    CHECK(first_release_year(Mitigation::Canary) == 2005);
    CHECK(first_release_year(Mitigation::Relro) == 2004);
    CHECK(first_release_year(Mitigation::Nx) == 2003);
    CHECK(first_release_year(Mitigation::Fortify) == 2004);
    CHECK(first_release_year(Mitigation::Pie) == 2003);
}

}  // TEST_SUITE
