#include <doctest.h>

#include <random>

#include "fwaudit/kallsyms.hpp"
#include "kallsyms_builder.hpp"

using namespace fwaudit;
using namespace fwaudit::kernel;
using testsupport::build_kallsyms_image;
using testsupport::KallsymsSpec;

TEST_SUITE("kallsyms") {

TEST_CASE("hand-built token table decodes to the exact name list") {
    KallsymsSpec spec;
    spec.symbols = {{'T', "__stack_chk_fail"}, {'T', "start_kernel"}};
    spec.extra_tokens = {"__stack_chk", "_fail", "start_", "kernel"};
    auto img = build_kallsyms_image(spec);

    auto names = extract_kallsyms({img.bytes.data(), img.bytes.size()});
    REQUIRE(names.size() == 2);
    CHECK(names[0] == "__stack_chk_fail");
    CHECK(names[1] == "start_kernel");
}

TEST_CASE("decode recovers types and the raw names region") {
    KallsymsSpec spec;
    spec.symbols = {{'T', "do_sys_open"}, {'D', "jiffies"}, {'t', "helper_fn"}};
    auto img = build_kallsyms_image(spec);
    auto dump = extract_kallsyms_dump({img.bytes.data(), img.bytes.size()});
    REQUIRE(dump.names.size() == 3);
    CHECK(dump.types[0] == 'T');
    CHECK(dump.types[1] == 'D');
    CHECK(dump.types[2] == 't');
    CHECK(dump.num_syms == 3);
    CHECK(dump.names_blob == img.names_blob);
    CHECK(dump.token_table == img.token_table);
    CHECK(dump.names_offset == img.names_offset);
}

TEST_CASE("big-endian token index is recognized") {
    KallsymsSpec spec;
    spec.symbols = {{'T', "mips_machine_setup"}, {'W', "usercopy_warn"}};
    spec.big_endian = true;
    auto img = build_kallsyms_image(spec);
    auto dump = extract_kallsyms_dump({img.bytes.data(), img.bytes.size()});
    CHECK(dump.big_endian);
    REQUIRE(dump.names.size() == 2);
    CHECK(dump.names[1] == "usercopy_warn");
}

TEST_CASE("random bytes raise KallsymsNotFound") {
    std::mt19937 rng(7);
    ByteBuf junk(512 * 1024);
    for (auto& b : junk) b = static_cast<uint8_t>(rng());
    CHECK_THROWS_AS(extract_kallsyms({junk.data(), junk.size()}), KallsymsNotFound);
}

TEST_CASE("token table with an undecodable names region is LayoutUnsupported") {
    KallsymsSpec spec;
    spec.symbols = {{'T', "alpha"}, {'T', "beta"}};
    auto img = build_kallsyms_image(spec);
    // Wipe everything before the token table: no num_syms/names to find.
    for (size_t i = 0; i < img.token_table_offset; ++i) img.bytes[i] = 0;
    CHECK_THROWS_AS(extract_kallsyms({img.bytes.data(), img.bytes.size()}),
                    LayoutUnsupported);
}

TEST_CASE("round trip: re-encoding decoded names reproduces the blob byte-exactly") {
    for (unsigned seed = 1; seed <= 24; ++seed) {
        CAPTURE(seed);
        auto spec = testsupport::random_kallsyms_spec(seed);
        auto img = build_kallsyms_image(spec);
        auto dump = extract_kallsyms_dump({img.bytes.data(), img.bytes.size()});

        REQUIRE(dump.names.size() == spec.symbols.size());
        for (size_t i = 0; i < dump.names.size(); ++i) {
            CHECK(dump.types[i] == spec.symbols[i].first);
            CHECK(dump.names[i] == spec.symbols[i].second);
        }

        std::vector<std::pair<char, std::string>> decoded;
        for (size_t i = 0; i < dump.names.size(); ++i)
            decoded.emplace_back(dump.types[i], dump.names[i]);
        auto reencoded = testsupport::encode_names(decoded, dump.token_table);
        CHECK(reencoded == dump.names_blob);
    }
}

TEST_CASE("decoder tolerates surrounding binary noise") {
    auto spec = testsupport::random_kallsyms_spec(99);
    auto img = build_kallsyms_image(spec);
    std::mt19937 rng(3);
    ByteBuf padded(4096);
    for (auto& b : padded) b = static_cast<uint8_t>(rng() % 255 + 1);
    padded.insert(padded.end(), img.bytes.begin(), img.bytes.end());
    ByteBuf tail(2048);
    for (auto& b : tail) b = static_cast<uint8_t>(rng());
    padded.insert(padded.end(), tail.begin(), tail.end());

    auto names = extract_kallsyms({padded.data(), padded.size()});
    REQUIRE(names.size() == spec.symbols.size());
    CHECK(names.front() == spec.symbols.front().second);
}

}  // TEST_SUITE
