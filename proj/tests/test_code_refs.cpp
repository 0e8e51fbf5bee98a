#include <doctest.h>

#include "elf_builder.hpp"
#include "fwaudit/code_refs.hpp"

using namespace fwaudit;
using namespace fwaudit::elf;
using testsupport::ElfBuilder;

namespace {

void put_word(ByteBuf& b, uint32_t w, bool be) {
    for (int i = 0; i < 4; ++i)
        b.push_back(be ? (w >> (8 * (3 - i))) & 0xff : (w >> (8 * i)) & 0xff);
}

ElfView build_code(uint16_t machine, bool bits64, bool be, const ByteBuf& code) {
    ElfBuilder b;
    b.machine(machine).bits64(bits64).big_endian(be).elf_type(2);
    testsupport::BlobSpec text;
    text.name = ".text";
    text.sh_flags = 6;
    text.data = code;
    b.blob(text);
    b.segment({1, 5, {".text"}, std::nullopt});
    auto bytes = b.build();
    return parse_elf(ByteSpan{bytes.data(), bytes.size()});
}

// Deterministic layout: a first build with placeholder bytes reveals the
// vaddr the real code will land on.
uint64_t probe_text_vaddr(uint16_t machine, bool bits64, bool be, size_t code_size) {
    ElfBuilder b;
    b.machine(machine).bits64(bits64).big_endian(be).elf_type(2);
    testsupport::BlobSpec text;
    text.name = ".text";
    text.sh_flags = 6;
    text.data = ByteBuf(code_size, 0);
    b.blob(text);
    b.segment({1, 5, {".text"}, std::nullopt});
    b.build();
    return b.vaddr_of(".text");
}

}  // namespace

TEST_SUITE("code_refs") {

TEST_CASE("arm literal pool word in executable segment") {
    const uint32_t target = 0x00412345;
    ByteBuf code;
    put_word(code, 0xe59f0000, false);  // ldr r0, [pc]
    put_word(code, target, false);      // literal pool entry
    auto v = build_code(40 /*EM_ARM*/, false, false, code);
    auto refs = find_code_references(v, target);
    REQUIRE(refs.has_value());
    REQUIRE(refs->size() == 1);
    CHECK((*refs)[0].kind == "literal_pool");

    CHECK(find_code_references(v, 0x99999999)->empty());
}

TEST_CASE("arm movw/movt pair composing the address") {
    const uint32_t target = 0x00412345;
    ByteBuf code;
    put_word(code, 0xe3024345, false);  // movw r4, #0x2345
    put_word(code, 0xe1a00000, false);  // nop (mov r0, r0)
    put_word(code, 0xe3404041, false);  // movt r4, #0x41
    auto v = build_code(40, false, false, code);
    auto refs = find_code_references(v, target);
    REQUIRE(refs.has_value());
    REQUIRE(refs->size() == 1);
    CHECK((*refs)[0].kind == "movw_movt");

    // Different destination register on movt: no pair.
    ByteBuf bad;
    put_word(bad, 0xe3024345, false);   // movw r4
    put_word(bad, 0xe3405041, false);   // movt r5
    auto v2 = build_code(40, false, false, bad);
    CHECK(find_code_references(v2, target)->empty());
}

TEST_CASE("mips lui/addiu pair, big endian, negative low half") {
    const uint32_t target = 0x0041a345;  // low half sign-extends negative
    ByteBuf code;
    put_word(code, 0x3c050042, true);  // lui $5, 0x42 (carry-adjusted high)
    put_word(code, 0x00000000, true);  // nop
    put_word(code, 0x24a5a345, true);  // addiu $5, $5, 0xa345
    auto v = build_code(8 /*EM_MIPS*/, false, true, code);
    auto refs = find_code_references(v, target);
    REQUIRE(refs.has_value());
    REQUIRE(refs->size() == 1);
    CHECK((*refs)[0].kind == "lui_addiu");
}

TEST_CASE("mips lui/ori pair") {
    const uint32_t target = 0x00412345;
    ByteBuf code;
    put_word(code, 0x3c080041, true);  // lui $8, 0x41
    put_word(code, 0x35082345, true);  // ori $8, $8, 0x2345
    auto v = build_code(8, false, true, code);
    auto refs = find_code_references(v, target);
    REQUIRE(refs.has_value());
    REQUIRE(refs->size() == 1);
    CHECK((*refs)[0].kind == "lui_ori");
}

TEST_CASE("aarch64 adrp+add pair") {
    const size_t code_size = 12;
    uint64_t text_va = probe_text_vaddr(183 /*EM_AARCH64*/, true, false, code_size);
    const uint64_t target = 0x00480123;
    uint64_t pc_page = text_va & ~0xfffull;
    int64_t page_delta = static_cast<int64_t>((target & ~0xfffull) - pc_page) >> 12;
    uint32_t immlo = page_delta & 3;
    uint32_t immhi = (page_delta >> 2) & 0x7ffff;
    uint32_t adrp = 0x90000000u | (immlo << 29) | (immhi << 5) | 3;          // adrp x3
    uint32_t add = 0x91000000u | ((target & 0xfff) << 10) | (3u << 5) | 3;   // add x3,x3,#lo

    ByteBuf code;
    put_word(code, adrp, false);
    put_word(code, 0xd503201f, false);  // nop
    put_word(code, add, false);
    auto v = build_code(183, true, false, code);
    CHECK(v.machine == Machine::AArch64);
    auto refs = find_code_references(v, target);
    REQUIRE(refs.has_value());
    REQUIRE(refs->size() == 1);
    CHECK((*refs)[0].kind == "adrp_add");
    CHECK((*refs)[0].vaddr == text_va);
}

TEST_CASE("x64 absolute immediate and rip-relative displacement") {
    const size_t code_size = 16;
    uint64_t text_va = probe_text_vaddr(62 /*EM_X86_64*/, true, false, code_size);
    const uint64_t target = text_va + 0x2000;

    ByteBuf code;
    // mov edi, imm32 (absolute)
    code.push_back(0xbf);
    put_word(code, static_cast<uint32_t>(target), false);
    // lea rsi, [rip + disp32]; disp sits at offset 8.
    code.push_back(0x48);
    code.push_back(0x8d);
    code.push_back(0x35);
    uint64_t disp_site_va = text_va + code.size();
    put_word(code, static_cast<uint32_t>(target - (disp_site_va + 4)), false);
    while (code.size() < code_size) code.push_back(0x90);

    auto v = build_code(62, true, false, code);
    auto refs = find_code_references(v, target);
    REQUIRE(refs.has_value());
    bool saw_abs = false, saw_rip = false;
    for (const auto& r : *refs) {
        if (r.kind == "abs32") saw_abs = true;
        if (r.kind == "rip_rel32") saw_rip = true;
    }
    CHECK(saw_abs);
    CHECK(saw_rip);
}

TEST_CASE("data-segment words do not count as code references") {
    const uint32_t target = 0x00412345;
    ElfBuilder b;
    b.machine(40).bits64(false).elf_type(2);
    testsupport::BlobSpec data;
    data.name = ".data";
    data.sh_flags = 3;
    put_word(data.data, target, false);
    b.blob(data);
    b.segment({1, 6 /*RW, not X*/, {".data"}, std::nullopt});
    auto bytes = b.build();
    auto v = parse_elf(ByteSpan{bytes.data(), bytes.size()});
    auto refs = find_code_references(v, target);
    REQUIRE(refs.has_value());
    CHECK(refs->empty());
}

TEST_CASE("unregistered architecture returns nullopt, not empty") {
    ByteBuf code;
    put_word(code, 0x00412345, true);
    auto v = build_code(20 /*EM_PPC*/, false, true, code);
    CHECK(v.machine == Machine::PowerPc);
    CHECK_FALSE(find_code_references(v, 0x00412345).has_value());
}

}  // TEST_SUITE
