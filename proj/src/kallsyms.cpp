#include "fwaudit/kallsyms.hpp"

#include <cctype>
#include <optional>

namespace fwaudit::kernel {

namespace {

constexpr size_t kMaxTokenLen = 64;
constexpr size_t kMaxSymbols = 4'000'000;

bool plausible_token(std::string_view t) {
    if (t.empty() || t.size() > kMaxTokenLen) return false;
    for (unsigned char c : t)
        if (c < 0x20 || c > 0x7e) return false;
    return true;
}

bool valid_type_char(char c) {
    return isalpha(static_cast<unsigned char>(c)) || c == '?';
}

bool valid_name_char(unsigned char c) { return c >= 0x21 && c <= 0x7e; }

// "0\01\0...9\0" then, 39 tokens later, "a\0b\0...j\0". Identity tokens for
// digits and lowercase letters sit at their byte-value indices in every
// practically observed table.
ByteBuf digit_pattern() {
    ByteBuf p;
    for (char c = '0'; c <= '9'; ++c) {
        p.push_back(c);
        p.push_back(0);
    }
    return p;
}

ByteBuf letter_pattern() {
    ByteBuf p;
    for (char c = 'a'; c <= 'j'; ++c) {
        p.push_back(c);
        p.push_back(0);
    }
    return p;
}

// Start offset of the string preceding the one starting at `start`, or npos.
size_t prev_string_start(ByteSpan img, size_t start) {
    if (start < 2) return npos;
    size_t nul = start - 1;  // terminator of the previous string
    if (img[nul] != 0) return npos;
    size_t q = nul;
    while (q > 0 && img[q - 1] != 0) --q;
    if (q == nul) return npos;  // empty token
    return q;
}

struct TokenTable {
    std::vector<std::string> tokens;
    std::vector<uint16_t> offsets;  // cumulative offsets into the table
    size_t start = 0;
    size_t end = 0;  // one past the final NUL
};

std::optional<TokenTable> parse_tokens(ByteSpan img, size_t table_start) {
    TokenTable t;
    t.start = table_start;
    size_t pos = table_start;
    uint32_t cum = 0;
    for (int i = 0; i < 256; ++i) {
        size_t s = pos;
        while (pos < img.size() && img[pos]) ++pos;
        if (pos >= img.size() || pos - s > kMaxTokenLen) return std::nullopt;
        std::string tok(reinterpret_cast<const char*>(img.data() + s), pos - s);
        if (!plausible_token(tok)) return std::nullopt;
        t.offsets.push_back(static_cast<uint16_t>(cum));
        cum += tok.size() + 1;
        if (cum > 0xffff) return std::nullopt;
        t.tokens.push_back(std::move(tok));
        ++pos;  // NUL
    }
    t.end = pos;
    return t;
}

std::optional<TokenTable> locate_token_table(ByteSpan img) {
    ByteBuf digits = digit_pattern();
    ByteBuf letters = letter_pattern();
    size_t pos = 0;
    while ((pos = find_first(img, {digits.data(), digits.size()}, pos)) != npos) {
        size_t digit_start = pos;
        pos += 1;

        // '9' is token 57, 'a' is token 97: expect the letter run 39 tokens on.
        size_t p = digit_start + digits.size();
        bool ok = true;
        for (int skip = 0; skip < 39 && ok; ++skip) {
            size_t s = p;
            while (p < img.size() && img[p] && p - s <= kMaxTokenLen) ++p;
            if (p >= img.size() || img[p] != 0) ok = false;
            ++p;
        }
        if (!ok || p + letters.size() > img.size()) continue;
        if (memcmp(img.data() + p, letters.data(), letters.size()) != 0) continue;

        // Walk back 48 tokens ('0' is token 48) to the table start.
        size_t start = digit_start;
        for (int back = 0; back < 48; ++back) {
            start = prev_string_start(img, start);
            if (start == npos) break;
        }
        if (start == npos) continue;

        if (auto table = parse_tokens(img, start)) return table;
    }
    return std::nullopt;
}

struct TokenIndex {
    size_t offset = 0;
    bool big_endian = false;
};

std::optional<TokenIndex> locate_token_index(ByteSpan img, const TokenTable& t) {
    // The index follows the table after alignment padding; each entry is the
    // u16 offset of its token.
    for (size_t cand = (t.end + 1) & ~size_t(1); cand <= t.end + 16; cand += 2) {
        if (cand + 512 > img.size()) break;
        for (bool be : {false, true}) {
            bool match = true;
            for (int i = 0; i < 256 && match; ++i)
                match = rd16(img, cand + 2 * i, be) == t.offsets[i];
            if (match) return TokenIndex{cand, be};
        }
    }
    return std::nullopt;
}

struct DecodedNames {
    std::vector<std::string> names;
    std::vector<char> types;
    size_t names_start = 0;
    size_t names_end = 0;
    size_t num_syms = 0;
};

// Attempts a full decode of `count` length-prefixed token-compressed entries.
std::optional<DecodedNames> try_decode(ByteSpan img, const TokenTable& t,
                                       size_t names_start, size_t count, size_t limit) {
    DecodedNames out;
    out.names_start = names_start;
    out.num_syms = count;
    size_t pos = names_start;
    for (size_t i = 0; i < count; ++i) {
        if (pos >= limit) return std::nullopt;
        size_t len = img[pos++];
        if (len == 0 || pos + len > limit) return std::nullopt;
        std::string decoded;
        for (size_t j = 0; j < len; ++j) decoded += t.tokens[img[pos + j]];
        pos += len;
        if (decoded.size() < 2 || !valid_type_char(decoded[0])) return std::nullopt;
        for (size_t j = 1; j < decoded.size(); ++j)
            if (!valid_name_char(static_cast<unsigned char>(decoded[j]))) return std::nullopt;
        out.types.push_back(decoded[0]);
        out.names.push_back(decoded.substr(1));
    }
    out.names_end = pos;
    return out;
}

std::optional<DecodedNames> locate_names(ByteSpan img, const TokenTable& t, bool be) {
    const size_t limit = t.start;
    for (size_t p = 0; p + 8 <= limit; p += 4) {
        uint32_t n = rd32(img, p, be);
        if (n == 0 || n > kMaxSymbols) continue;
        for (size_t names_start : {p + 4, p + 8}) {
            auto dec = try_decode(img, t, names_start, n, limit);
            if (!dec) continue;
            // The gap to the token table holds the markers array plus padding.
            size_t slack = limit - dec->names_end;
            size_t max_markers = (n / 256 + 2) * 8 + 64;
            if (slack <= max_markers) return dec;
        }
    }
    return std::nullopt;
}

}  // namespace

KallsymsDump extract_kallsyms_dump(ByteSpan image) {
    auto table = locate_token_table(image);
    if (!table) throw KallsymsNotFound();

    auto index = locate_token_index(image, *table);
    if (!index) throw LayoutUnsupported("token index not adjacent to token table");

    auto names = locate_names(image, *table, index->big_endian);
    if (!names) throw LayoutUnsupported("compressed names array not decodable");

    KallsymsDump dump;
    dump.names = std::move(names->names);
    dump.types = std::move(names->types);
    dump.token_table = std::move(table->tokens);
    dump.names_blob.assign(image.begin() + names->names_start,
                           image.begin() + names->names_end);
    dump.num_syms = names->num_syms;
    dump.token_table_offset = table->start;
    dump.token_index_offset = index->offset;
    dump.names_offset = names->names_start;
    dump.big_endian = index->big_endian;
    return dump;
}

std::vector<std::string> extract_kallsyms(ByteSpan image) {
    return extract_kallsyms_dump(image).names;
}

}  // namespace fwaudit::kernel
