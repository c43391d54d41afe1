#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace textvqa {

/// ASCII lowercase; bytes >= 0x80 pass through untouched so UTF-8 stays valid.
std::string to_lower(std::string_view s);

/// Trims and collapses runs of whitespace to a single space.
std::string collapse_whitespace(std::string_view s);

/// The one answer normalizer used for labels, deduplication and retrieval:
/// lowercase followed by whitespace collapsing.
std::string normalize_answer(std::string_view s);

/// Splits on whitespace, then peels leading/trailing ASCII punctuation off each
/// piece as separate single-character tokens ("say?" -> "say", "?").
std::vector<std::string> tokenize(std::string_view text);

bool is_ascii_punct(char c);

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD one byte at a time.
std::u32string utf8_decode(std::string_view s);

/// FNV-1a, 64 bit. Stable across runs and platforms.
constexpr std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace textvqa
