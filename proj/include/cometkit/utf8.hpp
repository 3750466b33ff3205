#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace cometkit::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes the code point starting at `pos`, advancing `pos`. Invalid or
// truncated sequences yield std::nullopt and advance by one byte.
std::optional<char32_t> next(std::string_view s, std::size_t& pos);

// Byte offset of the first malformed sequence, or npos if `s` is valid UTF-8.
std::size_t find_invalid(std::string_view s);

// Lossy decode: malformed bytes become U+FFFD.
std::u32string decode(std::string_view s);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view s);

// Unicode White_Space property.
bool is_space(char32_t cp);

// Simple case folding for the scripts the language guard cares about
// (Latin, Greek, Cyrillic). Other code points pass through.
char32_t to_lower(char32_t cp);

std::u32string trim(std::u32string_view s);

}  // namespace cometkit::utf8
