#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace flag::utf8 {

/// Decodes UTF-8, replacing each malformed sequence with U+FFFD.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);

/// Round-trips text through decode/encode so the result is valid UTF-8.
std::string sanitize(std::string_view text);

/// The first `count` scalar values of `text` (all of it when shorter).
std::string prefix(std::string_view text, std::size_t count);

std::size_t length(std::string_view text);

}  // namespace flag::utf8
