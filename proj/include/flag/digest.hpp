#pragma once

#include <string>
#include <string_view>

namespace flag {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Appends a length-prefixed field so that concatenated fields cannot collide.
void append_field(std::string& canonical, std::string_view field);

/// Shortest round-trip decimal form of `value`, identical on every platform.
std::string canonical_number(double value);

}  // namespace flag
