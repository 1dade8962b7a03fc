#include "flag/utf8.hpp"

#include "flag/error.hpp"

namespace flag {

const char* to_string(BackendError::Kind kind) noexcept {
    switch (kind) {
        case BackendError::Kind::transport: return "transport";
        case BackendError::Kind::auth: return "auth";
        case BackendError::Kind::rate_limit: return "rate-limit";
        case BackendError::Kind::capability: return "capability";
        case BackendError::Kind::cache_miss: return "cache-miss";
        case BackendError::Kind::protocol: return "protocol";
    }
    return "unknown";
}

}  // namespace flag

namespace flag::utf8 {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Returns the decoded scalar and advances `pos`; malformed input consumes one byte.
char32_t next_scalar(std::string_view text, std::size_t& pos) {
    const auto lead = static_cast<unsigned char>(text[pos]);
    if (lead < 0x80) {
        ++pos;
        return lead;
    }
    std::size_t extra = 0;
    char32_t value = 0;
    char32_t min_value = 0;
    if ((lead & 0xE0) == 0xC0) {
        extra = 1;
        value = lead & 0x1F;
        min_value = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
        extra = 2;
        value = lead & 0x0F;
        min_value = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
        extra = 3;
        value = lead & 0x07;
        min_value = 0x10000;
    } else {
        ++pos;
        return kReplacement;
    }
    if (pos + extra >= text.size()) {
        ++pos;
        return kReplacement;
    }
    for (std::size_t i = 1; i <= extra; ++i) {
        const auto cont = static_cast<unsigned char>(text[pos + i]);
        if ((cont & 0xC0) != 0x80) {
            ++pos;
            return kReplacement;
        }
        value = (value << 6) | (cont & 0x3F);
    }
    if (value < min_value || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
        ++pos;
        return kReplacement;
    }
    pos += extra + 1;
    return value;
}

void append(std::string& out, char32_t c) {
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

}  // namespace

std::u32string decode(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        out.push_back(next_scalar(text, pos));
    }
    return out;
}

std::string encode(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t c : text) {
        append(out, c);
    }
    return out;
}

std::string sanitize(std::string_view text) {
    return encode(decode(text));
}

std::string prefix(std::string_view text, std::size_t count) {
    const auto scalars = decode(text);
    return encode(std::u32string_view(scalars).substr(0, count));
}

std::size_t length(std::string_view text) {
    return decode(text).size();
}

}  // namespace flag::utf8
