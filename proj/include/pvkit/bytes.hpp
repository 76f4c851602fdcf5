#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pvkit {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(BytesView b) {
    return std::string(b.begin(), b.end());
}

std::string to_hex(BytesView data);

// Accepts an even-length hex string; returns false on any non-hex digit.
bool from_hex(std::string_view hex, Bytes& out);

// Constant-time comparison for key material.
bool ct_equal(BytesView a, BytesView b);

inline Bytes concat(BytesView a, BytesView b) {
    Bytes out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

} // namespace pvkit
