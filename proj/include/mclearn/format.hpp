#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <system_error>

namespace mclearn {

// Shortest round-trip decimal for a double (to_chars, plain format).  Used by
// every serializer so that save -> load -> save is byte-identical.
inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt_double_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace mclearn
