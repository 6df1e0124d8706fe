#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace smartbal::csv {

// Deterministic numeric formatting shared by every emitted artifact; %.10g
// keeps integers bare ("400") and avoids trailing zero noise.
inline std::string num(double v) {
    if (v == 0.0) return "0"; // fold -0 into 0
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

namespace detail {

inline void append_field(std::string& out, const std::string& v) { out += v; }
inline void append_field(std::string& out, const char* v) { out += v; }
inline void append_field(std::string& out, double v) { out += num(v); }
inline void append_field(std::string& out, int v) { out += std::to_string(v); }
inline void append_field(std::string& out, bool v) { out += v ? "1" : "0"; }

} // namespace detail

template <typename... Fields>
void row(std::string& out, const Fields&... fields) {
    std::size_t i = 0;
    auto one = [&](const auto& field) {
        if (i++ > 0) out += ',';
        detail::append_field(out, field);
    };
    (one(fields), ...);
    out += '\n';
}

} // namespace smartbal::csv
