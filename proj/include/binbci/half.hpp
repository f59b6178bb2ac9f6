#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace binbci {

/// IEEE 754 binary16 encode with round-to-nearest-even, directly from double.
inline std::uint16_t to_half_bits(double value) noexcept
{
    const std::uint16_t sign = std::signbit(value) ? 0x8000u : 0u;
    if (std::isnan(value)) {
        return sign | 0x7e00u;
    }
    const double a = std::abs(value);
    if (a >= 65520.0) {
        return sign | 0x7c00u;
    }
    if (a == 0.0) {
        return sign;
    }
    int exponent = 0;
    std::frexp(a, &exponent);
    int e = exponent - 1; // a = 1.m * 2^e
    if (e < -14) {
        const auto units = static_cast<std::uint16_t>(std::nearbyint(std::ldexp(a, 24)));
        return sign | units;
    }
    auto mantissa = static_cast<std::uint32_t>(std::nearbyint(std::ldexp(a, 10 - e)));
    if (mantissa == 2048u) {
        mantissa = 1024u;
        ++e;
    }
    if (e > 15) {
        return sign | 0x7c00u;
    }
    return static_cast<std::uint16_t>(sign | (static_cast<std::uint32_t>(e + 15) << 10) | (mantissa - 1024u));
}

inline double from_half_bits(std::uint16_t bits) noexcept
{
    const double sign = (bits & 0x8000u) ? -1.0 : 1.0;
    const int exponent = (bits >> 10) & 0x1f;
    const int mantissa = bits & 0x3ff;
    if (exponent == 0) {
        return sign * std::ldexp(static_cast<double>(mantissa), -24);
    }
    if (exponent == 31) {
        return mantissa == 0 ? sign * std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::quiet_NaN();
    }
    return sign * std::ldexp(static_cast<double>(mantissa + 1024), exponent - 25);
}

inline double round_to_half(double value) noexcept { return from_half_bits(to_half_bits(value)); }

} // namespace binbci
