// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "coalg/error.hpp"

namespace coalg {

/// Size limits and knobs shared by all enumerating operations.
struct Limits {
    /// Largest number of values any single enumeration may produce.
    std::uint64_t cardinality = std::uint64_t{1} << 20;
    /// Denominator bound for distribution enumeration; 0 means "derive it"
    /// (from the coalgebra at hand, or 1 when there is nothing to derive from).
    std::int64_t denominator = 0;
    /// Largest generator set accepted by `realize`.
    std::size_t generators = 20;
    /// Largest combined carrier accepted by the brute-force bisimilarity oracle.
    std::size_t brute_force_states = 8;
    /// Polled by long enumerations; returning true aborts with `Cancelled`.
    std::function<bool()> cancelled;

    void poll() const {
        if (cancelled && cancelled()) throw Cancelled();
    }

    /// Throws CapExceeded when `count` exceeds the cardinality cap.
    void require(std::uint64_t count, const std::string& what) const {
        if (count > cardinality)
            throw CapExceeded("enumeration too large: " + what + " has " +
                              (count == UINT64_MAX ? std::string("more than 2^64") : std::to_string(count)) +
                              " values, cap is " + std::to_string(cardinality));
    }
};

/// Saturating arithmetic for size forecasts. UINT64_MAX stands for "too big".
namespace sat {
inline std::uint64_t add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    return __builtin_add_overflow(a, b, &r) ? UINT64_MAX : r;
}
inline std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    return __builtin_mul_overflow(a, b, &r) ? UINT64_MAX : r;
}
inline std::uint64_t pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        r = mul(r, base);
        if (r == UINT64_MAX || r == 0) break;
    }
    return r;
}
inline std::uint64_t pow2(std::uint64_t exp) { return exp >= 64 ? UINT64_MAX : (std::uint64_t{1} << exp); }
}  // namespace sat

}  // namespace coalg
