// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coalg/limits.hpp"

namespace coalg {

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::size_t checks = 0;
    double elapsed_ms = 0;
    /// Failure description, including the offending instance.
    std::string detail;
};

struct SelftestReport {
    std::uint64_t seed = 0;
    std::vector<PropertyResult> results;
    /// Name of the first failing property, if any.
    std::optional<std::string> failed;
    /// Command line reproducing the failure on its own.
    std::string repro;
    bool ok() const noexcept { return !failed; }
};

/// Names of all properties in execution order.
std::vector<std::string> selftest_properties();

/// Runs every property (or just `only`), stopping at the first failure.
/// `progress` is called after each property.
SelftestReport run_selftest(std::uint64_t seed, const std::optional<std::string>& only = std::nullopt,
                            const Limits& limits = {},
                            const std::function<void(const PropertyResult&)>& progress = {});

}  // namespace coalg
