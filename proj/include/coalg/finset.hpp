// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coalg/limits.hpp"

namespace coalg {

/// A finite set of opaque identifiers, kept in lexicographic order so that
/// structurally equal sets compare equal.
class FinSet {
public:
    FinSet() = default;
    /// Sorts `elements`; throws `Error` on duplicates.
    explicit FinSet(std::vector<std::string> elements);
    FinSet(std::initializer_list<std::string> elements) : FinSet(std::vector<std::string>(elements)) {}

    /// {prefix0, prefix1, ...}
    static FinSet numbered(const std::string& prefix, std::size_t n);

    std::size_t size() const noexcept { return elems_.size(); }
    bool empty() const noexcept { return elems_.empty(); }
    const std::string& operator[](std::size_t i) const { return elems_[i]; }
    const std::vector<std::string>& elements() const noexcept { return elems_; }
    auto begin() const noexcept { return elems_.begin(); }
    auto end() const noexcept { return elems_.end(); }

    std::optional<std::size_t> find(const std::string& e) const;
    /// Like find, but throws `Error` naming the missing element.
    std::size_t index_of(const std::string& e) const;
    bool contains(const std::string& e) const { return find(e).has_value(); }

    friend bool operator==(const FinSet&, const FinSet&) = default;
    friend auto operator<=>(const FinSet&, const FinSet&) = default;

private:
    std::vector<std::string> elems_;
};

/// A total function between finite sets, stored as image indices.
class FinFun {
public:
    FinFun() = default;
    /// `image[i]` is the index in `cod` of the image of `dom[i]`.
    FinFun(FinSet dom, FinSet cod, std::vector<std::size_t> image);
    static FinFun from_names(FinSet dom, FinSet cod, const std::vector<std::string>& image_names);
    static FinFun identity(const FinSet& x);

    const FinSet& dom() const noexcept { return dom_; }
    const FinSet& cod() const noexcept { return cod_; }
    const std::vector<std::size_t>& image() const noexcept { return image_; }

    std::size_t operator()(std::size_t i) const { return image_[i]; }
    const std::string& operator()(const std::string& x) const;

    bool injective() const;
    bool surjective() const;

    /// (g after f) for f = *this.
    FinFun then(const FinFun& g) const;

    friend bool operator==(const FinFun&, const FinFun&) = default;

private:
    FinSet dom_;
    FinSet cod_;
    std::vector<std::size_t> image_;
};

/// Number of functions dom -> cod, saturating.
std::uint64_t count_functions(std::size_t dom, std::size_t cod);

/// Calls `visit` for every function dom -> cod (lexicographic in the image vector).
void for_each_function(const FinSet& dom, const FinSet& cod, const std::function<void(const FinFun&)>& visit,
                       const Limits& limits = {});

}  // namespace coalg
