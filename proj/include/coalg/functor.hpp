// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coalg/finset.hpp"
#include "coalg/limits.hpp"
#include "coalg/rational.hpp"

namespace coalg {

/// Syntax tree of a type functor built from identity, constants, products,
/// coproducts, exponents, powerset, finite distributions and neighbourhoods.
///
/// Text syntax: `Id`, `C{a,b}`, `F * G`, `F + G`, `F^{a,b}`, `P(F)`, `D(F)`,
/// `N(F)`. `^` binds tighter than `*`, which binds tighter than `+`; both
/// binary operators associate to the left.
class Functor {
public:
    enum class Kind : std::uint8_t { Id, Const, Prod, Coprod, Exp, Pow, Dist, Nbhd };

    Functor();  // Id

    static Functor id() { return Functor(); }
    static Functor constant(FinSet alphabet);
    /// The terminal functor 1, written `C{*}`.
    static Functor terminal() { return constant(FinSet{"*"}); }
    static Functor product(Functor l, Functor r);
    static Functor coproduct(Functor l, Functor r);
    static Functor exponent(Functor base, FinSet alphabet);
    static Functor powerset(Functor inner);
    static Functor distribution(Functor inner);
    static Functor neighbourhood(Functor inner);

    static Functor parse(std::string_view text);
    std::string to_string() const;

    Kind kind() const noexcept;
    /// Alphabet of Const and Exp nodes; empty otherwise.
    const FinSet& alphabet() const noexcept;
    /// Left operand of Prod/Coprod, base of Exp, argument of Pow/Dist/Nbhd.
    const Functor& left() const;
    const Functor& right() const;
    const Functor& inner() const { return left(); }

    /// True when some node below (or at) this one is a distribution.
    bool contains_dist() const;

    friend bool operator==(const Functor& a, const Functor& b);

    /// Identity of the shared node, usable as a cache key.
    const void* node_id() const noexcept { return node_.get(); }

private:
    struct Node;
    explicit Functor(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

/// An element of T X: a tagged tree whose shape mirrors the functor.
///
/// Sets, neighbourhoods and distributions are kept canonical (sorted, no
/// duplicates, no zero weights) so that structural comparison is equality.
class TValue {
public:
    enum class Kind : std::uint8_t { State, Const, Pair, Inl, Inr, Table, Set, Dist, Nbhd };

    TValue() = default;

    static TValue state(std::string id);
    static TValue constant(std::string symbol);
    static TValue pair(TValue a, TValue b);
    static TValue inl(TValue v);
    static TValue inr(TValue v);
    /// Entries in the (sorted) order of the exponent's alphabet.
    static TValue table(std::vector<TValue> entries);
    static TValue set(std::vector<TValue> items);
    /// Merges repeated support points, drops zero weights; throws unless the
    /// weights lie in [0,1] and sum to exactly 1.
    static TValue dist(std::vector<std::pair<TValue, Rational>> weighted);
    /// Every member must be a Set value.
    static TValue nbhd(std::vector<TValue> sets);

    Kind kind() const noexcept { return kind_; }
    /// State identifier or constant symbol.
    const std::string& symbol() const noexcept { return symbol_; }
    /// Children: pair components, injected value, table entries, set members,
    /// distribution support, or neighbourhood member sets.
    const std::vector<TValue>& items() const noexcept { return items_; }
    /// Distribution weights, parallel to `items()`.
    const std::vector<Rational>& weights() const noexcept { return weights_; }

    const TValue& first() const { return items_.at(0); }
    const TValue& second() const { return items_.at(1); }
    const TValue& payload() const { return items_.at(0); }

    /// Compact rendering for diagnostics.
    std::string to_string() const;

    friend bool operator==(const TValue& a, const TValue& b);
    friend std::strong_ordering operator<=>(const TValue& a, const TValue& b);

private:
    TValue(Kind k, std::string sym, std::vector<TValue> items, std::vector<Rational> weights = {})
        : kind_(k), symbol_(std::move(sym)), items_(std::move(items)), weights_(std::move(weights)) {}

    Kind kind_ = Kind::State;
    std::string symbol_;
    std::vector<TValue> items_;
    std::vector<Rational> weights_;
};

/// Throws ShapeError (with a path) unless `v` is a well-formed element of T X.
void check_shape(const Functor& t, const TValue& v, const FinSet& x);
bool well_shaped(const Functor& t, const TValue& v, const FinSet& x);

/// |T X| for |X| = n with distributions bounded by denominator d; saturates at UINT64_MAX.
std::uint64_t cardinality(const Functor& t, std::uint64_t n, std::int64_t d);

/// Every element of T X, sorted and duplicate-free. Distribution weights are
/// restricted to multiples of 1/limits.denominator (which must then be >= 1).
std::vector<TValue> apply_on_set(const Functor& t, const FinSet& x, const Limits& limits = {});

/// The action T f: T X -> T Y of a functor on a function f: X -> Y.
///
/// Powerset takes direct images, distributions push forward, and
/// neighbourhoods map N to { B | (F f)^-1(B) in N }.
class FunctorAction {
public:
    FunctorAction(Functor t, FinFun f, Limits limits = {});

    TValue operator()(const TValue& v) const;
    const Functor& functor() const noexcept { return t_; }
    const FinFun& function() const noexcept { return f_; }

private:
    struct NbhdCache {
        std::vector<TValue> dom_values;        // F X, sorted
        std::vector<TValue> cod_values;        // F Y, sorted
        std::vector<std::size_t> image;        // index in cod_values of F f(dom_values[i])
        std::vector<std::size_t> outside;      // cod indices not hit by F f
    };

    TValue apply(const Functor& t, const TValue& v, const std::string& path) const;
    const NbhdCache& cache_for(const Functor& inner) const;

    Functor t_;
    FinFun f_;
    Limits limits_;
    mutable std::map<const void*, NbhdCache> nbhd_cache_;
};

inline FunctorAction apply_on_fun(const Functor& t, const FinFun& f, const Limits& limits = {}) {
    return FunctorAction(t, f, limits);
}

struct FunctorLawReport {
    std::size_t identity_checked = 0;
    std::size_t composition_checked = 0;
    bool identity_holds = true;
    bool composition_holds = true;
    /// First element of T X on which a law failed.
    std::optional<TValue> counterexample;
    bool ok() const noexcept { return identity_holds && composition_holds; }
};

/// Checks T(id_X) = id and T(g . f) = T g . T f on every element of T X.
FunctorLawReport check_functor_laws(const Functor& t, const FinFun& f, const FinFun& g, const Limits& limits = {});

/// The two encodings of labelled transition systems, P(C * X) and (P X)^C.
TValue pow_prod_to_exp_pow(const TValue& v, const FinSet& labels);
TValue exp_pow_to_pow_prod(const TValue& v, const FinSet& labels);

}  // namespace coalg
