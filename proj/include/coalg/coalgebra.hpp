// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coalg/finset.hpp"
#include "coalg/functor.hpp"
#include "coalg/limits.hpp"

namespace coalg {

/// A finite T-coalgebra: a carrier with a structure map into T of the carrier.
class Coalgebra {
public:
    Coalgebra() = default;
    /// `structure[i]` is the successor structure of `carrier[i]`; every value
    /// is shape-checked against the functor.
    Coalgebra(Functor functor, FinSet carrier, std::vector<TValue> structure);
    static Coalgebra from_map(Functor functor, FinSet carrier, const std::map<std::string, TValue>& structure);

    const Functor& functor() const noexcept { return functor_; }
    const FinSet& carrier() const noexcept { return carrier_; }
    const std::vector<TValue>& structure() const noexcept { return structure_; }
    std::size_t size() const noexcept { return carrier_.size(); }

    const TValue& at(std::size_t i) const { return structure_.at(i); }
    const TValue& at(const std::string& state) const { return structure_.at(carrier_.index_of(state)); }

    /// lcm of all distribution weight denominators (1 if there are none).
    std::int64_t denominator_lcm() const;

    /// `limits` with the denominator filled in from the coalgebra when unset.
    Limits resolve(const Limits& limits) const;

    friend bool operator==(const Coalgebra&, const Coalgebra&) = default;

private:
    Functor functor_;
    FinSet carrier_;
    std::vector<TValue> structure_;
};

/// Equivalence classes of a carrier, ordered by their least element.
class Partition {
public:
    Partition() = default;
    /// `block_of[i]` is an arbitrary label for the class of element i; labels
    /// are renumbered canonically.
    Partition(FinSet carrier, const std::vector<std::size_t>& block_of);
    static Partition total(FinSet carrier);
    static Partition discrete(FinSet carrier);

    const FinSet& carrier() const noexcept { return carrier_; }
    const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }
    std::size_t num_blocks() const noexcept { return blocks_.size(); }
    std::size_t block_of(std::size_t i) const { return block_of_.at(i); }
    bool same_block(std::size_t a, std::size_t b) const { return block_of_.at(a) == block_of_.at(b); }

    /// Every block of *this lies inside a block of `coarser`.
    bool refines(const Partition& coarser) const;

    /// Names of the quotient elements: "q0", "q1", ... in block order.
    FinSet quotient_set() const;
    /// The quotient map carrier -> quotient_set().
    FinFun quotient_map() const;

    /// Block contents as element names.
    std::vector<std::vector<std::string>> named_blocks() const;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    FinSet carrier_;
    std::vector<std::vector<std::size_t>> blocks_;
    std::vector<std::size_t> block_of_;
};

/// Is f: src -> tgt a coalgebra morphism (T f . src = tgt . f)?
struct MorphismCheck {
    bool holds = true;
    /// A source state where the square fails.
    std::optional<std::string> witness;
    explicit operator bool() const noexcept { return holds; }
};

MorphismCheck is_morphism(const FinFun& f, const Coalgebra& src, const Coalgebra& tgt, const Limits& limits = {});

/// Result of partition refinement along the final sequence.
struct Refinement {
    /// trace[0] is the total partition; trace.back() == result is stable.
    std::vector<Partition> trace;
    Partition result;
    /// Number of refinement steps that changed the partition.
    std::size_t rounds() const noexcept { return trace.empty() ? 0 : trace.size() - 1; }
    /// First trace index at which states a and b are separated, if ever.
    std::optional<std::size_t> separation_level(std::size_t a, std::size_t b) const;
};

/// Behavioural equivalence: x ~{n+1} y iff T(q_n)(xi x) = T(q_n)(xi y), from
/// the total partition until stable.
Refinement behavioural_equivalence(const Coalgebra& c, const Limits& limits = {});

/// Disjoint union of two coalgebras over the same functor, with states
/// renamed "l:x" / "r:y".
struct CoproductCoalgebra {
    Coalgebra sum;
    FinFun inl;
    FinFun inr;
};
CoproductCoalgebra coproduct(const Coalgebra& a, const Coalgebra& b);

/// Testing oracle: the union of all congruences (partitions whose quotient map
/// is a coalgebra morphism), found by enumerating every partition.
Partition brute_force_equivalence(const Coalgebra& c, const Limits& limits = {});

/// Cross pairs (x in a, y in b) that are behaviourally equivalent, from the
/// brute-force oracle on the coproduct. Combined size is capped by
/// limits.brute_force_states.
std::vector<std::pair<std::string, std::string>> brute_force_bisimilarity(const Coalgebra& a, const Coalgebra& b,
                                                                        const Limits& limits = {});

struct Minimized {
    Coalgebra quotient;
    FinFun map;  // a coalgebra morphism onto the quotient
};
Minimized minimize(const Coalgebra& c, const Limits& limits = {});

/// Letter names encoded by a valuation symbol: "0" is the empty valuation,
/// otherwise letters are joined by '+'. Returns nullopt for symbols that are
/// not of this form.
std::optional<std::vector<std::string>> valuation_letters(const std::string& symbol);
std::string valuation_symbol(const std::vector<std::string>& letters);

/// The Kripke functor C{V} * P(Id) with V all valuations of `letters`.
Functor kripke_functor(const std::vector<std::string>& letters);
/// Whether t has the shape C{V} * P(Id).
bool is_kripke_shape(const Functor& t);
/// Letters of a Kripke functor whose constants are all valuation symbols.
std::optional<std::vector<std::string>> kripke_letters(const Functor& t);

/// Canonical model of depth-d behaviours for a Kripke-shaped functor: the
/// states are the extensional labelled trees of height <= d, with
/// xi(tree) = (label, children).
Coalgebra tree_model(const Functor& kripke, std::size_t depth, const Limits& limits = {});

/// The sub-coalgebra generated by a state (its reachable part), for functors
/// whose values mention finitely many states.
Coalgebra generated_subcoalgebra(const Coalgebra& c, const std::string& root);

/// States mentioned inside a value.
void collect_states(const TValue& v, std::vector<std::string>& out);

}  // namespace coalg
