// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "coalg/coalgebra.hpp"
#include "coalg/formula.hpp"
#include "coalg/functor.hpp"

/// Random and exhaustive generators used by the test suites and `selftest`.
namespace coalg::gen {

using Rng = std::mt19937_64;

struct NamedFunctor {
    std::string name;
    Functor functor;
};

/// One representative per classic system type: deterministic outputs,
/// partial outputs, automata, labelled transition systems in both
/// encodings, probabilistic systems and neighbourhood frames; plus plain
/// P(Id), D(Id) and a Kripke functor.
std::vector<NamedFunctor> system_functors();

/// The one-step modal operators of each primitive functor, each with the
/// hole {true} standing for an arbitrary predicate.
struct NamedLifting {
    std::string name;
    Functor functor;
    Step step;
};
std::vector<NamedLifting> primitive_liftings();

/// A uniformly-ish random element of `t` over `x`; distribution weights are
/// multiples of 1/denominator.
TValue random_value(const Functor& t, const FinSet& x, Rng& rng, std::int64_t denominator);

/// A random w with T g (w) = v, for g: X -> Y surjective.
TValue random_lift(const Functor& t, const TValue& v, const FinFun& g, Rng& rng, std::int64_t denominator);

Coalgebra random_coalgebra(const Functor& t, std::size_t states, Rng& rng, std::int64_t denominator,
                           const std::string& prefix = "s");

/// A coalgebra `source` with a surjective morphism onto a random `target`.
struct MorphismSample {
    Coalgebra source;
    Coalgebra target;
    FinFun morphism;
};
MorphismSample random_morphism(const Functor& t, std::size_t source_states, std::size_t target_states, Rng& rng,
                               std::int64_t denominator);

/// A random coalgebra or, with probability 1/2, one having nontrivial
/// behavioural equivalences (a lift of a smaller coalgebra).
Coalgebra random_mixed_coalgebra(const Functor& t, std::size_t states, Rng& rng, std::int64_t denominator);

/// Random well-sorted formula of modal depth <= depth over t.
Formula random_formula(const Functor& t, std::size_t depth, Rng& rng);
Step random_step(const Functor& t, const Functor& sort, std::size_t depth, Rng& rng);

/// Basic modal formulas with connectives ~, &, |, ->, constants, letters and
/// the sugar boxes/diamonds.
struct KSyntax {
    std::vector<std::string> letters;
    bool constants = true;   // true, false
    bool diamonds = true;    // <> besides []
    bool implications = true;
};

/// Every formula of exactly `size` AST nodes and modal depth <= max_depth, as a
/// table indexed [size][depth]. Subformulas are shared between entries.
/// Sizes count every connective, letter and constant as one node.
class KEnumerator {
public:
    KEnumerator(KSyntax syntax, std::size_t max_size, std::size_t max_depth);
    const std::vector<Formula>& formulas(std::size_t size, std::size_t depth) const { return table_.at(size).at(depth); }
    /// All formulas of size <= max_size, in size order.
    std::vector<Formula> all() const;
    std::size_t count() const;

private:
    KSyntax syntax_;
    std::size_t max_size_;
    std::size_t max_depth_;
    std::vector<std::vector<std::vector<Formula>>> table_;
};

/// A random K formula with exactly `size` nodes (if possible) and depth <= max_depth.
Formula random_k_formula(const KSyntax& syntax, std::size_t size, std::size_t max_depth, Rng& rng);

}  // namespace coalg::gen
