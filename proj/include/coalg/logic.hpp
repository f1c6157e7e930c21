// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "coalg/coalgebra.hpp"
#include "coalg/formula.hpp"
#include "coalg/functor.hpp"
#include "coalg/limits.hpp"

namespace coalg {

/// A subset of a finite carrier, indexed like the carrier.
using StateSet = boost::dynamic_bitset<>;

/// Names of the members of a state set.
std::vector<std::string> members(const StateSet& s, const FinSet& carrier);
StateSet state_set(const FinSet& carrier, const std::vector<std::string>& names);

/// Interpretation of the embedded formulas of a one-step formula: the truth
/// of `{body}` at carrier element `state`.
using EmbedFn = std::function<bool(const Formula& body, std::size_t state)>;

/// Decides one-step formulas on elements of T X. Neighbourhood boxes need the
/// whole of F X and cache per formula node.
class OneStepSemantics {
public:
    OneStepSemantics(FinSet carrier, EmbedFn embedded, Limits limits = {});

    bool operator()(const Step& alpha, const TValue& t, const Functor& sort) const;

    /// States x with `alpha` true of the Id-sorted value x.
    const StateSet& at_id(const Step& alpha) const;

    const FinSet& carrier() const noexcept { return carrier_; }

    /// Precomputes member sets for the P(Id) positions of `t`, which must
    /// outlive this object.
    void pin(const TValue& t, const Functor& sort) const;

private:
    bool holds(const Step& alpha, const TValue& t, const Functor& sort) const;
    const TValue& truth_set(const Step& alpha, const Functor& inner) const;
    const StateSet& members_of(const TValue& set) const;

    FinSet carrier_;
    EmbedFn embedded_;
    Limits limits_;
    mutable std::unordered_map<const StepNode*, std::pair<Step, StateSet>> id_cache_;
    mutable std::map<std::pair<const StepNode*, const void*>, std::pair<Step, TValue>> nbhd_cache_;
    mutable std::map<const void*, std::vector<TValue>> values_;
    mutable std::unordered_map<const TValue*, StateSet> member_cache_;
    mutable StateSet scratch_;
};

/// One-shot version of OneStepSemantics.
bool holds(const Step& alpha, const TValue& t, const Functor& sort, const FinSet& carrier, const EmbedFn& embedded,
           const Limits& limits = {});

/// Model checker for one coalgebra. Results are cached per formula node, so
/// families of formulas with shared subterms are checked in time linear in
/// the number of distinct nodes.
class Evaluator {
public:
    explicit Evaluator(Coalgebra c, const Limits& limits = {});
    Evaluator(const Evaluator&) = delete;
    Evaluator& operator=(const Evaluator&) = delete;

    /// Extension of a formula; sugar is elaborated first.
    StateSet operator()(const Formula& f);
    /// Extension of an already elaborated formula.
    const StateSet& extension(const Formula& elaborated);
    bool holds_at(const Formula& f, const std::string& state);

    const Coalgebra& coalgebra() const noexcept { return c_; }
    Elaborator& elaborator() noexcept { return elab_; }

private:
    Coalgebra c_;
    Limits limits_;
    Elaborator elab_;
    OneStepSemantics sem_;
    std::unordered_map<const FormulaNode*, std::pair<Formula, StateSet>> memo_;
};

StateSet eval(const Formula& f, const Coalgebra& c, const Limits& limits = {});

/// The elements of T X satisfying α when every embedded formula denotes
/// `pred`, in apply_on_set order.
std::vector<TValue> lifting_extension(const Step& alpha, const Functor& t, const FinSet& x, const StateSet& pred,
                                      const Limits& limits = {});

struct NaturalityReport {
    bool holds = true;
    std::size_t predicates_checked = 0;
    /// First predicate on the codomain for which the square fails, and an
    /// element of T X on which the two sides differ.
    std::optional<std::vector<std::string>> failing_predicate;
    std::optional<TValue> witness;
    explicit operator bool() const noexcept { return holds; }
};

/// For every P ⊆ Y: (T f)^-1 [α]_Y(P) = [α]_X(f^-1 P), compared on all of T X.
/// Every embedded formula of α is read as the hole P.
NaturalityReport check_naturality(const Step& alpha, const Functor& t, const FinFun& f, const Limits& limits = {});

/// A one-step formula true of t and false of every other element of T Q,
/// where member i of the carrier Q is characterised by `chars[i]`.
Step char_one_step(const TValue& t, const Functor& sort, const FinSet& quotient, const std::vector<Formula>& chars,
                   const Limits& limits = {});

struct Distinction {
    /// Absent when the two states are behaviourally equivalent.
    std::optional<Formula> formula;
    std::size_t rounds = 0;  // refinement rounds of the coalgebra
};

/// A formula true at x and false at y, of modal depth at most the number of
/// refinement rounds; built from characteristic formulas of trace blocks.
Distinction distinguishing_formula(const Coalgebra& c, const std::string& x, const std::string& y,
                                   const Limits& limits = {});

/// As above with a precomputed refinement trace (shared across many pairs).
class Distinguisher {
public:
    Distinguisher(const Coalgebra& c, const Limits& limits = {});
    std::optional<Formula> operator()(std::size_t x, std::size_t y) const;
    const Refinement& refinement() const noexcept { return ref_; }
    /// Characteristic formula of the block of x in trace level `level`.
    const Formula& characteristic(std::size_t level, std::size_t x) const;

private:
    Refinement ref_;
    std::vector<std::vector<Formula>> chars_;  // per level, per block
};

}  // namespace coalg
