// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "coalg/boolalg.hpp"
#include "coalg/coalgebra.hpp"
#include "coalg/formula.hpp"
#include "coalg/functor.hpp"
#include "coalg/limits.hpp"

namespace coalg {

// ---------------------------------------------------------------------------
// Rank-1 axiomatisations

struct MTermNode;
using MTerm = std::shared_ptr<const MTermNode>;

/// Terms over variables, the Boolean operations and modal operators.
struct MTermNode {
    enum class Op : std::uint8_t { Var, Bot, Top, Not, And, Or, Apply } op = Op::Var;
    std::string name;  // variable or operator
    std::vector<MTerm> args;
};

/// `[]t` abbreviates `box(t)`; `name(t, ...)` applies a declared operator.
MTerm parse_mterm(std::string_view text, const std::map<std::string, std::size_t>& signature);
std::string to_string(const MTerm& t);

/// Empty when t is a Boolean combination of operators applied to purely
/// Boolean terms over variables; otherwise a description of the violation.
std::optional<std::string> rank1_violation(const MTerm& t);

/// A signature of modal operators with rank-1 equations.
struct LFunctor {
    std::map<std::string, std::size_t> signature;
    std::vector<std::pair<MTerm, MTerm>> equations;

    /// Parses "lhs = rhs" equations and rejects any that are not rank 1.
    static LFunctor parse(std::map<std::string, std::size_t> signature, const std::vector<std::string>& equations);
    /// box(top) = top and box(a & b) = box(a) & box(b).
    static LFunctor K();
};

// ---------------------------------------------------------------------------
// The dual functor L

/// L A presented by generators op(a1..ak) for elements ai of A and every
/// substitution instance of the equations.
struct LPresented {
    FinBA base;
    LFunctor functor;
    RealizedBA realized;
    /// Generator index of each operator application, keyed by operator and
    /// argument element codes.
    std::map<std::pair<std::string, std::vector<std::uint64_t>>, std::size_t> generator_index;
    /// The reverse: operator and argument codes of each generator.
    std::vector<std::pair<std::string, std::vector<std::uint64_t>>> generator_args;

    const FinBA& algebra() const noexcept { return realized.algebra; }
    Element apply(const std::string& op, const std::vector<Element>& args) const;
    Element box(const Element& a) const { return apply("box", {a}); }
};

LPresented L_presented(const FinBA& a, const LFunctor& functor = LFunctor::K(), const Limits& limits = {});

/// L A described by its atoms, the principal filters: atom j is the filter of
/// element generator[j] and box(b) holds at atom j iff generator[j] <= b.
/// Usable where A is too large to present.
struct LFilters {
    FinBA base;
    FinBA algebra;
    std::vector<Element> generator;

    Element box(const Element& b) const;
};

LFilters L_filters(const FinBA& a, const Limits& limits = {});

struct LViaDuality {
    FinBA algebra;              // P(T S A), atoms named by their T-values
    std::vector<TValue> values;  // T S A in atom order
    /// For T = P(Id): the iso L_presented(A) -> P(T S A).
    std::optional<BAHom> iso;
};

LViaDuality L_via_duality(const FinBA& a, const Functor& t, const Limits& limits = {});

/// The iso L_presented(A) -> P(P(S A)) sending box(a) to { Z | Z <= a }.
/// Throws Error when the presented algebra does not have the expected atoms.
BAHom filter_iso(const LPresented& l, const LViaDuality& pts);

struct Delta {
    FinSet x;
    LPresented lpx;
    LViaDuality ptx;
    BAHom iso;  // L P X -> P T X
};

/// delta_X for T = P(Id).
Delta delta(const FinSet& x, const Limits& limits = {});

struct DeltaNaturality {
    bool holds = false;
    /// An element Z of T X where the two composites disagree.
    std::optional<std::string> witness;
};

/// delta_X . L(P f) = P(T f) . delta_Y as morphisms L P Y -> P T X.
DeltaNaturality check_delta_naturality(const FinFun& f, const Limits& limits = {});
/// delta sends every generator box(a) to { Z | Z <= a } and is an iso.
bool check_delta_generators(const Delta& d);

// ---------------------------------------------------------------------------
// Dual algebras

struct DualAlgebra {
    ModalAlgebra algebra;  // base P(carrier)
    std::map<std::string, Element> letters;
};

/// For P(Id) and Kripke-shaped coalgebras: box(Y) = { x | successors of x within Y }.
DualAlgebra dual_algebra(const Coalgebra& c);

/// f^-1 : P Y -> P X as a modal-algebra morphism check between dual algebras.
bool is_dual_morphism(const FinFun& f, const DualAlgebra& source, const DualAlgebra& target,
                      const Limits& limits = {});

// ---------------------------------------------------------------------------
// Lindenbaum algebras

/// The levels A_0 ... A_n of the initial sequence for K with proposition
/// letters: A_0 is free on the letters and A_{m+1} = A_0 + L(A_m). An atom of
/// A_{m+1} is a pair (valuation, element of A_m). Immutable once built.
class LindenbaumTower {
public:
    /// With `pow_only`, formulas are read over P(Id) (no letters allowed).
    LindenbaumTower(std::vector<std::string> letters, std::size_t depth, const Limits& limits = {},
                    bool pow_only = false);

    std::size_t depth() const noexcept { return levels_.size() - 1; }
    const std::vector<std::string>& letters() const noexcept { return letters_; }
    bool pow_only() const noexcept { return pow_only_; }
    /// The functor formulas are elaborated against.
    const Functor& functor() const noexcept { return functor_; }

    const FinBA& algebra(std::size_t n) const { return levels_.at(n).algebra; }
    /// Valuation index (an atom of A_0) of an atom of A_n.
    std::size_t valuation(std::size_t n, std::size_t atom) const;
    /// Successor element in A_{n-1} of an atom of A_n, n >= 1.
    const Element& successors(std::size_t n, std::size_t atom) const;
    std::optional<std::size_t> atom_of(std::size_t n, std::size_t valuation, const Element& successors) const;
    /// Valuation symbol of an atom of A_0.
    const std::string& valuation_name(std::size_t v) const { return valuation_names_.at(v); }

    Element letter(std::size_t n, const std::string& name) const;
    /// box(e) in A_n for e in A_{n-1}.
    Element box(std::size_t n, const Element& e) const;
    /// The inclusion A_n -> A_{n+1}.
    BAHom embedding(std::size_t n) const;

    /// The tree of an atom, named as in tree_model.
    std::string tree_name(std::size_t n, std::size_t atom) const;
    /// The atom as a coalgebra over functor() rooted at tree_name.
    Coalgebra tree(std::size_t n, std::size_t atom) const;
    std::size_t tree_size(std::size_t n, std::size_t atom) const;

private:
    struct Level {
        FinBA algebra;
        std::vector<std::size_t> valuation;
        std::vector<Element> successors;
        std::map<std::pair<std::size_t, Element>, std::size_t> index;
        std::vector<std::string> tree_names;
        std::vector<std::size_t> tree_sizes;
    };
    std::vector<std::string> letters_;
    bool pow_only_;
    Functor functor_;
    std::vector<std::string> valuation_names_;
    std::vector<Level> levels_;
};

/// Depth counting only boxes and diamonds; letters have depth 0.
std::size_t k_depth(const Formula& f, const Functor& functor);

/// Sends formulas to elements of the tower levels. Memoised, so each thread
/// should use its own instance.
class LevelMap {
public:
    explicit LevelMap(const LindenbaumTower& tower);
    /// The element of A_n denoted by φ; requires k_depth(φ) <= n.
    Element operator()(const Formula& f, std::size_t n);
    /// Same for an already elaborated formula.
    Element elaborated(const Formula& f, std::size_t n);

private:
    enum class Sort : std::uint8_t { Kripke, Const, Pow, Id };
    Element step(const Step& s, Sort sort, std::size_t n);
    Element lift_valuations(const Element& vals, std::size_t n) const;

    const LindenbaumTower& tower_;
    Elaborator elab_;
    std::map<std::pair<const FormulaNode*, std::size_t>, Element> fmemo_;
    std::map<std::tuple<const StepNode*, int, std::size_t>, Element> smemo_;
    std::vector<Formula> keep_;
};

/// p, q, r, ... then p1, q1, ...
std::vector<std::string> default_letters(std::size_t k);

struct KValidity {
    bool valid = false;
    std::size_t depth = 0;
    std::vector<std::string> letters;
    /// For invalid formulas: the smallest tree model refuting φ at `state`.
    std::optional<Coalgebra> countermodel;
    std::string state;
    bool countermodel_checked = false;
};

/// Validity in K over the first k default letters plus those of φ.
KValidity kvalid(const Formula& f, std::size_t k, const Limits& limits = {});

struct TheoryReport {
    std::size_t states = 0;
    std::size_t atoms = 0;
    bool bijective = false;
    /// theory[i]: atom of A_n induced by tree_model state i.
    std::vector<std::size_t> theory;
    /// Characteristic formulas map to their atoms and hold at exactly one state.
    bool characteristic_ok = false;
};

/// Depth-n theories of tree_model(n) states versus atoms of A_n.
TheoryReport check_theories(const LindenbaumTower& tower, const Limits& limits = {});
/// A depth-n formula true exactly at atom `atom` of A_n.
Formula characteristic_formula(const LindenbaumTower& tower, std::size_t n, std::size_t atom);

struct PresentFunReport {
    bool iso = false;
    std::size_t homs = 0;
    std::size_t meet_maps = 0;
    bool bijection = false;
    bool ok() const noexcept { return iso && bijection && homs == meet_maps; }
};

/// Meet-preserving maps A -> A (keeping top), found by backtracking search.
std::vector<std::vector<Element>> meet_preserving_self_maps(const FinBA& a, const Limits& limits = {});
PresentFunReport check_present_fun(const FinBA& a, const Limits& limits = {});

}  // namespace coalg
