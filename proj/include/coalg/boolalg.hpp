// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "coalg/finset.hpp"
#include "coalg/limits.hpp"

namespace coalg {

/// An element of a finite Boolean algebra: the set of atoms below it.
using Element = boost::dynamic_bitset<>;

/// A finite Boolean algebra, represented by its atoms.
class FinBA {
public:
    FinBA() = default;
    explicit FinBA(FinSet atoms) : atoms_(std::move(atoms)) {}
    /// The two-element algebra.
    static FinBA two() { return FinBA(FinSet{"1"}); }

    const FinSet& atoms() const noexcept { return atoms_; }
    std::size_t num_atoms() const noexcept { return atoms_.size(); }
    /// Number of elements, saturating.
    std::uint64_t size() const { return sat::pow2(atoms_.size()); }

    Element bottom() const { return Element(atoms_.size()); }
    Element top() const { return ~bottom(); }
    Element atom(std::size_t i) const;
    Element element(const std::vector<std::string>& atom_names) const;
    /// Element with index bits `code` (only for fewer than 64 atoms).
    Element from_code(std::uint64_t code) const;
    static std::uint64_t code(const Element& e);
    bool leq(const Element& a, const Element& b) const { return a.is_subset_of(b); }
    bool is_atom(const Element& e) const { return e.count() == 1; }

    /// Every element in code order; throws CapExceeded above the cardinality cap.
    std::vector<Element> elements(const Limits& limits = {}) const;

    /// "{a,b}" listing the atoms below e.
    std::string name(const Element& e) const;

    friend bool operator==(const FinBA&, const FinBA&) = default;

private:
    FinSet atoms_;
};

/// A Boolean algebra morphism h: A -> B, stored dually as the function
/// atoms(B) -> atoms(A) sending each target atom b to the source atom a with
/// b <= h(a).
class BAHom {
public:
    BAHom() = default;
    BAHom(FinBA source, FinBA target, std::vector<std::size_t> dual);
    /// Recovers the morphism from an arbitrary element map, checking that it
    /// preserves the Boolean operations on every element (small algebras).
    static std::optional<BAHom> from_map(const FinBA& source, const FinBA& target,
                                         const std::function<Element(const Element&)>& map, const Limits& limits = {});
    static BAHom identity(const FinBA& a);

    const FinBA& source() const noexcept { return source_; }
    const FinBA& target() const noexcept { return target_; }
    const std::vector<std::size_t>& dual() const noexcept { return dual_; }

    Element operator()(const Element& a) const;
    /// (g after h) for h = *this.
    BAHom then(const BAHom& g) const;
    bool injective() const;   // dual map surjective
    bool surjective() const;  // dual map injective
    bool iso() const { return injective() && surjective(); }

    friend bool operator==(const BAHom&, const BAHom&) = default;

private:
    FinBA source_;
    FinBA target_;
    std::vector<std::size_t> dual_;
};

/// Every morphism A -> B, enumerated through the dual functions.
std::vector<BAHom> hom_set(const FinBA& a, const FinBA& b, const Limits& limits = {});

// ---------------------------------------------------------------------------
// Terms and presentations

struct BTermNode;
using BTerm = std::shared_ptr<const BTermNode>;

struct BTermNode {
    enum class Op : std::uint8_t { Bot, Top, Not, And, Or, Gen } op = Op::Bot;
    std::string name;
    BTerm lhs, rhs;
};

namespace bterm {
BTerm bot();
BTerm top();
BTerm gen(std::string name);
BTerm neg(BTerm a);
BTerm conj(BTerm a, BTerm b);
BTerm disj(BTerm a, BTerm b);
BTerm conj_all(const std::vector<BTerm>& parts);
}  // namespace bterm

/// `bot | top | ~t | t & t | t | t | g` with precedence ~ > & > |.
BTerm parse_bterm(std::string_view text);
std::string to_string(const BTerm& t);
void collect_generators(const BTerm& t, std::vector<std::string>& out);

struct Presentation {
    FinSet generators;
    std::vector<std::pair<BTerm, BTerm>> relations;
};

/// The algebra presented by generators and relations: its atoms are the
/// assignments G -> 2 satisfying every relation, named "v" followed by one bit
/// per generator in generator order.
struct RealizedBA {
    Presentation presentation;
    FinBA algebra;
    /// Interpretation of each generator.
    std::map<std::string, Element> generator;
    /// Assignment bits of each atom, one per generator.
    std::vector<std::uint64_t> assignment;
    std::map<std::uint64_t, std::size_t> atom_index;

    Element eval(const BTerm& t) const;
    /// Index of the atom for an assignment, if it satisfies the relations.
    std::optional<std::size_t> atom_of(std::uint64_t assignment_bits) const;
};

RealizedBA realize(const Presentation& p, const Limits& limits = {});

// ---------------------------------------------------------------------------
// Finite Stone duality

/// Points of A, once as atoms and once as morphisms A -> 2, with
/// homs[i] the point of atom i.
struct StoneSpace {
    FinSet points;
    std::vector<BAHom> homs;
};

StoneSpace stone_S(const FinBA& a, const Limits& limits = {});
FinBA stone_P(const FinSet& x);
/// P on maps: f^-1 as a morphism P Y -> P X.
BAHom stone_P(const FinFun& f);
/// S on maps: h: A -> B gives S B -> S A, p |-> p . h.
FinFun stone_S(const BAHom& h, const Limits& limits = {});

/// a |-> { p in S A | p(a) = 1 }, computed by evaluating every point.
BAHom hat_map(const FinBA& a, const Limits& limits = {});

struct DualityIsos {
    BAHom rho;     // A -> P S A
    FinFun sigma;  // X -> S P X, x |-> evaluation at x
    bool rho_iso = false;
    bool sigma_bijective = false;
    bool ok() const noexcept { return rho_iso && sigma_bijective; }
};
DualityIsos duality_isos(const FinBA& a, const FinSet& x, const Limits& limits = {});

struct BACoproduct {
    FinBA sum;  // atoms "(a,b)"
    BAHom inl;
    BAHom inr;
    /// left_atom[k], right_atom[k]: components of atom k.
    std::vector<std::size_t> left_atom, right_atom;
};
BACoproduct coproduct(const FinBA& a, const FinBA& b, const Limits& limits = {});

// ---------------------------------------------------------------------------
// Modal algebras

/// A Boolean algebra with an operator preserving top and binary meets. Any such
/// operator is determined by its values on coatoms, which is how it is stored.
class ModalAlgebra {
public:
    ModalAlgebra() = default;
    /// coatom_box[i] = box(not atom_i).
    ModalAlgebra(FinBA base, std::vector<Element> coatom_box);
    /// Validates an arbitrary element map against box(top) = top and
    /// box(a & b) = box(a) & box(b) on every element; throws Error otherwise.
    static ModalAlgebra from_map(const FinBA& base, const std::function<Element(const Element&)>& box,
                                 const Limits& limits = {});

    const FinBA& base() const noexcept { return base_; }
    Element box(const Element& a) const;
    Element diamond(const Element& a) const { return ~box(~a); }

private:
    FinBA base_;
    std::vector<Element> coatom_box_;
};

/// Whether h commutes with the boxes, checked on every element of the source.
bool is_modal_hom(const BAHom& h, const ModalAlgebra& source, const ModalAlgebra& target, const Limits& limits = {});

}  // namespace coalg
