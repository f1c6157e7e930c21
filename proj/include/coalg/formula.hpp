// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "coalg/functor.hpp"
#include "coalg/rational.hpp"

namespace coalg {

/// State formulas. `Next` wraps a one-step formula; the remaining non-boolean
/// operators are surface sugar removed by `elaborate`.
enum class FormulaOp : std::uint8_t {
    True, False, Not, And, Or, Implies, Next,
    Letter, Box, Diamond, LabelBox, LabelDiamond,
};

/// One-step formulas, sorted by the functor node they talk about.
enum class StepOp : std::uint8_t {
    Embed, True, False, Not, And, Or, Implies,
    Eq,                  // Const: "= c"
    Pi1, Pi2,            // Prod
    IsL, IsR, InL, InR,  // Coprod
    At,                  // Exp: "@c"
    Box, Diamond,        // Pow
    Prob,                // Dist: "Pr>=q"
    NBox,                // Nbhd: "[N]"
};

struct FormulaNode;
struct StepNode;
using Formula = std::shared_ptr<const FormulaNode>;
using Step = std::shared_ptr<const StepNode>;

struct FormulaNode {
    FormulaOp op = FormulaOp::True;
    std::string name;  // letter or label
    Formula lhs, rhs;
    Step step;
};

struct StepNode {
    StepOp op = StepOp::True;
    std::string symbol;  // constant or table key
    Rational threshold;
    Step lhs, rhs;
    Formula body;  // Embed
};

namespace fml {
Formula top();
Formula bottom();
Formula neg(Formula a);
Formula conj(Formula a, Formula b);
Formula disj(Formula a, Formula b);
Formula implies(Formula a, Formula b);
Formula next(Step s);
Formula letter(std::string name);
Formula box(Formula a);
Formula diamond(Formula a);
Formula label_box(std::string label, Formula a);
Formula label_diamond(std::string label, Formula a);
}  // namespace fml

namespace step {
Step embed(Formula f);
Step top();
Step bottom();
Step neg(Step a);
Step conj(Step a, Step b);
Step disj(Step a, Step b);
Step implies(Step a, Step b);
/// Conjunction / disjunction of a list; `true` / `false` when empty.
Step conj_all(const std::vector<Step>& parts);
Step disj_all(const std::vector<Step>& parts);
Step eq(std::string c);
Step pi1(Step a);
Step pi2(Step a);
Step isl();
Step isr();
Step inl(Step a);
Step inr(Step a);
Step at(std::string key, Step a);
Step box(Step a);
Step diamond(Step a);
Step prob(Rational q, Step a);
Step nbox(Step a);
}  // namespace step

/// Grammar: `true | false | ~f | f & f | f | f | f -> f | O s` plus sugar
/// `[]f`, `<>f`, `[a]f`, `<a>f` and letters; one-step layer
/// `{f} | = c | pi1 s | pi2 s | isl | isr | inl.s | inr.s | @c s | []s | <>s |
/// Pr>=n/m s | [N]s` with the same boolean connectives. Precedence
/// `~ > & > | > ->`, `->` associates to the right. A bare letter inside the
/// one-step layer abbreviates `{letter}`.
Formula parse_formula(std::string_view text);

/// Fully parenthesised canonical text; parses back to an equal tree.
std::string to_string(const Formula& f);
std::string to_string(const Step& s);

bool equal(const Formula& a, const Formula& b);
bool equal(const Step& a, const Step& b);

/// Number of AST nodes (both layers).
std::size_t formula_size(const Formula& f);
/// Nesting depth of `O`; boxes and diamonds count one, letters zero (they
/// only read the label of the current state).
std::size_t modal_depth(const Formula& f);

/// Removes sugar and checks every one-step subterm against the functor node
/// it addresses, inserting projections where a Prod node has exactly one
/// component that can accept an operator. Throws SortError with a path.
/// Reuses results for shared subtrees, so repeated calls on formulas built
/// from common pieces stay cheap.
class Elaborator {
public:
    explicit Elaborator(Functor functor);
    Formula operator()(const Formula& f);
    const Functor& functor() const noexcept { return functor_; }

private:
    Formula formula(const Formula& f, const std::string& path);
    Step one_step(const Step& s, const Functor& sort, const std::string& path);
    Step infer(const Step& s, const Functor& sort, const std::string& path);

    Functor functor_;
    std::vector<std::string> letters_;
    bool has_letters_ = false;
    std::map<const FormulaNode*, std::pair<Formula, Formula>> memo_;
};

Formula elaborate(const Formula& f, const Functor& functor);

/// Proposition letters of a formula, sorted.
std::vector<std::string> letters_of(const Formula& f);

}  // namespace coalg
