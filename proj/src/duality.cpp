// SPDX-License-Identifier: Apache-2.0
#include "coalg/duality.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>

#include "coalg/error.hpp"
#include "coalg/logic.hpp"

namespace coalg {

// ---------------------------------------------------------------------------
// Rank-1 terms

namespace {

MTerm mk(MTermNode::Op op, std::string name = {}, std::vector<MTerm> args = {}) {
    auto n = std::make_shared<MTermNode>();
    n->op = op;
    n->name = std::move(name);
    n->args = std::move(args);
    return n;
}

class MTermParser {
public:
    MTermParser(std::string_view s, const std::map<std::string, std::size_t>& sig) : s_(s), sig_(sig) {}

    MTerm parse() {
        MTerm t = disjunction();
        skip();
        if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return t;
    }

private:
    std::string_view s_;
    const std::map<std::string, std::size_t>& sig_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
            if (s_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(what, line, col);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(std::string_view tok) {
        skip();
        if (s_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }
    MTerm disjunction() {
        MTerm t = conjunction();
        while (eat("|")) t = mk(MTermNode::Op::Or, {}, {t, conjunction()});
        return t;
    }
    MTerm conjunction() {
        MTerm t = unary();
        while (eat("&")) t = mk(MTermNode::Op::And, {}, {t, unary()});
        return t;
    }
    MTerm apply(const std::string& op, std::vector<MTerm> args) {
        auto it = sig_.find(op);
        if (it == sig_.end()) fail("operator \"" + op + "\" is not in the signature");
        if (it->second != args.size())
            fail("operator \"" + op + "\" takes " + std::to_string(it->second) + " arguments");
        return mk(MTermNode::Op::Apply, op, std::move(args));
    }
    MTerm unary() {
        if (eat("~")) return mk(MTermNode::Op::Not, {}, {unary()});
        if (eat("[]")) return apply("box", {unary()});
        if (eat("(")) {
            MTerm t = disjunction();
            if (!eat(")")) fail("expected ')'");
            return t;
        }
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        if (start == pos_) fail(pos_ < s_.size() ? "unexpected '" + std::string(1, s_[pos_]) + "'" : "unexpected end of term");
        std::string name(s_.substr(start, pos_ - start));
        if (eat("(")) {
            std::vector<MTerm> args;
            if (!eat(")")) {
                do args.push_back(disjunction());
                while (eat(","));
                if (!eat(")")) fail("expected ')'");
            }
            return apply(name, std::move(args));
        }
        if (name == "bot") return mk(MTermNode::Op::Bot);
        if (name == "top") return mk(MTermNode::Op::Top);
        return mk(MTermNode::Op::Var, std::move(name));
    }
};

bool purely_boolean(const MTerm& t) {
    if (t->op == MTermNode::Op::Apply) return false;
    return std::all_of(t->args.begin(), t->args.end(), purely_boolean);
}

void collect_vars(const MTerm& t, std::set<std::string>& out) {
    if (t->op == MTermNode::Op::Var) out.insert(t->name);
    for (const auto& a : t->args) collect_vars(a, out);
}

}  // namespace

MTerm parse_mterm(std::string_view text, const std::map<std::string, std::size_t>& signature) {
    return MTermParser(text, signature).parse();
}

std::string to_string(const MTerm& t) {
    using Op = MTermNode::Op;
    switch (t->op) {
        case Op::Var: return t->name;
        case Op::Bot: return "bot";
        case Op::Top: return "top";
        case Op::Not: return "~" + to_string(t->args[0]);
        case Op::And: return "(" + to_string(t->args[0]) + " & " + to_string(t->args[1]) + ")";
        case Op::Or: return "(" + to_string(t->args[0]) + " | " + to_string(t->args[1]) + ")";
        case Op::Apply: {
            if (t->name == "box" && t->args.size() == 1) return "[]" + to_string(t->args[0]);
            std::string s = t->name + "(";
            for (std::size_t i = 0; i < t->args.size(); ++i) s += (i ? ", " : "") + to_string(t->args[i]);
            return s + ")";
        }
    }
    return {};
}

std::optional<std::string> rank1_violation(const MTerm& t) {
    using Op = MTermNode::Op;
    switch (t->op) {
        case Op::Var: return "variable " + t->name + " occurs outside every modal operator";
        case Op::Bot:
        case Op::Top: return std::nullopt;
        case Op::Apply:
            for (const auto& a : t->args)
                if (!purely_boolean(a)) return "nested modal operator in " + to_string(t);
            return std::nullopt;
        default:
            for (const auto& a : t->args)
                if (auto v = rank1_violation(a)) return v;
            return std::nullopt;
    }
}

LFunctor LFunctor::parse(std::map<std::string, std::size_t> signature, const std::vector<std::string>& equations) {
    LFunctor f;
    f.signature = std::move(signature);
    for (const auto& eq : equations) {
        auto at = eq.find('=');
        if (at == std::string::npos || eq.find('=', at + 1) != std::string::npos)
            throw Error("equation \"" + eq + "\" needs exactly one '='");
        MTerm l = parse_mterm(std::string_view(eq).substr(0, at), f.signature);
        MTerm r = parse_mterm(std::string_view(eq).substr(at + 1), f.signature);
        for (const auto& side : {l, r})
            if (auto v = rank1_violation(side)) throw Error("equation \"" + eq + "\" is not rank 1: " + *v);
        f.equations.emplace_back(std::move(l), std::move(r));
    }
    return f;
}

LFunctor LFunctor::K() {
    static const LFunctor k = parse({{"box", 1}}, {"[]top = top", "[](a & b) = []a & []b"});
    return k;
}

// ---------------------------------------------------------------------------
// L presented

namespace {

std::string generator_name(const std::string& op, const FinBA& a, const std::vector<std::uint64_t>& codes) {
    std::string s = op + "(";
    for (std::size_t i = 0; i < codes.size(); ++i) s += (i ? ";" : "") + a.name(a.from_code(codes[i]));
    return s + ")";
}

Element eval_boolean(const MTerm& t, const std::map<std::string, Element>& env, const FinBA& a) {
    using Op = MTermNode::Op;
    switch (t->op) {
        case Op::Var: return env.at(t->name);
        case Op::Bot: return a.bottom();
        case Op::Top: return a.top();
        case Op::Not: return ~eval_boolean(t->args[0], env, a);
        case Op::And: return eval_boolean(t->args[0], env, a) & eval_boolean(t->args[1], env, a);
        case Op::Or: return eval_boolean(t->args[0], env, a) | eval_boolean(t->args[1], env, a);
        case Op::Apply: break;
    }
    throw Error("internal: operator inside a Boolean argument");
}

}  // namespace

Element LPresented::apply(const std::string& op, const std::vector<Element>& args) const {
    std::vector<std::uint64_t> codes;
    for (const auto& e : args) codes.push_back(FinBA::code(e));
    auto it = generator_index.find({op, codes});
    if (it == generator_index.end()) throw Error("no generator " + op + " for these arguments");
    return realized.generator.at(realized.presentation.generators[it->second]);
}

LPresented L_presented(const FinBA& a, const LFunctor& functor, const Limits& limits) {
    const std::uint64_t size = a.size();
    std::uint64_t gens = 0;
    for (const auto& [op, arity] : functor.signature) gens = sat::add(gens, sat::pow(size, arity));
    if (gens > limits.generators)
        throw CapExceeded("L needs " + (gens == UINT64_MAX ? std::string("too many") : std::to_string(gens)) +
                          " generators, cap is " + std::to_string(limits.generators));
    auto elems = a.elements(limits);

    // Generators: every operator applied to every tuple of elements.
    std::vector<std::pair<std::string, std::pair<std::string, std::vector<std::uint64_t>>>> named;
    for (const auto& [op, arity] : functor.signature) {
        std::vector<std::uint64_t> codes(arity, 0);
        for (;;) {
            named.push_back({generator_name(op, a, codes), {op, codes}});
            std::size_t k = 0;
            while (k < arity && ++codes[k] == size) codes[k++] = 0;
            if (k == arity) break;
        }
    }
    std::sort(named.begin(), named.end());
    LPresented out;
    out.base = a;
    out.functor = functor;
    std::vector<std::string> names;
    for (auto& [name, key] : named) {
        out.generator_index.emplace(key, names.size());
        out.generator_args.push_back(key);
        names.push_back(name);
    }
    Presentation p;
    p.generators = FinSet(names);

    // Relations: every substitution instance of every equation.
    auto translate = [&](const auto& self, const MTerm& t, const std::map<std::string, Element>& env) -> BTerm {
        using Op = MTermNode::Op;
        switch (t->op) {
            case Op::Bot: return bterm::bot();
            case Op::Top: return bterm::top();
            case Op::Not: return bterm::neg(self(self, t->args[0], env));
            case Op::And: return bterm::conj(self(self, t->args[0], env), self(self, t->args[1], env));
            case Op::Or: return bterm::disj(self(self, t->args[0], env), self(self, t->args[1], env));
            case Op::Apply: {
                std::vector<std::uint64_t> codes;
                for (const auto& arg : t->args) codes.push_back(FinBA::code(eval_boolean(arg, env, a)));
                return bterm::gen(p.generators[out.generator_index.at({t->name, codes})]);
            }
            case Op::Var: break;
        }
        throw Error("internal: equation is not rank 1");
    };
    for (const auto& [lhs, rhs] : functor.equations) {
        std::set<std::string> vs;
        collect_vars(lhs, vs);
        collect_vars(rhs, vs);
        std::vector<std::string> vars(vs.begin(), vs.end());
        limits.require(sat::pow(size, vars.size()), "substitution instances of an equation");
        std::vector<std::size_t> pick(vars.size(), 0);
        for (;;) {
            limits.poll();
            std::map<std::string, Element> env;
            for (std::size_t i = 0; i < vars.size(); ++i) env.emplace(vars[i], elems[pick[i]]);
            p.relations.emplace_back(translate(translate, lhs, env), translate(translate, rhs, env));
            std::size_t k = 0;
            while (k < pick.size() && ++pick[k] == elems.size()) pick[k++] = 0;
            if (k == pick.size()) break;
        }
    }
    out.realized = realize(p, limits);
    return out;
}

LFilters L_filters(const FinBA& a, const Limits& limits) {
    auto elems = a.elements(limits);
    std::vector<std::pair<std::string, std::size_t>> named;
    for (std::size_t i = 0; i < elems.size(); ++i) named.emplace_back(a.name(elems[i]), i);
    std::sort(named.begin(), named.end());
    LFilters l;
    l.base = a;
    std::vector<std::string> names;
    for (auto& [n, i] : named) {
        names.push_back(n);
        l.generator.push_back(elems[i]);
    }
    l.algebra = FinBA(FinSet(std::move(names)));
    return l;
}

Element LFilters::box(const Element& b) const {
    Element out(generator.size());
    for (std::size_t j = 0; j < generator.size(); ++j)
        if (generator[j].is_subset_of(b)) out.set(j);
    return out;
}

LViaDuality L_via_duality(const FinBA& a, const Functor& t, const Limits& limits) {
    StoneSpace s = stone_S(a, limits);
    auto values = apply_on_set(t, s.points, limits);
    std::vector<std::pair<std::string, TValue>> named;
    for (auto& v : values) named.emplace_back(v.to_string(), v);
    std::sort(named.begin(), named.end());
    LViaDuality out;
    std::vector<std::string> names;
    for (auto& [n, v] : named) {
        names.push_back(n);
        out.values.push_back(v);
    }
    out.algebra = FinBA(FinSet(std::move(names)));
    if (t == Functor::powerset(Functor::id()) && a.size() <= limits.generators)
        out.iso = filter_iso(L_presented(a, LFunctor::K(), limits), out);
    return out;
}

BAHom filter_iso(const LPresented& l, const LViaDuality& pts) {
    const FinBA& a = l.base;
    std::vector<std::size_t> dual;
    for (const auto& z : pts.values) {
        if (z.kind() != TValue::Kind::Set) throw Error("filter iso needs subsets of the points");
        std::vector<std::string> names;
        for (const auto& s : z.items()) names.push_back(s.symbol());
        Element ze = a.element(names);
        // The atom of L A where box(b) holds iso Z <= b.
        std::uint64_t bits = 0;
        for (std::size_t g = 0; g < l.generator_args.size(); ++g) {
            const auto& [op, codes] = l.generator_args[g];
            if (op != "box" || codes.size() != 1) throw Error("filter iso needs the signature of K");
            if (ze.is_subset_of(a.from_code(codes[0]))) bits |= std::uint64_t{1} << g;
        }
        auto atom = l.realized.atom_of(bits);
        if (!atom) throw Error("the filter of " + z.to_string() + " is not an atom of L A");
        dual.push_back(*atom);
    }
    BAHom h(l.algebra(), pts.algebra, std::move(dual));
    if (!h.iso()) throw Error("filters do not match the atoms of L A");
    return h;
}

Delta delta(const FinSet& x, const Limits& limits) {
    FinBA px = stone_P(x);
    Delta d{x, L_presented(px, LFunctor::K(), limits), {}, {}};
    Limits no_iso = limits;
    no_iso.generators = 0;
    d.ptx = L_via_duality(px, Functor::powerset(Functor::id()), no_iso);
    d.iso = filter_iso(d.lpx, d.ptx);
#ifdef COALG_FAULT_DELTA
    if (d.iso.dual().size() >= 2) {
        auto swapped = d.iso.dual();
        std::swap(swapped[0], swapped[1]);
        d.iso = BAHom(d.iso.source(), d.iso.target(), std::move(swapped));
    }
#endif
    return d;
}

bool check_delta_generators(const Delta& d) {
    if (!d.iso.iso()) return false;
    const FinBA& px = d.lpx.base;
    for (const auto& a : px.elements()) {
        Element expect(d.ptx.values.size());
        for (std::size_t j = 0; j < d.ptx.values.size(); ++j) {
            std::vector<std::string> names;
            for (const auto& s : d.ptx.values[j].items()) names.push_back(s.symbol());
            if (px.element(names).is_subset_of(a)) expect.set(j);
        }
        if (d.iso(d.lpx.box(a)) != expect) return false;
    }
    return true;
}

DeltaNaturality check_delta_naturality(const FinFun& f, const Limits& limits) {
    Delta dx = delta(f.dom(), limits);
    Delta dy = delta(f.cod(), limits);
    BAHom pf = stone_P(f);  // P Y -> P X

    // L(P f): L P Y -> L P X, dually h |-> h . L(P f) on generators.
    std::vector<std::size_t> lpf_dual;
    for (std::size_t i = 0; i < dx.lpx.algebra().num_atoms(); ++i) {
        std::uint64_t hx = dx.lpx.realized.assignment[i];
        std::uint64_t hy = 0;
        for (std::size_t g = 0; g < dy.lpx.generator_args.size(); ++g) {
            Element b = dy.lpx.base.from_code(dy.lpx.generator_args[g].second[0]);
            std::size_t gx = dx.lpx.generator_index.at({"box", {FinBA::code(pf(b))}});
            if (hx >> gx & 1) hy |= std::uint64_t{1} << g;
        }
        auto atom = dy.lpx.realized.atom_of(hy);
        if (!atom) return {false, std::string("L(P f) is not a morphism")};
        lpf_dual.push_back(*atom);
    }
    BAHom lpf(dy.lpx.algebra(), dx.lpx.algebra(), std::move(lpf_dual));

    // P(T f): P T Y -> P T X, dually T f.
    FunctorAction tf(Functor::powerset(Functor::id()), f, limits);
    std::map<TValue, std::size_t> ty;
    for (std::size_t j = 0; j < dy.ptx.values.size(); ++j) ty.emplace(dy.ptx.values[j], j);
    std::vector<std::size_t> ptf_dual;
    for (const auto& z : dx.ptx.values) ptf_dual.push_back(ty.at(tf(z)));
    BAHom ptf(dy.ptx.algebra, dx.ptx.algebra, std::move(ptf_dual));

    BAHom lhs = lpf.then(dx.iso);
    BAHom rhs = dy.iso.then(ptf);
    for (std::size_t j = 0; j < lhs.dual().size(); ++j)
        if (lhs.dual()[j] != rhs.dual()[j]) return {false, dx.ptx.values[j].to_string()};
    return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Dual algebras

namespace {

const TValue& successor_set(const Coalgebra& c, std::size_t i) {
    return c.functor().kind() == Functor::Kind::Pow ? c.at(i) : c.at(i).second();
}

}  // namespace

DualAlgebra dual_algebra(const Coalgebra& c) {
    const bool pow = c.functor() == Functor::powerset(Functor::id());
    auto letters = kripke_letters(c.functor());
    if (!pow && !letters) throw Error("dual algebras need a P(Id) or C{V} * P(Id) coalgebra");
    const std::size_t n = c.size();
    FinBA base = stone_P(c.carrier());
    std::vector<Element> coatom(n, base.top());
    for (std::size_t x = 0; x < n; ++x)
        for (const auto& s : successor_set(c, x).items()) coatom[c.carrier().index_of(s.symbol())].reset(x);
    DualAlgebra d{ModalAlgebra(base, std::move(coatom)), {}};
    if (letters) {
        for (const auto& l : *letters) {
            Element e(n);
            for (std::size_t x = 0; x < n; ++x) {
                auto v = valuation_letters(c.at(x).first().symbol());
                if (v && std::find(v->begin(), v->end(), l) != v->end()) e.set(x);
            }
            d.letters.emplace(l, std::move(e));
        }
    }
    return d;
}

bool is_dual_morphism(const FinFun& f, const DualAlgebra& source, const DualAlgebra& target, const Limits& limits) {
    BAHom inv = stone_P(f);
    if (!is_modal_hom(inv, target.algebra, source.algebra, limits)) return false;
    for (const auto& [l, e] : target.letters) {
        auto it = source.letters.find(l);
        if (it == source.letters.end() || it->second != inv(e)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Lindenbaum tower

LindenbaumTower::LindenbaumTower(std::vector<std::string> letters, std::size_t depth, const Limits& limits,
                                 bool pow_only)
    : pow_only_(pow_only) {
    std::sort(letters.begin(), letters.end());
    letters.erase(std::unique(letters.begin(), letters.end()), letters.end());
    if (pow_only && !letters.empty()) throw Error("P(Id) formulas have no proposition letters");
    letters_ = std::move(letters);
    functor_ = pow_only ? Functor::powerset(Functor::id()) : kripke_functor(letters_);

    // A_0: free on the letters, atoms renamed to valuation symbols.
    RealizedBA free = realize(Presentation{FinSet(letters_), {}}, limits);
    std::vector<std::pair<std::string, std::size_t>> named;
    for (std::size_t i = 0; i < free.algebra.num_atoms(); ++i) {
        std::vector<std::string> val;
        for (std::size_t g = 0; g < letters_.size(); ++g)
            if (free.assignment[i] >> g & 1) val.push_back(letters_[g]);
        named.emplace_back(valuation_symbol(val), i);
    }
    std::sort(named.begin(), named.end());
    for (auto& [s, i] : named) valuation_names_.push_back(s);
    Level l0;
    l0.algebra = FinBA(FinSet(valuation_names_));
    for (std::size_t v = 0; v < valuation_names_.size(); ++v) {
        l0.valuation.push_back(v);
        l0.successors.emplace_back();
        l0.index.emplace(std::make_pair(v, Element()), v);
        l0.tree_names.push_back(valuation_names_[v] + "[]");
        l0.tree_sizes.push_back(1);
    }
    levels_.push_back(std::move(l0));
    // Distinct subtrees below each atom of the previous level, for tree sizes.
    std::vector<std::set<std::string>> below(levels_[0].tree_names.size());
    for (std::size_t v = 0; v < below.size(); ++v) below[v] = {levels_[0].tree_names[v]};

    for (std::size_t m = 0; m < depth; ++m) {
        const Level& prev = levels_.back();
        limits.require(sat::mul(valuation_names_.size(), sat::pow2(prev.algebra.num_atoms())),
                       "the atoms of Lindenbaum level " + std::to_string(m + 1));
        LFilters lf = L_filters(prev.algebra, limits);
        BACoproduct cp = coproduct(levels_[0].algebra, lf.algebra, limits);
        Level next;
        next.algebra = cp.sum;
        std::vector<std::set<std::string>> now(cp.sum.num_atoms());
        for (std::size_t k = 0; k < cp.sum.num_atoms(); ++k) {
            if ((k & 0xff) == 0) limits.poll();
            std::size_t v = cp.left_atom[k];
            const Element& succ = lf.generator[cp.right_atom[k]];
            next.valuation.push_back(v);
            next.successors.push_back(succ);
            next.index.emplace(std::make_pair(v, succ), k);
            std::set<std::string> children;
            for (auto j = succ.find_first(); j != Element::npos; j = succ.find_next(j)) {
                children.insert(prev.tree_names[j]);
                now[k].insert(below[j].begin(), below[j].end());
            }
            std::string name = valuation_names_[v] + "[";
            bool first = true;
            for (const auto& c : children) {
                name += (first ? "" : ",") + c;
                first = false;
            }
            name += "]";
            now[k].insert(name);
            next.tree_names.push_back(std::move(name));
            next.tree_sizes.push_back(now[k].size());
        }
        below = std::move(now);
        levels_.push_back(std::move(next));
    }
}

std::size_t LindenbaumTower::valuation(std::size_t n, std::size_t atom) const { return levels_.at(n).valuation.at(atom); }

const Element& LindenbaumTower::successors(std::size_t n, std::size_t atom) const {
    if (n == 0) throw Error("atoms of level 0 have no successors");
    return levels_.at(n).successors.at(atom);
}

std::optional<std::size_t> LindenbaumTower::atom_of(std::size_t n, std::size_t valuation,
                                                    const Element& successors) const {
    const auto& idx = levels_.at(n).index;
    auto it = idx.find({valuation, n == 0 ? Element() : successors});
    if (it == idx.end()) return std::nullopt;
    return it->second;
}

Element LindenbaumTower::letter(std::size_t n, const std::string& name) const {
    const FinBA& a = algebra(n);
    Element e(a.num_atoms());
    for (std::size_t k = 0; k < a.num_atoms(); ++k) {
        auto v = valuation_letters(valuation_names_[valuation(n, k)]);
        if (v && std::find(v->begin(), v->end(), name) != v->end()) e.set(k);
    }
    return e;
}

Element LindenbaumTower::box(std::size_t n, const Element& e) const {
    if (n == 0) throw Error("level 0 has no box");
    const FinBA& a = algebra(n);
    Element out(a.num_atoms());
    for (std::size_t k = 0; k < a.num_atoms(); ++k)
        if (successors(n, k).is_subset_of(e)) out.set(k);
    return out;
}

BAHom LindenbaumTower::embedding(std::size_t n) const {
    // Dually the projection atoms(A_{n+1}) -> atoms(A_n): truncate the tree.
    std::vector<std::size_t> proj;
    if (n == 0) {
        proj = levels_.at(1).valuation;
    } else {
        BAHom lower = embedding(n - 1);
        for (std::size_t k = 0; k < algebra(n + 1).num_atoms(); ++k) {
            const Element& succ = successors(n + 1, k);
            Element image(algebra(n - 1).num_atoms());
            for (auto j = succ.find_first(); j != Element::npos; j = succ.find_next(j)) image.set(lower.dual()[j]);
            auto atom = atom_of(n, valuation(n + 1, k), image);
            if (!atom) throw Error("internal: truncated tree is not an atom");
            proj.push_back(*atom);
        }
    }
    return BAHom(algebra(n), algebra(n + 1), std::move(proj));
}

std::string LindenbaumTower::tree_name(std::size_t n, std::size_t atom) const {
    return levels_.at(n).tree_names.at(atom);
}

std::size_t LindenbaumTower::tree_size(std::size_t n, std::size_t atom) const {
    return levels_.at(n).tree_sizes.at(atom);
}

Coalgebra LindenbaumTower::tree(std::size_t n, std::size_t atom) const {
    std::map<std::string, TValue> structure;
    auto build = [&](const auto& self, std::size_t m, std::size_t k) -> std::string {
        std::string name = tree_name(m, k);
        if (structure.count(name)) return name;
        std::vector<TValue> children;
        if (m > 0) {
            const Element& succ = successors(m, k);
            for (auto j = succ.find_first(); j != Element::npos; j = succ.find_next(j))
                children.push_back(TValue::state(self(self, m - 1, j)));
        }
        TValue set = TValue::set(std::move(children));
        structure.emplace(name, pow_only_ ? set : TValue::pair(TValue::constant(valuation_names_[valuation(m, k)]), set));
        return name;
    };
    build(build, n, atom);
    std::vector<std::string> names;
    for (auto& [k, v] : structure) names.push_back(k);
    return Coalgebra::from_map(functor_, FinSet(names), structure);
}

// ---------------------------------------------------------------------------
// Formulas into levels

namespace {

std::size_t step_depth(const Step& s);

std::size_t formula_depth(const Formula& f) {
    if (!f) return 0;
    if (f->op == FormulaOp::Next) return step_depth(f->step);
    return std::max(formula_depth(f->lhs), formula_depth(f->rhs));
}

std::size_t step_depth(const Step& s) {
    if (!s) return 0;
    switch (s->op) {
        case StepOp::Embed: return formula_depth(s->body);
        case StepOp::Box:
        case StepOp::Diamond: return 1 + step_depth(s->lhs);
        default: return std::max(step_depth(s->lhs), step_depth(s->rhs));
    }
}

}  // namespace

std::size_t k_depth(const Formula& f, const Functor& functor) { return formula_depth(elaborate(f, functor)); }

LevelMap::LevelMap(const LindenbaumTower& tower) : tower_(tower), elab_(tower.functor()) {}

Element LevelMap::operator()(const Formula& f, std::size_t n) {
    Formula g = elab_(f);
    keep_.push_back(g);
    return elaborated(g, n);
}

Element LevelMap::lift_valuations(const Element& vals, std::size_t n) const {
    if (n == 0) return vals;
    const FinBA& a = tower_.algebra(n);
    Element out(a.num_atoms());
    for (std::size_t k = 0; k < a.num_atoms(); ++k)
        if (vals[tower_.valuation(n, k)]) out.set(k);
    return out;
}

Element LevelMap::elaborated(const Formula& f, std::size_t n) {
    if (n > tower_.depth()) throw Error("formula needs level " + std::to_string(n) + " but the tower stops at " +
                                        std::to_string(tower_.depth()));
    auto key = std::make_pair(f.get(), n);
    if (auto it = fmemo_.find(key); it != fmemo_.end()) return it->second;
    const FinBA& a = tower_.algebra(n);
    Element out;
    switch (f->op) {
        case FormulaOp::True: out = a.top(); break;
        case FormulaOp::False: out = a.bottom(); break;
        case FormulaOp::Not: out = ~elaborated(f->lhs, n); break;
        case FormulaOp::And: out = elaborated(f->lhs, n) & elaborated(f->rhs, n); break;
        case FormulaOp::Or: out = elaborated(f->lhs, n) | elaborated(f->rhs, n); break;
        case FormulaOp::Implies: out = ~elaborated(f->lhs, n) | elaborated(f->rhs, n); break;
        case FormulaOp::Next: out = step(f->step, tower_.pow_only() ? Sort::Pow : Sort::Kripke, n); break;
        default: throw Error("formula is not elaborated: " + to_string(f));
    }
    fmemo_.emplace(key, out);
    return out;
}

Element LevelMap::step(const Step& s, Sort sort, std::size_t n) {
    auto key = std::make_tuple(s.get(), static_cast<int>(sort), n);
    if (auto it = smemo_.find(key); it != smemo_.end()) return it->second;
    const std::size_t width = tower_.algebra(sort == Sort::Const ? 0 : n).num_atoms();
    Element out;
    auto wrong = [&]() -> Element { throw SortError("one-step operator does not fit the Kripke shape", to_string(s)); };
    switch (s->op) {
        case StepOp::True: out = ~Element(width); break;
        case StepOp::False: out = Element(width); break;
        case StepOp::Not: out = ~step(s->lhs, sort, n); break;
        case StepOp::And: out = step(s->lhs, sort, n) & step(s->rhs, sort, n); break;
        case StepOp::Or: out = step(s->lhs, sort, n) | step(s->rhs, sort, n); break;
        case StepOp::Implies: out = ~step(s->lhs, sort, n) | step(s->rhs, sort, n); break;
        case StepOp::Pi1:
            out = sort == Sort::Kripke ? lift_valuations(step(s->lhs, Sort::Const, 0), n) : wrong();
            break;
        case StepOp::Pi2: out = sort == Sort::Kripke ? step(s->lhs, Sort::Pow, n) : wrong(); break;
        case StepOp::Eq: {
            if (sort != Sort::Const) wrong();
            out = Element(width);
            for (std::size_t v = 0; v < width; ++v)
                if (tower_.valuation_name(v) == s->symbol) out.set(v);
            break;
        }
        case StepOp::Box:
        case StepOp::Diamond: {
            if (sort != Sort::Pow) wrong();
            if (n == 0) throw Error("modal operator below level 0");
            Element e = step(s->lhs, Sort::Id, n - 1);
            out = Element(width);
            for (std::size_t k = 0; k < width; ++k) {
                const Element& succ = tower_.successors(n, k);
                if (s->op == StepOp::Box ? succ.is_subset_of(e) : succ.intersects(e)) out.set(k);
            }
            break;
        }
        case StepOp::Embed: out = sort == Sort::Id ? elaborated(s->body, n) : wrong(); break;
        default: wrong();
    }
    smemo_.emplace(key, out);
    return out;
}

// ---------------------------------------------------------------------------
// Validity, theories

std::vector<std::string> default_letters(std::size_t k) {
    static const std::string base = "pqrstuvw";
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) {
        std::string l(1, base[i % base.size()]);
        if (i >= base.size()) l += std::to_string(i / base.size());
        out.push_back(l);
    }
    return out;
}

namespace {

// Towers are immutable, so repeated validity queries share them.
std::shared_ptr<const LindenbaumTower> cached_tower(const std::vector<std::string>& letters, std::size_t depth,
                                                    const Limits& limits) {
    using Key = std::tuple<std::vector<std::string>, std::size_t, std::uint64_t>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const LindenbaumTower>> cache;
    Key key{letters, depth, limits.cardinality};
    {
        std::lock_guard lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto tower = std::make_shared<const LindenbaumTower>(letters, depth, limits);
    std::lock_guard lock(mutex);
    if (cache.size() >= 16) cache.clear();
    cache.emplace(key, tower);
    return tower;
}

}  // namespace

KValidity kvalid(const Formula& f, std::size_t k, const Limits& limits) {
    KValidity r;
    r.letters = default_letters(k);
    for (const auto& l : letters_of(f))
        if (std::find(r.letters.begin(), r.letters.end(), l) == r.letters.end()) r.letters.push_back(l);
    std::sort(r.letters.begin(), r.letters.end());
    Functor t = kripke_functor(r.letters);
    r.depth = k_depth(f, t);
    auto shared = cached_tower(r.letters, r.depth, limits);
    const LindenbaumTower& tower = *shared;
    LevelMap map(tower);
    Element e = map(f, r.depth);
    r.valid = e.all();
    if (r.valid) return r;
    std::size_t best = Element::npos;
    for (std::size_t a = 0; a < e.size(); ++a)
        if (!e[a] && (best == Element::npos || tower.tree_size(r.depth, a) < tower.tree_size(r.depth, best))) best = a;
    r.countermodel = tower.tree(r.depth, best);
    r.state = tower.tree_name(r.depth, best);
    Evaluator ev(*r.countermodel, limits);
    r.countermodel_checked = !ev.holds_at(f, r.state);
    return r;
}

Formula characteristic_formula(const LindenbaumTower& tower, std::size_t n, std::size_t atom) {
    std::vector<std::vector<Formula>> memo(n + 1);
    auto chi = [&](const auto& self, std::size_t m, std::size_t k) -> Formula {
        auto& slot = memo[m];
        if (slot.empty()) slot.resize(tower.algebra(m).num_atoms());
        if (slot[k]) return slot[k];
        auto v = valuation_letters(tower.valuation_name(tower.valuation(m, k)));
        Formula f = fml::top();
        bool any = false;
        auto add = [&](Formula g) {
            f = any ? fml::conj(f, std::move(g)) : std::move(g);
            any = true;
        };
        for (const auto& l : tower.letters()) {
            bool holds = v && std::find(v->begin(), v->end(), l) != v->end();
            add(holds ? fml::letter(l) : fml::neg(fml::letter(l)));
        }
        if (m > 0) {
            const Element& succ = tower.successors(m, k);
            Formula some = fml::bottom();
            bool first = true;
            std::vector<Formula> each;
            for (auto j = succ.find_first(); j != Element::npos; j = succ.find_next(j)) {
                Formula c = self(self, m - 1, j);
                some = first ? c : fml::disj(some, c);
                first = false;
                each.push_back(fml::diamond(c));
            }
            add(fml::box(some));
            for (auto& d : each) add(d);
        }
        slot[k] = f;
        return f;
    };
    return chi(chi, n, atom);
}

TheoryReport check_theories(const LindenbaumTower& tower, const Limits& limits) {
    if (tower.pow_only()) throw Error("theories are computed for Kripke towers");
    const std::size_t n = tower.depth();
    Coalgebra tm = tree_model(tower.functor(), n, limits);
    TheoryReport r;
    r.states = tm.size();
    r.atoms = tower.algebra(n).num_atoms();

    // alpha_m(x) = (valuation of x, { alpha_{m-1}(y) | y successor of x }).
    std::vector<std::vector<std::size_t>> memo(n + 1, std::vector<std::size_t>(tm.size(), Element::npos));
    auto alpha = [&](const auto& self, std::size_t m, std::size_t x) -> std::size_t {
        if (memo[m][x] != Element::npos) return memo[m][x];
        const TValue& v = tm.at(x);
        std::size_t val = 0;
        while (tower.valuation_name(val) != v.first().symbol()) ++val;
        Element succ;
        if (m > 0) {
            succ = Element(tower.algebra(m - 1).num_atoms());
            for (const auto& y : v.second().items()) succ.set(self(self, m - 1, tm.carrier().index_of(y.symbol())));
        }
        auto a = tower.atom_of(m, val, succ);
        if (!a) throw Error("internal: state without an atom");
        return memo[m][x] = *a;
    };
    std::vector<bool> hit(r.atoms, false);
    bool injective = true;
    for (std::size_t x = 0; x < tm.size(); ++x) {
        std::size_t a = alpha(alpha, n, x);
        r.theory.push_back(a);
        injective = injective && !hit[a];
        hit[a] = true;
    }
    r.bijective = injective && r.states == r.atoms;

    LevelMap map(tower);
    Evaluator ev(tm, limits);
    r.characteristic_ok = true;
    for (std::size_t a = 0; a < r.atoms && r.characteristic_ok; ++a) {
        limits.poll();
        Formula chi = characteristic_formula(tower, n, a);
        Element e = map(chi, n);
        StateSet ext = ev(chi);
        bool ok = e.count() == 1 && e.test(a) && ext.count() == 1;
        for (std::size_t x = 0; ok && x < tm.size(); ++x) ok = ext.test(x) == (r.theory[x] == a);
        r.characteristic_ok = ok;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Presentation of L versus semilattice maps

std::vector<std::vector<Element>> meet_preserving_self_maps(const FinBA& a, const Limits& limits) {
    if (a.num_atoms() > 4) throw CapExceeded("meet-preserving maps are searched for at most 4 atoms");
    auto elems = a.elements(limits);
    const std::size_t n = elems.size();
    std::vector<std::vector<Element>> out;
    std::vector<std::size_t> img(n, 0);
    // Elements in code order: the meet of i and c has code i & c <= both.
    auto search = [&](const auto& self, std::size_t c) -> void {
        if (c == n) {
            std::vector<Element> m;
            for (auto i : img) m.push_back(elems[i]);
            out.push_back(std::move(m));
            limits.require(out.size(), "meet-preserving maps");
            return;
        }
        limits.poll();
        for (std::size_t v = 0; v < n; ++v) {
            if (c == n - 1 && v != n - 1) continue;
            bool ok = true;
            for (std::size_t i = 0; ok && i < c; ++i) ok = img[i & c] == (img[i] & v);
            if (!ok) continue;
            img[c] = v;
            self(self, c + 1);
        }
    };
    search(search, 0);
    return out;
}

PresentFunReport check_present_fun(const FinBA& a, const Limits& limits) {
    PresentFunReport r;
    LPresented l = L_presented(a, LFunctor::K(), limits);
    Limits no_iso = limits;
    no_iso.generators = 0;
    LViaDuality pts = L_via_duality(a, Functor::powerset(Functor::id()), no_iso);
    try {
        r.iso = filter_iso(l, pts).iso();
    } catch (const Error&) {
        r.iso = false;
    }
    auto maps = meet_preserving_self_maps(a, limits);
    auto homs = hom_set(l.algebra(), a, limits);
    r.homs = homs.size();
    r.meet_maps = maps.size();
    std::set<std::vector<Element>> known(maps.begin(), maps.end()), seen;
    auto elems = a.elements(limits);
    bool ok = true;
    for (const auto& h : homs) {
        std::vector<Element> m;
        for (const auto& e : elems) m.push_back(h(l.box(e)));
        ok = ok && known.count(m) == 1 && seen.insert(m).second;
    }
    r.bijection = ok && seen.size() == known.size();
    return r;
}

}  // namespace coalg
