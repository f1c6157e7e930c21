// SPDX-License-Identifier: Apache-2.0
#include "coalg/boolalg.hpp"

#include <algorithm>
#include <cctype>

#include "coalg/error.hpp"

namespace coalg {

// ---------------------------------------------------------------------------
// FinBA

Element FinBA::atom(std::size_t i) const {
    Element e(atoms_.size());
    e.set(i);
    return e;
}

Element FinBA::element(const std::vector<std::string>& atom_names) const {
    Element e(atoms_.size());
    for (const auto& n : atom_names) e.set(atoms_.index_of(n));
    return e;
}

Element FinBA::from_code(std::uint64_t code) const {
    if (atoms_.size() >= 64) throw Error("element codes need fewer than 64 atoms");
    Element e(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (code >> i & 1) e.set(i);
    return e;
}

std::uint64_t FinBA::code(const Element& e) {
    if (e.size() >= 64) throw Error("element codes need fewer than 64 atoms");
    std::uint64_t c = 0;
    for (auto i = e.find_first(); i != Element::npos; i = e.find_next(i)) c |= std::uint64_t{1} << i;
    return c;
}

std::vector<Element> FinBA::elements(const Limits& limits) const {
    limits.require(size(), "the elements of a Boolean algebra");
    std::vector<Element> out;
    out.reserve(size());
    for (std::uint64_t c = 0; c < size(); ++c) {
        if ((c & 0xfff) == 0) limits.poll();
        out.push_back(from_code(c));
    }
    return out;
}

std::string FinBA::name(const Element& e) const {
    std::string s = "{";
    bool first = true;
    for (auto i = e.find_first(); i != Element::npos; i = e.find_next(i)) {
        if (!first) s += ',';
        first = false;
        s += atoms_[i];
    }
    return s + "}";
}

// ---------------------------------------------------------------------------
// BAHom

BAHom::BAHom(FinBA source, FinBA target, std::vector<std::size_t> dual)
    : source_(std::move(source)), target_(std::move(target)), dual_(std::move(dual)) {
    if (dual_.size() != target_.num_atoms()) throw Error("dual map must cover every target atom");
    for (auto i : dual_)
        if (i >= source_.num_atoms()) throw Error("dual map leaves the source atoms");
}

std::optional<BAHom> BAHom::from_map(const FinBA& source, const FinBA& target,
                                     const std::function<Element(const Element&)>& map, const Limits& limits) {
    std::vector<std::size_t> dual(target.num_atoms(), source.num_atoms());
    for (std::size_t a = 0; a < source.num_atoms(); ++a) {
        Element img = map(source.atom(a));
        if (img.size() != target.num_atoms()) return std::nullopt;
        for (auto b = img.find_first(); b != Element::npos; b = img.find_next(b)) {
            if (dual[b] != source.num_atoms()) return std::nullopt;  // atoms must map to disjoint elements
            dual[b] = a;
        }
    }
    for (auto d : dual)
        if (d == source.num_atoms()) return std::nullopt;
    BAHom h(source, target, std::move(dual));
    for (const auto& e : source.elements(limits))
        if (map(e) != h(e)) return std::nullopt;
    return h;
}

BAHom BAHom::identity(const FinBA& a) {
    std::vector<std::size_t> d(a.num_atoms());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = i;
    return BAHom(a, a, std::move(d));
}

Element BAHom::operator()(const Element& a) const {
    if (a.size() != source_.num_atoms()) throw Error("element does not belong to the source algebra");
    Element out(target_.num_atoms());
    for (std::size_t b = 0; b < dual_.size(); ++b)
        if (a[dual_[b]]) out.set(b);
    return out;
}

BAHom BAHom::then(const BAHom& g) const {
    if (!(target_ == g.source_)) throw Error("morphisms are not composable");
    std::vector<std::size_t> d(g.dual_.size());
    for (std::size_t c = 0; c < d.size(); ++c) d[c] = dual_[g.dual_[c]];
    return BAHom(source_, g.target_, std::move(d));
}

bool BAHom::injective() const {
    std::vector<bool> hit(source_.num_atoms(), false);
    for (auto i : dual_) hit[i] = true;
    return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

bool BAHom::surjective() const {
    std::vector<bool> hit(source_.num_atoms(), false);
    for (auto i : dual_) {
        if (hit[i]) return false;
        hit[i] = true;
    }
    return true;
}

std::vector<BAHom> hom_set(const FinBA& a, const FinBA& b, const Limits& limits) {
    limits.require(count_functions(b.num_atoms(), a.num_atoms()), "the morphisms between two algebras");
    std::vector<BAHom> out;
    for_each_function(
        b.atoms(), a.atoms(), [&](const FinFun& f) { out.emplace_back(a, b, f.image()); }, limits);
    return out;
}

// ---------------------------------------------------------------------------
// Terms

namespace bterm {
namespace {
BTerm make(BTermNode::Op op, std::string name = {}, BTerm l = {}, BTerm r = {}) {
    auto n = std::make_shared<BTermNode>();
    n->op = op;
    n->name = std::move(name);
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}
}  // namespace
BTerm bot() { return make(BTermNode::Op::Bot); }
BTerm top() { return make(BTermNode::Op::Top); }
BTerm gen(std::string name) { return make(BTermNode::Op::Gen, std::move(name)); }
BTerm neg(BTerm a) { return make(BTermNode::Op::Not, {}, std::move(a)); }
BTerm conj(BTerm a, BTerm b) { return make(BTermNode::Op::And, {}, std::move(a), std::move(b)); }
BTerm disj(BTerm a, BTerm b) { return make(BTermNode::Op::Or, {}, std::move(a), std::move(b)); }
BTerm conj_all(const std::vector<BTerm>& parts) {
    if (parts.empty()) return top();
    BTerm t = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) t = conj(t, parts[i]);
    return t;
}
}  // namespace bterm

namespace {

bool gen_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("_'.#$+*!?[]{}").find(c) != std::string_view::npos;
}

class BTermParser {
public:
    explicit BTermParser(std::string_view s) : s_(s) {}

    BTerm parse() {
        BTerm t = disjunction();
        skip();
        if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return t;
    }

private:
    std::string_view s_;
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
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    BTerm disjunction() {
        BTerm t = conjunction();
        while (eat('|')) t = bterm::disj(t, conjunction());
        return t;
    }
    BTerm conjunction() {
        BTerm t = unary();
        while (eat('&')) t = bterm::conj(t, unary());
        return t;
    }
    BTerm unary() {
        if (eat('~')) return bterm::neg(unary());
        if (eat('(')) {
            BTerm t = disjunction();
            if (!eat(')')) fail("expected ')'");
            return t;
        }
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && gen_char(s_[pos_])) ++pos_;
        if (start == pos_) fail(pos_ < s_.size() ? "unexpected '" + std::string(1, s_[pos_]) + "'" : "unexpected end of term");
        std::string name(s_.substr(start, pos_ - start));
        if (name == "bot") return bterm::bot();
        if (name == "top") return bterm::top();
        return bterm::gen(std::move(name));
    }
};

}  // namespace

BTerm parse_bterm(std::string_view text) { return BTermParser(text).parse(); }

std::string to_string(const BTerm& t) {
    using Op = BTermNode::Op;
    switch (t->op) {
        case Op::Bot: return "bot";
        case Op::Top: return "top";
        case Op::Gen: return t->name;
        case Op::Not: return "~" + to_string(t->lhs);
        case Op::And: return "(" + to_string(t->lhs) + " & " + to_string(t->rhs) + ")";
        case Op::Or: return "(" + to_string(t->lhs) + " | " + to_string(t->rhs) + ")";
    }
    return {};
}

void collect_generators(const BTerm& t, std::vector<std::string>& out) {
    if (!t) return;
    if (t->op == BTermNode::Op::Gen && std::find(out.begin(), out.end(), t->name) == out.end()) out.push_back(t->name);
    collect_generators(t->lhs, out);
    collect_generators(t->rhs, out);
}

// ---------------------------------------------------------------------------
// Presentations

namespace {

template <class Leaf>
Element eval_term(const BTerm& t, std::size_t width, const Leaf& leaf) {
    using Op = BTermNode::Op;
    switch (t->op) {
        case Op::Bot: return Element(width);
        case Op::Top: return ~Element(width);
        case Op::Gen: return leaf(t->name);
        case Op::Not: return ~eval_term(t->lhs, width, leaf);
        case Op::And: return eval_term(t->lhs, width, leaf) & eval_term(t->rhs, width, leaf);
        case Op::Or: return eval_term(t->lhs, width, leaf) | eval_term(t->rhs, width, leaf);
    }
    return Element(width);
}

}  // namespace

RealizedBA realize(const Presentation& p, const Limits& limits) {
    const std::size_t m = p.generators.size();
    if (m > limits.generators || m >= 63)
        throw CapExceeded("presentation has " + std::to_string(m) + " generators, cap is " +
                          std::to_string(limits.generators));
    const std::uint64_t n = std::uint64_t{1} << m;
    limits.require(n, "the assignments of a presentation");

    // Truth tables over all assignments.
    std::vector<Element> table(m, Element(n));
    for (std::size_t g = 0; g < m; ++g)
        for (std::uint64_t a = 0; a < n; ++a)
            if (a >> g & 1) table[g].set(a);
    auto leaf = [&](const std::string& name) -> Element {
        auto i = p.generators.find(name);
        if (!i) throw Error("relation mentions unknown generator \"" + name + "\"");
        return table[*i];
    };
    Element valid = ~Element(n);
    for (const auto& [l, r] : p.relations) {
        limits.poll();
        valid &= ~(eval_term(l, n, leaf) ^ eval_term(r, n, leaf));
    }

    std::vector<std::pair<std::string, std::uint64_t>> named;
    for (auto a = valid.find_first(); a != Element::npos; a = valid.find_next(a)) {
        std::string s = "v";
        for (std::size_t g = 0; g < m; ++g) s += (a >> g & 1) ? '1' : '0';
        named.emplace_back(std::move(s), a);
    }
    std::sort(named.begin(), named.end());

    RealizedBA out;
    out.presentation = p;
    std::vector<std::string> names;
    for (auto& [s, a] : named) {
        out.atom_index.emplace(a, names.size());
        names.push_back(s);
        out.assignment.push_back(a);
    }
    out.algebra = FinBA(FinSet(std::move(names)));
    for (std::size_t g = 0; g < m; ++g) {
        Element e(named.size());
        for (std::size_t k = 0; k < named.size(); ++k)
            if (named[k].second >> g & 1) e.set(k);
        out.generator.emplace(p.generators[g], std::move(e));
    }
    return out;
}

Element RealizedBA::eval(const BTerm& t) const {
    return eval_term(t, algebra.num_atoms(), [&](const std::string& name) -> Element {
        auto it = generator.find(name);
        if (it == generator.end()) throw Error("unknown generator \"" + name + "\"");
        return it->second;
    });
}

std::optional<std::size_t> RealizedBA::atom_of(std::uint64_t assignment_bits) const {
    auto it = atom_index.find(assignment_bits);
    if (it == atom_index.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Stone duality

StoneSpace stone_S(const FinBA& a, const Limits& limits) {
    StoneSpace s;
    s.points = a.atoms();
    std::vector<std::optional<BAHom>> slot(a.num_atoms());
    FinBA two = FinBA::two();
    for (auto& h : hom_set(a, two, limits)) {
        // The point is the atom sent to top.
        std::size_t hit = a.num_atoms();
        for (std::size_t i = 0; i < a.num_atoms(); ++i)
            if (h(a.atom(i)).test(0)) hit = i;
        if (hit == a.num_atoms() || slot[hit]) throw Error("internal: point without a unique atom");
        slot[hit] = std::move(h);
    }
    for (auto& h : slot) s.homs.push_back(std::move(*h));
    return s;
}

FinBA stone_P(const FinSet& x) { return FinBA(x); }

BAHom stone_P(const FinFun& f) { return BAHom(FinBA(f.cod()), FinBA(f.dom()), f.image()); }

FinFun stone_S(const BAHom& h, const Limits& limits) {
    StoneSpace sa = stone_S(h.source(), limits);
    StoneSpace sb = stone_S(h.target(), limits);
    std::vector<std::size_t> image;
    for (const auto& q : sb.homs) {
        BAHom c = h.then(q);
        auto it = std::find(sa.homs.begin(), sa.homs.end(), c);
        if (it == sa.homs.end()) throw Error("internal: composite is not a point");
        image.push_back(static_cast<std::size_t>(it - sa.homs.begin()));
    }
    return FinFun(sb.points, sa.points, std::move(image));
}

BAHom hat_map(const FinBA& a, const Limits& limits) {
    StoneSpace s = stone_S(a, limits);
    FinBA psa(s.points);
    auto literal = [&](const Element& e) {
        Element out(s.homs.size());
        for (std::size_t p = 0; p < s.homs.size(); ++p)
            if (s.homs[p](e).test(0)) out.set(p);
        return out;
    };
    auto h = BAHom::from_map(a, psa, literal, limits);
    if (!h) throw Error("internal: hat map is not a morphism");
    return *h;
}

DualityIsos duality_isos(const FinBA& a, const FinSet& x, const Limits& limits) {
    DualityIsos d;
    d.rho = hat_map(a, limits);
    d.rho_iso = d.rho.iso();

    FinBA px = stone_P(x);
    StoneSpace spx = stone_S(px, limits);
    FinBA two = FinBA::two();
    std::vector<std::size_t> image;
    bool ok = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto at = [&](const Element& u) {
            Element r(1);
            if (u.test(i)) r.set(0);
            return r;
        };
        auto h = BAHom::from_map(px, two, at, limits);
        auto it = h ? std::find(spx.homs.begin(), spx.homs.end(), *h) : spx.homs.end();
        if (it == spx.homs.end()) {
            ok = false;
            image.push_back(0);
            continue;
        }
        image.push_back(static_cast<std::size_t>(it - spx.homs.begin()));
    }
    if (ok && !x.empty()) {
        d.sigma = FinFun(x, spx.points, image);
        d.sigma_bijective = d.sigma.injective() && d.sigma.surjective();
    } else if (ok) {
        d.sigma = FinFun(x, spx.points, {});
        d.sigma_bijective = spx.points.empty();
    }
    return d;
}

BACoproduct coproduct(const FinBA& a, const FinBA& b, const Limits& limits) {
    limits.require(sat::mul(a.num_atoms(), b.num_atoms()), "the atoms of a coproduct");
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> named;
    for (std::size_t i = 0; i < a.num_atoms(); ++i)
        for (std::size_t j = 0; j < b.num_atoms(); ++j)
            named.push_back({"(" + a.atoms()[i] + "," + b.atoms()[j] + ")", {i, j}});
    std::sort(named.begin(), named.end());
    BACoproduct c;
    std::vector<std::string> names;
    for (auto& [s, ij] : named) {
        names.push_back(s);
        c.left_atom.push_back(ij.first);
        c.right_atom.push_back(ij.second);
    }
    c.sum = FinBA(FinSet(std::move(names)));
    c.inl = BAHom(a, c.sum, c.left_atom);
    c.inr = BAHom(b, c.sum, c.right_atom);
    return c;
}

// ---------------------------------------------------------------------------
// Modal algebras

ModalAlgebra::ModalAlgebra(FinBA base, std::vector<Element> coatom_box)
    : base_(std::move(base)), coatom_box_(std::move(coatom_box)) {
    if (coatom_box_.size() != base_.num_atoms()) throw Error("modal operator needs one value per coatom");
    for (const auto& e : coatom_box_)
        if (e.size() != base_.num_atoms()) throw Error("modal operator value outside the algebra");
}

Element ModalAlgebra::box(const Element& a) const {
    Element out = base_.top();
    Element outside = ~a;
    for (auto i = outside.find_first(); i != Element::npos; i = outside.find_next(i)) out &= coatom_box_[i];
    return out;
}

ModalAlgebra ModalAlgebra::from_map(const FinBA& base, const std::function<Element(const Element&)>& box,
                                    const Limits& limits) {
    if (box(base.top()) != base.top()) throw Error("modal operator does not preserve top");
    std::vector<Element> coatoms;
    for (std::size_t i = 0; i < base.num_atoms(); ++i) coatoms.push_back(box(~base.atom(i)));
    ModalAlgebra m(base, std::move(coatoms));
    auto all = base.elements(limits);
    for (const auto& e : all) {
        if (box(e) == m.box(e)) continue;
        std::string what = "modal operator does not preserve binary meets";
        if (all.size() <= 256)
            for (const auto& x : all)
                for (const auto& y : all)
                    if (box(x & y) != (box(x) & box(y))) {
                        throw Error(what + ": box(" + base.name(x) + " & " + base.name(y) + ") != box(" +
                                    base.name(x) + ") & box(" + base.name(y) + ")");
                    }
        throw Error(what);
    }
    return m;
}

bool is_modal_hom(const BAHom& h, const ModalAlgebra& source, const ModalAlgebra& target, const Limits& limits) {
    if (!(h.source() == source.base()) || !(h.target() == target.base())) return false;
    for (const auto& e : source.base().elements(limits))
        if (h(source.box(e)) != target.box(h(e))) return false;
    return true;
}

}  // namespace coalg
