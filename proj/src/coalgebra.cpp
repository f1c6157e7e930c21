// SPDX-License-Identifier: Apache-2.0
#include "coalg/coalgebra.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <numeric>
#include <set>
#include <stdexcept>

namespace coalg {

// ---------------------------------------------------------------------------
// Coalgebra

Coalgebra::Coalgebra(Functor functor, FinSet carrier, std::vector<TValue> structure)
    : functor_(std::move(functor)), carrier_(std::move(carrier)), structure_(std::move(structure)) {
    if (structure_.size() != carrier_.size()) throw Error("structure map is not total on the carrier");
    for (std::size_t i = 0; i < structure_.size(); ++i) {
        try {
            check_shape(functor_, structure_[i], carrier_);
        } catch (const ShapeError& e) {
            throw ShapeError(std::string("structure of \"") + carrier_[i] + "\": " + e.what(), e.path());
        }
    }
}

Coalgebra Coalgebra::from_map(Functor functor, FinSet carrier, const std::map<std::string, TValue>& structure) {
    std::vector<TValue> values;
    values.reserve(carrier.size());
    for (const auto& x : carrier) {
        auto it = structure.find(x);
        if (it == structure.end()) throw Error("no structure given for state \"" + x + "\"");
        values.push_back(it->second);
    }
    if (structure.size() != carrier.size()) throw Error("structure mentions states outside the carrier");
    return Coalgebra(std::move(functor), std::move(carrier), std::move(values));
}

namespace {

void denominators(const TValue& v, std::int64_t& acc) {
    for (const auto& w : v.weights()) acc = lcm64(acc, w.den());
    for (const auto& c : v.items()) denominators(c, acc);
}

}  // namespace

std::int64_t Coalgebra::denominator_lcm() const {
    std::int64_t acc = 1;
    for (const auto& v : structure_) denominators(v, acc);
    return acc;
}

Limits Coalgebra::resolve(const Limits& limits) const {
    Limits out = limits;
    if (out.denominator < 1) out.denominator = denominator_lcm();
    return out;
}

void collect_states(const TValue& v, std::vector<std::string>& out) {
    if (v.kind() == TValue::Kind::State) {
        out.push_back(v.symbol());
        return;
    }
    for (const auto& c : v.items()) collect_states(c, out);
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(FinSet carrier, const std::vector<std::size_t>& labels) : carrier_(std::move(carrier)) {
    if (labels.size() != carrier_.size()) throw Error("partition labels do not cover the carrier");
    std::map<std::size_t, std::size_t> renumber;
    block_of_.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = renumber.emplace(labels[i], blocks_.size());
        if (fresh) blocks_.emplace_back();
        block_of_[i] = it->second;
        blocks_[it->second].push_back(i);
    }
}

Partition Partition::total(FinSet carrier) {
    std::vector<std::size_t> labels(carrier.size(), 0);
    return Partition(std::move(carrier), labels);
}

Partition Partition::discrete(FinSet carrier) {
    std::vector<std::size_t> labels(carrier.size());
    std::iota(labels.begin(), labels.end(), std::size_t{0});
    return Partition(std::move(carrier), labels);
}

bool Partition::refines(const Partition& coarser) const {
    if (!(carrier_ == coarser.carrier_)) return false;
    for (const auto& b : blocks_)
        for (auto i : b)
            if (coarser.block_of(i) != coarser.block_of(b.front())) return false;
    return true;
}

FinSet Partition::quotient_set() const { return FinSet::numbered("q", blocks_.size()); }

FinFun Partition::quotient_map() const {
    FinSet q = quotient_set();
    std::vector<std::size_t> name_index(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) name_index[b] = q.index_of("q" + std::to_string(b));
    std::vector<std::size_t> image(block_of_.size());
    for (std::size_t i = 0; i < block_of_.size(); ++i) image[i] = name_index[block_of_[i]];
    return FinFun(carrier_, std::move(q), std::move(image));
}

std::vector<std::vector<std::string>> Partition::named_blocks() const {
    std::vector<std::vector<std::string>> out;
    for (const auto& b : blocks_) {
        auto& names = out.emplace_back();
        for (auto i : b) names.push_back(carrier_[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Morphisms and refinement

MorphismCheck is_morphism(const FinFun& f, const Coalgebra& src, const Coalgebra& tgt, const Limits& limits) {
    if (!(src.functor() == tgt.functor())) throw Error("coalgebras have different functors");
    if (!(f.dom() == src.carrier()) || !(f.cod() == tgt.carrier()))
        throw Error("function does not match the coalgebra carriers");
    Limits lim = limits;
    if (lim.denominator < 1) lim.denominator = lcm64(src.denominator_lcm(), tgt.denominator_lcm());
    FunctorAction tf(src.functor(), f, lim);
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (!(tf(src.at(i)) == tgt.at(f(i)))) return MorphismCheck{false, src.carrier()[i]};
    }
    return MorphismCheck{};
}

std::optional<std::size_t> Refinement::separation_level(std::size_t a, std::size_t b) const {
    for (std::size_t j = 0; j < trace.size(); ++j)
        if (!trace[j].same_block(a, b)) return j;
    return std::nullopt;
}

namespace {

/// Partition by the values T(q)(xi x).
Partition split_by_image(const Coalgebra& c, const Partition& p, const Limits& limits) {
    FunctorAction tq(c.functor(), p.quotient_map(), limits);
    std::map<TValue, std::size_t> ids;
    std::vector<std::size_t> labels(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        limits.poll();
        labels[i] = ids.emplace(tq(c.at(i)), ids.size()).first->second;
    }
    return Partition(c.carrier(), labels);
}

}  // namespace

Refinement behavioural_equivalence(const Coalgebra& c, const Limits& limits) {
    Limits lim = c.resolve(limits);
    Refinement r;
    Partition current = Partition::total(c.carrier());
    r.trace.push_back(current);
    while (true) {
        Partition next = split_by_image(c, current, lim);
        if (!next.refines(current)) throw std::logic_error("refinement step did not refine the partition");
        if (next.num_blocks() == current.num_blocks()) break;
        r.trace.push_back(next);
        current = std::move(next);
    }
    r.result = current;
    return r;
}

CoproductCoalgebra coproduct(const Coalgebra& a, const Coalgebra& b) {
    if (!(a.functor() == b.functor())) throw Error("coalgebras have different functors");
    std::vector<std::string> names;
    for (const auto& x : a.carrier()) names.push_back("l:" + x);
    for (const auto& y : b.carrier()) names.push_back("r:" + y);
    FinSet sum(names);
    std::vector<std::string> left_names(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(a.size()));
    std::vector<std::string> right_names(names.begin() + static_cast<std::ptrdiff_t>(a.size()), names.end());
    FinFun inl = FinFun::from_names(a.carrier(), sum, left_names);
    FinFun inr = FinFun::from_names(b.carrier(), sum, right_names);
    Limits lim;
    lim.denominator = lcm64(a.denominator_lcm(), b.denominator_lcm());
    FunctorAction tl(a.functor(), inl, lim);
    FunctorAction tr(b.functor(), inr, lim);
    std::map<std::string, TValue> structure;
    for (std::size_t i = 0; i < a.size(); ++i) structure.emplace(left_names[i], tl(a.at(i)));
    for (std::size_t i = 0; i < b.size(); ++i) structure.emplace(right_names[i], tr(b.at(i)));
    return {Coalgebra::from_map(a.functor(), sum, structure), std::move(inl), std::move(inr)};
}

namespace {

/// Union-find closure of the union of all congruences of c.
std::vector<std::size_t> congruence_union(const Coalgebra& c, const Limits& limits) {
    const std::size_t n = c.size();
    if (n > limits.brute_force_states)
        throw CapExceeded("brute-force oracle limited to " + std::to_string(limits.brute_force_states) +
                          " states, got " + std::to_string(n));
    Limits lim = c.resolve(limits);
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::function<std::size_t(std::size_t)> root = [&](std::size_t i) {
        return parent[i] == i ? i : parent[i] = root(parent[i]);
    };
    if (n == 0) return parent;

    // Restricted growth strings enumerate each set partition exactly once.
    std::vector<std::size_t> rgs(n, 0), prefix_max(n, 0);
    while (true) {
        lim.poll();
        Partition p(c.carrier(), rgs);
        FunctorAction tq(c.functor(), p.quotient_map(), lim);
        std::vector<TValue> keys;
        keys.reserve(n);
        for (std::size_t i = 0; i < n; ++i) keys.push_back(tq(c.at(i)));
        bool congruence = true;
        for (const auto& b : p.blocks()) {
            for (auto i : b)
                if (!(keys[i] == keys[b.front()])) {
                    congruence = false;
                    break;
                }
            if (!congruence) break;
        }
        if (congruence)
            for (const auto& b : p.blocks())
                for (auto i : b) parent[root(i)] = root(b.front());

        std::size_t i = n - 1;
        while (i > 0 && rgs[i] == prefix_max[i - 1] + 1) --i;
        if (i == 0) break;
        ++rgs[i];
        prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            rgs[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) parent[i] = root(i);
    return parent;
}

}  // namespace

Partition brute_force_equivalence(const Coalgebra& c, const Limits& limits) {
    return Partition(c.carrier(), congruence_union(c, limits));
}

std::vector<std::pair<std::string, std::string>> brute_force_bisimilarity(const Coalgebra& a, const Coalgebra& b,
                                                                        const Limits& limits) {
    if (a.size() + b.size() > limits.brute_force_states)
        throw CapExceeded("brute-force oracle limited to " + std::to_string(limits.brute_force_states) +
                          " combined states, got " + std::to_string(a.size() + b.size()));
    auto sum = coproduct(a, b);
    auto classes = congruence_union(sum.sum, limits);
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            if (classes[sum.inl(i)] == classes[sum.inr(j)]) out.emplace_back(a.carrier()[i], b.carrier()[j]);
    return out;
}

Minimized minimize(const Coalgebra& c, const Limits& limits) {
    Limits lim = c.resolve(limits);
    Partition p = behavioural_equivalence(c, lim).result;
    FinFun q = p.quotient_map();
    FunctorAction tq(c.functor(), q, lim);
    std::map<std::string, TValue> structure;
    for (std::size_t b = 0; b < p.num_blocks(); ++b)
        structure.emplace("q" + std::to_string(b), tq(c.at(p.blocks()[b].front())));
    return {Coalgebra::from_map(c.functor(), q.cod(), structure), q};
}

// ---------------------------------------------------------------------------
// Kripke shape and canonical tree models

namespace {

bool is_letter_name(const std::string& s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\''; });
}

}  // namespace

std::optional<std::vector<std::string>> valuation_letters(const std::string& symbol) {
    if (symbol == "0") return std::vector<std::string>{};
    std::vector<std::string> letters;
    std::size_t start = 0;
    while (true) {
        auto plus = symbol.find('+', start);
        std::string part = symbol.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
        if (!is_letter_name(part)) return std::nullopt;
        if (!letters.empty() && !(letters.back() < part)) return std::nullopt;
        letters.push_back(part);
        if (plus == std::string::npos) break;
        start = plus + 1;
    }
    return letters;
}

std::string valuation_symbol(const std::vector<std::string>& letters) {
    if (letters.empty()) return "0";
    std::vector<std::string> sorted = letters;
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    for (std::size_t i = 0; i < sorted.size(); ++i) out += (i ? "+" : "") + sorted[i];
    return out;
}

Functor kripke_functor(const std::vector<std::string>& letters) {
    std::vector<std::string> sorted = letters;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (const auto& l : sorted)
        if (!is_letter_name(l)) throw Error("\"" + l + "\" is not a valid letter name");
    if (sorted.size() > 16) throw CapExceeded("too many proposition letters");
    std::vector<std::string> symbols;
    for (std::size_t mask = 0; mask < (std::size_t{1} << sorted.size()); ++mask) {
        std::vector<std::string> val;
        for (std::size_t i = 0; i < sorted.size(); ++i)
            if (mask >> i & 1) val.push_back(sorted[i]);
        symbols.push_back(valuation_symbol(val));
    }
    return Functor::product(Functor::constant(FinSet(symbols)), Functor::powerset(Functor::id()));
}

bool is_kripke_shape(const Functor& t) {
    return t.kind() == Functor::Kind::Prod && t.left().kind() == Functor::Kind::Const &&
           t.right().kind() == Functor::Kind::Pow && t.right().inner().kind() == Functor::Kind::Id;
}

std::optional<std::vector<std::string>> kripke_letters(const Functor& t) {
    if (!is_kripke_shape(t)) return std::nullopt;
    std::set<std::string> letters;
    for (const auto& sym : t.left().alphabet()) {
        auto l = valuation_letters(sym);
        if (!l) return std::nullopt;
        letters.insert(l->begin(), l->end());
    }
    return std::vector<std::string>(letters.begin(), letters.end());
}

Coalgebra tree_model(const Functor& kripke, std::size_t depth, const Limits& limits) {
    if (!is_kripke_shape(kripke)) throw Error("tree models need a functor of shape C{V} * P(Id)");
    const FinSet& labels = kripke.left().alphabet();
    for (const auto& v : labels)
        if (v.find_first_of("[],") != std::string::npos) throw Error("label \"" + v + "\" cannot name tree nodes");

    std::map<std::string, TValue> structure;
    std::vector<std::string> layer;
    for (const auto& v : labels) {
        std::string name = v + "[]";
        structure.emplace(name, TValue::pair(TValue::constant(v), TValue::set({})));
        layer.push_back(name);
    }
    for (std::size_t n = 1; n <= depth; ++n) {
        std::uint64_t count = sat::mul(labels.size(), sat::pow2(layer.size()));
        limits.require(count, "tree model layer " + std::to_string(n));
        std::sort(layer.begin(), layer.end());
        std::vector<std::string> next;
        next.reserve(count);
        for (const auto& v : labels) {
            for (std::uint64_t mask = 0; mask < sat::pow2(layer.size()); ++mask) {
                if ((mask & 0xff) == 0) limits.poll();
                std::string name = v + "[";
                std::vector<TValue> children;
                bool first = true;
                for (std::size_t i = 0; i < layer.size(); ++i) {
                    if (!(mask >> i & 1)) continue;
                    name += (first ? "" : ",") + layer[i];
                    first = false;
                    children.push_back(TValue::state(layer[i]));
                }
                name += "]";
                structure.emplace(name, TValue::pair(TValue::constant(v), TValue::set(std::move(children))));
                next.push_back(std::move(name));
            }
        }
        layer = std::move(next);
    }
    std::set<std::string> keep(layer.begin(), layer.end());
    std::vector<TValue> values;
    FinSet carrier(std::vector<std::string>(keep.begin(), keep.end()));
    for (const auto& x : carrier) values.push_back(structure.at(x));
    return Coalgebra(kripke, std::move(carrier), std::move(values));
}

namespace {

bool mentions_nbhd(const Functor& t) {
    switch (t.kind()) {
        case Functor::Kind::Nbhd: return true;
        case Functor::Kind::Id:
        case Functor::Kind::Const: return false;
        case Functor::Kind::Prod:
        case Functor::Kind::Coprod: return mentions_nbhd(t.left()) || mentions_nbhd(t.right());
        default: return mentions_nbhd(t.inner());
    }
}

}  // namespace

Coalgebra generated_subcoalgebra(const Coalgebra& c, const std::string& root) {
    // Neighbourhood values over a subset are not values over the whole carrier.
    if (mentions_nbhd(c.functor())) throw Error("generated sub-coalgebras are not supported for neighbourhood functors");
    std::set<std::string> seen{root};
    std::deque<std::string> todo{root};
    c.carrier().index_of(root);
    while (!todo.empty()) {
        std::string x = todo.front();
        todo.pop_front();
        std::vector<std::string> succ;
        collect_states(c.at(x), succ);
        for (auto& s : succ)
            if (seen.insert(s).second) todo.push_back(s);
    }
    FinSet carrier(std::vector<std::string>(seen.begin(), seen.end()));
    std::vector<TValue> values;
    for (const auto& x : carrier) values.push_back(c.at(x));
    return Coalgebra(c.functor(), std::move(carrier), std::move(values));
}

}  // namespace coalg
