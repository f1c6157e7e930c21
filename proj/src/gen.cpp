// SPDX-License-Identifier: Apache-2.0
#include "coalg/gen.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "coalg/error.hpp"

namespace coalg::gen {

using Kind = Functor::Kind;

std::vector<NamedFunctor> system_functors() {
    const FinSet ab{"a", "b"};
    auto c = [](FinSet s) { return Functor::constant(std::move(s)); };
    const Functor id = Functor::id();
    return {
        {"stream", Functor::product(c(ab), id)},
        {"partial-stream", Functor::coproduct(Functor::product(c(ab), id), Functor::terminal())},
        {"dfa", Functor::product(c(FinSet{"0", "1"}), Functor::exponent(id, ab))},
        {"lts", Functor::powerset(Functor::product(c(ab), id))},
        {"lts-exp", Functor::exponent(Functor::powerset(id), ab)},
        {"markov", Functor::exponent(Functor::coproduct(Functor::terminal(), Functor::distribution(id)), ab)},
        {"nbhd", Functor::neighbourhood(id)},
        {"kripke-frame", Functor::powerset(id)},
        {"dist", Functor::distribution(id)},
        {"kripke", kripke_functor({"p"})},
    };
}

std::vector<NamedLifting> primitive_liftings() {
    const Step hole = step::embed(fml::top());
    const Functor id = Functor::id();
    const FinSet ab{"a", "b"};
    std::vector<NamedLifting> out = {
        {"const-eq", Functor::constant(ab), step::eq("a")},
        {"prod-pi1", Functor::product(id, id), step::pi1(hole)},
        {"prod-pi2", Functor::product(id, id), step::pi2(hole)},
        {"coprod-isl", Functor::coproduct(id, id), step::isl()},
        {"coprod-inl", Functor::coproduct(id, id), step::inl(hole)},
        {"coprod-inr", Functor::coproduct(id, id), step::inr(hole)},
        {"exp-at", Functor::exponent(id, ab), step::at("a", hole)},
        {"pow-box", Functor::powerset(id), step::box(hole)},
        {"pow-diamond", Functor::powerset(id), step::diamond(hole)},
        {"nbhd-box", Functor::neighbourhood(id), step::nbox(hole)},
    };
    for (auto [n, d] : std::vector<std::pair<std::int64_t, std::int64_t>>{{0, 1}, {1, 3}, {1, 2}, {2, 3}, {1, 1}})
        out.push_back({"dist-prob-" + Rational(n, d).to_string(), Functor::distribution(id), step::prob(Rational(n, d), hole)});
    return out;
}

namespace {

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
bool coin(Rng& rng) { return pick(rng, 2) == 0; }

/// A random composition of d into k positive parts.
std::vector<std::int64_t> composition(std::int64_t d, std::size_t k, Rng& rng) {
    std::vector<std::int64_t> cuts;
    std::vector<std::int64_t> pool;
    for (std::int64_t i = 1; i < d; ++i) pool.push_back(i);
    std::shuffle(pool.begin(), pool.end(), rng);
    cuts.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k - 1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::int64_t> parts;
    std::int64_t prev = 0;
    for (auto c : cuts) {
        parts.push_back(c - prev);
        prev = c;
    }
    parts.push_back(d - prev);
    return parts;
}

}  // namespace

TValue random_value(const Functor& t, const FinSet& x, Rng& rng, std::int64_t d) {
    switch (t.kind()) {
        case Kind::Id:
            if (x.empty()) throw Error("cannot pick a state from an empty carrier");
            return TValue::state(x[pick(rng, x.size())]);
        case Kind::Const: return TValue::constant(t.alphabet()[pick(rng, t.alphabet().size())]);
        case Kind::Prod: return TValue::pair(random_value(t.left(), x, rng, d), random_value(t.right(), x, rng, d));
        case Kind::Coprod:
            return coin(rng) ? TValue::inl(random_value(t.left(), x, rng, d))
                             : TValue::inr(random_value(t.right(), x, rng, d));
        case Kind::Exp: {
            std::vector<TValue> entries;
            for (std::size_t i = 0; i < t.alphabet().size(); ++i) entries.push_back(random_value(t.inner(), x, rng, d));
            return TValue::table(std::move(entries));
        }
        case Kind::Pow: {
            std::vector<TValue> items;
            std::size_t k = pick(rng, 4);
            for (std::size_t i = 0; i < k; ++i) items.push_back(random_value(t.inner(), x, rng, d));
            return TValue::set(std::move(items));
        }
        case Kind::Dist: {
            if (d < 1) throw Error("denominator must be positive");
            std::size_t k = 1 + pick(rng, static_cast<std::size_t>(std::min<std::int64_t>(3, d)));
            auto parts = composition(d, k, rng);
            std::vector<std::pair<TValue, Rational>> w;
            for (auto p : parts) w.emplace_back(random_value(t.inner(), x, rng, d), Rational(p, d));
            return TValue::dist(std::move(w));
        }
        case Kind::Nbhd: {
            std::vector<TValue> sets;
            std::size_t k = pick(rng, 4);
            for (std::size_t i = 0; i < k; ++i) {
                std::vector<TValue> items;
                std::size_t m = pick(rng, 3);
                for (std::size_t j = 0; j < m; ++j) items.push_back(random_value(t.inner(), x, rng, d));
                sets.push_back(TValue::set(std::move(items)));
            }
            return TValue::nbhd(std::move(sets));
        }
    }
    throw std::logic_error("unhandled functor kind");
}

TValue random_lift(const Functor& t, const TValue& v, const FinFun& g, Rng& rng, std::int64_t d) {
    switch (t.kind()) {
        case Kind::Id: {
            std::size_t y = g.cod().index_of(v.symbol());
            std::vector<std::size_t> fibre;
            for (std::size_t i = 0; i < g.dom().size(); ++i)
                if (g(i) == y) fibre.push_back(i);
            if (fibre.empty()) throw Error("lifting needs a surjective map");
            return TValue::state(g.dom()[fibre[pick(rng, fibre.size())]]);
        }
        case Kind::Const: return v;
        case Kind::Prod:
            return TValue::pair(random_lift(t.left(), v.first(), g, rng, d), random_lift(t.right(), v.second(), g, rng, d));
        case Kind::Coprod:
            return v.kind() == TValue::Kind::Inl ? TValue::inl(random_lift(t.left(), v.payload(), g, rng, d))
                                                 : TValue::inr(random_lift(t.right(), v.payload(), g, rng, d));
        case Kind::Exp: {
            std::vector<TValue> entries;
            for (const auto& e : v.items()) entries.push_back(random_lift(t.inner(), e, g, rng, d));
            return TValue::table(std::move(entries));
        }
        case Kind::Pow: {
            std::vector<TValue> items;
            for (const auto& u : v.items()) {
                std::size_t copies = 1 + pick(rng, 2);
                for (std::size_t i = 0; i < copies; ++i) items.push_back(random_lift(t.inner(), u, g, rng, d));
            }
            return TValue::set(std::move(items));
        }
        case Kind::Dist: {
            std::vector<std::pair<TValue, Rational>> w;
            for (std::size_t i = 0; i < v.items().size(); ++i) {
                Rational weight = v.weights()[i];
                Rational unit(1, d);
                if (weight.den() != 0 && !(weight < unit + unit) && d % weight.den() == 0 && coin(rng)) {
                    w.emplace_back(random_lift(t.inner(), v.items()[i], g, rng, d), unit);
                    w.emplace_back(random_lift(t.inner(), v.items()[i], g, rng, d), weight - unit);
                } else {
                    w.emplace_back(random_lift(t.inner(), v.items()[i], g, rng, d), weight);
                }
            }
            return TValue::dist(std::move(w));
        }
        case Kind::Nbhd: {
            Limits lim;
            lim.denominator = d;
            std::vector<TValue> fx = apply_on_set(t.inner(), g.dom(), lim);
            FunctorAction fg(t.inner(), g, lim);
            std::vector<TValue> img;
            for (const auto& u : fx) img.push_back(fg(u));
            std::vector<TValue> sets;
            for (const auto& b : v.items()) {
                std::vector<TValue> pre;
                for (std::size_t i = 0; i < fx.size(); ++i)
                    if (std::binary_search(b.items().begin(), b.items().end(), img[i])) pre.push_back(fx[i]);
                sets.push_back(TValue::set(std::move(pre)));
            }
            // Sets that are not unions of fibres do not change the image.
            std::size_t extra = pick(rng, 3);
            for (std::size_t k = 0; k < extra && !fx.empty(); ++k) {
                std::vector<TValue> s;
                std::set<TValue> hit;
                for (std::size_t i = 0; i < fx.size(); ++i)
                    if (coin(rng)) {
                        s.push_back(fx[i]);
                        hit.insert(img[i]);
                    }
                bool saturated = true;
                for (std::size_t i = 0; i < fx.size() && saturated; ++i)
                    if (hit.count(img[i]) && !std::binary_search(s.begin(), s.end(), fx[i])) saturated = false;
                if (!saturated) sets.push_back(TValue::set(std::move(s)));
            }
            return TValue::nbhd(std::move(sets));
        }
    }
    throw std::logic_error("unhandled functor kind");
}

Coalgebra random_coalgebra(const Functor& t, std::size_t n, Rng& rng, std::int64_t d, const std::string& prefix) {
    FinSet x = FinSet::numbered(prefix, n);
    std::vector<TValue> values;
    for (std::size_t i = 0; i < n; ++i) values.push_back(random_value(t, x, rng, d));
    return Coalgebra(t, x, std::move(values));
}

MorphismSample random_morphism(const Functor& t, std::size_t n, std::size_t m, Rng& rng, std::int64_t d) {
    if (m == 0 || m > n) throw Error("morphism sample needs 0 < target size <= source size");
    Coalgebra target = random_coalgebra(t, m, rng, d, "t");
    FinSet x = FinSet::numbered("s", n);
    std::vector<std::size_t> image(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i) image[order[i]] = i < m ? i : pick(rng, m);
    FinFun g(x, target.carrier(), image);
    std::vector<TValue> values;
    for (std::size_t i = 0; i < n; ++i) values.push_back(random_lift(t, target.at(g(i)), g, rng, d));
    return {Coalgebra(t, x, std::move(values)), std::move(target), std::move(g)};
}

Coalgebra random_mixed_coalgebra(const Functor& t, std::size_t n, Rng& rng, std::int64_t d) {
    if (n == 0 || coin(rng)) return random_coalgebra(t, n, rng, d);
    return random_morphism(t, n, 1 + pick(rng, n), rng, d).source;
}

// ---------------------------------------------------------------------------
// Formulas

namespace {

const std::vector<Rational>& thresholds() {
    static const std::vector<Rational> q{Rational(0), Rational(1, 4), Rational(1, 3), Rational(1, 2),
                                         Rational(2, 3), Rational(3, 4), Rational(1)};
    return q;
}

Formula formula_impl(const Functor& t, std::size_t depth, Rng& rng, int budget);

Step step_impl(const Functor& t, const Functor& sort, std::size_t depth, Rng& rng, int budget) {
    if (budget > 0 && pick(rng, 5) == 0) {
        switch (pick(rng, 3)) {
            case 0: return step::neg(step_impl(t, sort, depth, rng, budget - 1));
            case 1:
                return step::conj(step_impl(t, sort, depth, rng, budget / 2), step_impl(t, sort, depth, rng, budget / 2));
            default:
                return step::disj(step_impl(t, sort, depth, rng, budget / 2), step_impl(t, sort, depth, rng, budget / 2));
        }
    }
    switch (sort.kind()) {
        case Kind::Id: return step::embed(formula_impl(t, depth, rng, budget - 1));
        case Kind::Const: return step::eq(sort.alphabet()[pick(rng, sort.alphabet().size())]);
        case Kind::Prod:
            return coin(rng) ? step::pi1(step_impl(t, sort.left(), depth, rng, budget - 1))
                             : step::pi2(step_impl(t, sort.right(), depth, rng, budget - 1));
        case Kind::Coprod:
            switch (pick(rng, 4)) {
                case 0: return step::isl();
                case 1: return step::isr();
                case 2: return step::inl(step_impl(t, sort.left(), depth, rng, budget - 1));
                default: return step::inr(step_impl(t, sort.right(), depth, rng, budget - 1));
            }
        case Kind::Exp:
            return step::at(sort.alphabet()[pick(rng, sort.alphabet().size())],
                            step_impl(t, sort.inner(), depth, rng, budget - 1));
        case Kind::Pow:
            return coin(rng) ? step::box(step_impl(t, sort.inner(), depth, rng, budget - 1))
                             : step::diamond(step_impl(t, sort.inner(), depth, rng, budget - 1));
        case Kind::Dist:
            return step::prob(thresholds()[pick(rng, thresholds().size())],
                              step_impl(t, sort.inner(), depth, rng, budget - 1));
        case Kind::Nbhd: return step::nbox(step_impl(t, sort.inner(), depth, rng, budget - 1));
    }
    throw std::logic_error("unhandled functor kind");
}

Formula formula_impl(const Functor& t, std::size_t depth, Rng& rng, int budget) {
    if (budget <= 0 || depth == 0) {
        if (depth > 0 && coin(rng)) return fml::next(step_impl(t, t, depth - 1, rng, 0));
        return coin(rng) ? fml::top() : fml::bottom();
    }
    switch (pick(rng, 6)) {
        case 0: return fml::neg(formula_impl(t, depth, rng, budget - 1));
        case 1: return fml::conj(formula_impl(t, depth, rng, budget / 2), formula_impl(t, depth, rng, budget / 2));
        case 2: return fml::disj(formula_impl(t, depth, rng, budget / 2), formula_impl(t, depth, rng, budget / 2));
        case 3: return fml::implies(formula_impl(t, depth, rng, budget / 2), formula_impl(t, depth, rng, budget / 2));
        default: return fml::next(step_impl(t, t, depth - 1, rng, budget - 1));
    }
}

}  // namespace

Formula random_formula(const Functor& t, std::size_t depth, Rng& rng) { return formula_impl(t, depth, rng, 10); }

Step random_step(const Functor& t, const Functor& sort, std::size_t depth, Rng& rng) {
    return step_impl(t, sort, depth, rng, 6);
}

// ---------------------------------------------------------------------------
// Basic modal formulas

namespace {

std::vector<Formula> leaves(const KSyntax& s) {
    std::vector<Formula> out;
    for (const auto& l : s.letters) out.push_back(fml::letter(l));
    if (s.constants) {
        out.push_back(fml::top());
        out.push_back(fml::bottom());
    }
    return out;
}

}  // namespace

KEnumerator::KEnumerator(KSyntax syntax, std::size_t max_size, std::size_t max_depth)
    : syntax_(std::move(syntax)), max_size_(max_size), max_depth_(max_depth) {
    table_.assign(max_size + 1, std::vector<std::vector<Formula>>(max_depth + 1));
    if (max_size == 0) return;
    table_[1][0] = leaves(syntax_);
    for (std::size_t s = 2; s <= max_size; ++s) {
        for (std::size_t d = 0; d <= max_depth; ++d) {
            auto& out = table_[s][d];
            for (const auto& a : table_[s - 1][d]) out.push_back(fml::neg(a));
            if (d > 0) {
                for (const auto& a : table_[s - 1][d - 1]) out.push_back(fml::box(a));
                if (syntax_.diamonds)
                    for (const auto& a : table_[s - 1][d - 1]) out.push_back(fml::diamond(a));
            }
            for (std::size_t s1 = 1; s1 + 1 < s; ++s1) {
                std::size_t s2 = s - 1 - s1;
                for (std::size_t d1 = 0; d1 <= d; ++d1)
                    for (std::size_t d2 = 0; d2 <= d; ++d2) {
                        if (std::max(d1, d2) != d) continue;
                        for (const auto& a : table_[s1][d1])
                            for (const auto& b : table_[s2][d2]) {
                                out.push_back(fml::conj(a, b));
                                out.push_back(fml::disj(a, b));
                                if (syntax_.implications) out.push_back(fml::implies(a, b));
                            }
                    }
            }
        }
    }
}

std::vector<Formula> KEnumerator::all() const {
    std::vector<Formula> out;
    for (std::size_t s = 1; s <= max_size_; ++s)
        for (std::size_t d = 0; d <= max_depth_; ++d) out.insert(out.end(), table_[s][d].begin(), table_[s][d].end());
    return out;
}

std::size_t KEnumerator::count() const {
    std::size_t n = 0;
    for (std::size_t s = 1; s <= max_size_; ++s)
        for (std::size_t d = 0; d <= max_depth_; ++d) n += table_[s][d].size();
    return n;
}

namespace {

Formula random_k(const KSyntax& syn, const std::vector<Formula>& leaf, std::size_t size, std::size_t depth, Rng& rng) {
    if (size <= 1) return leaf[pick(rng, leaf.size())];
    std::vector<int> choices{0};  // negation
    if (depth > 0) {
        choices.push_back(1);
        if (syn.diamonds) choices.push_back(2);
    }
    if (size >= 3) {
        choices.push_back(3);
        choices.push_back(4);
        if (syn.implications) choices.push_back(5);
    }
    int c = choices[pick(rng, choices.size())];
    switch (c) {
        case 0: return fml::neg(random_k(syn, leaf, size - 1, depth, rng));
        case 1: return fml::box(random_k(syn, leaf, size - 1, depth - 1, rng));
        case 2: return fml::diamond(random_k(syn, leaf, size - 1, depth - 1, rng));
        default: {
            std::size_t s1 = 1 + pick(rng, size - 2);
            Formula a = random_k(syn, leaf, s1, depth, rng);
            Formula b = random_k(syn, leaf, size - 1 - s1, depth, rng);
            if (c == 3) return fml::conj(a, b);
            if (c == 4) return fml::disj(a, b);
            return fml::implies(a, b);
        }
    }
}

}  // namespace

Formula random_k_formula(const KSyntax& syntax, std::size_t size, std::size_t max_depth, Rng& rng) {
    auto leaf = leaves(syntax);
    if (leaf.empty()) throw Error("formula syntax without leaves");
    return random_k(syntax, leaf, size, max_depth, rng);
}

}  // namespace coalg::gen
