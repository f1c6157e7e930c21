#include <doctest.h>

#include <map>
#include <set>

#include "coalg/coalgebra.hpp"
#include "coalg/error.hpp"
#include "coalg/gen.hpp"

using namespace coalg;

namespace {

TValue st(const std::string& s) { return TValue::state(s); }
TValue set(std::vector<std::string> xs) {
    std::vector<TValue> v;
    for (auto& x : xs) v.push_back(st(x));
    return TValue::set(v);
}

Coalgebra kripke_frame(const std::map<std::string, std::vector<std::string>>& succ) {
    std::vector<std::string> names;
    std::map<std::string, TValue> m;
    for (auto& [k, v] : succ) {
        names.push_back(k);
        m.emplace(k, set(v));
    }
    return Coalgebra::from_map(Functor::powerset(Functor::id()), FinSet(names), m);
}

/// Classical relational bisimilarity for P(Id): greatest fixpoint over pairs.
std::vector<std::vector<bool>> relational_bisim(const Coalgebra& c) {
    const std::size_t n = c.size();
    std::vector<std::vector<std::size_t>> succ(n);
    for (std::size_t i = 0; i < n; ++i)
        for (auto& s : c.at(i).items()) succ[i].push_back(c.carrier().index_of(s.symbol()));
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, true));
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                if (!r[a][b]) continue;
                auto covered = [&](std::size_t x, std::size_t y, bool flip) {
                    for (auto s : succ[x]) {
                        bool ok = false;
                        for (auto t : succ[y]) ok = ok || (flip ? r[t][s] : r[s][t]);
                        if (!ok) return false;
                    }
                    return true;
                };
                if (!covered(a, b, false) || !covered(b, a, true)) {
                    r[a][b] = false;
                    changed = true;
                }
            }
    }
    return r;
}

/// Table-filling DFA minimisation over C{0,1} * Id^{alphabet}.
std::vector<std::vector<bool>> dfa_equivalent(const Coalgebra& c) {
    const std::size_t n = c.size();
    std::vector<std::vector<bool>> distinct(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) distinct[a][b] = c.at(a).first().symbol() != c.at(b).first().symbol();
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                if (distinct[a][b]) continue;
                const auto& ta = c.at(a).second().items();
                const auto& tb = c.at(b).second().items();
                for (std::size_t k = 0; k < ta.size(); ++k)
                    if (distinct[c.carrier().index_of(ta[k].symbol())][c.carrier().index_of(tb[k].symbol())]) {
                        distinct[a][b] = true;
                        changed = true;
                        break;
                    }
            }
    }
    for (auto& row : distinct) row.flip();
    return distinct;
}

}  // namespace

TEST_CASE("morphism examples") {
    Coalgebra loop = kripke_frame({{"z", {"z"}}});
    Coalgebra self = kripke_frame({{"x", {"x"}}});
    Coalgebra dead = kripke_frame({{"x", {}}});
    FinFun f = FinFun::from_names(FinSet{"x"}, FinSet{"z"}, {"z"});
    CHECK(is_morphism(FinFun::identity(loop.carrier()), loop, loop));
    CHECK(is_morphism(f, self, loop));
    auto bad = is_morphism(f, dead, loop);
    CHECK(!bad);
    CHECK(bad.witness == std::optional<std::string>("x"));
}

TEST_CASE("behavioural equivalence examples") {
    auto r = behavioural_equivalence(kripke_frame({{"a", {"a"}}, {"b", {"c"}}, {"c", {"b"}}}));
    CHECK(r.result.num_blocks() == 1);
    auto r2 = behavioural_equivalence(kripke_frame({{"s", {}}, {"t", {"s"}}}));
    CHECK(r2.result.num_blocks() == 2);
    REQUIRE(r2.trace.size() == 2);
    CHECK(r2.trace[0].num_blocks() == 1);
    CHECK(r2.separation_level(0, 1) == std::optional<std::size_t>(1));

    Functor t = Functor::parse("C{h,t} * Id^{a}");
    Coalgebra c = Coalgebra::from_map(t, FinSet{"u", "v"},
                                      {{"u", TValue::pair(TValue::constant("h"), TValue::table({st("v")}))},
                                       {"v", TValue::pair(TValue::constant("h"), TValue::table({st("u")}))}});
    CHECK(behavioural_equivalence(c).result.num_blocks() == 1);
    CHECK(brute_force_equivalence(c).num_blocks() == 1);
}

TEST_CASE("cross-coalgebra oracle examples") {
    Coalgebra abc = kripke_frame({{"a", {"a"}}, {"b", {"c"}}, {"c", {"b"}}});
    CHECK(brute_force_bisimilarity(abc, abc).size() == 9);
    Coalgebra dead = kripke_frame({{"x", {}}});
    Coalgebra loop = kripke_frame({{"z", {"z"}}});
    CHECK(brute_force_bisimilarity(dead, loop).empty());
    auto diag = brute_force_bisimilarity(dead, dead);
    CHECK(diag.size() == 1);
    Limits lim;
    lim.brute_force_states = 2;
    CHECK_THROWS_AS(brute_force_bisimilarity(abc, abc, lim), CapExceeded);
}

TEST_CASE("refinement agrees with relational bisimilarity on random frames") {
    gen::Rng rng(11);
    Functor t = Functor::powerset(Functor::id());
    for (int i = 0; i < 60; ++i) {
        Coalgebra c = gen::random_mixed_coalgebra(t, 1 + rng() % 6, rng, 1);
        auto p = behavioural_equivalence(c).result;
        auto r = relational_bisim(c);
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = 0; b < c.size(); ++b) CHECK(p.same_block(a, b) == r[a][b]);
        CHECK(p == brute_force_equivalence(c));
    }
}

TEST_CASE("refinement agrees with table-filling DFA minimisation") {
    gen::Rng rng(5);
    Functor t = Functor::parse("C{0,1} * Id^{a,b}");
    for (int i = 0; i < 60; ++i) {
        Coalgebra c = gen::random_mixed_coalgebra(t, 1 + rng() % 7, rng, 1);
        auto p = behavioural_equivalence(c).result;
        auto e = dfa_equivalent(c);
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = 0; b < c.size(); ++b) CHECK(p.same_block(a, b) == e[a][b]);
    }
    // Four states, two equivalent accepting sinks.
    auto tv = [](const char* o, const char* a, const char* b) {
        return TValue::pair(TValue::constant(o), TValue::table({st(a), st(b)}));
    };
    Coalgebra dfa = Coalgebra::from_map(t, FinSet{"s0", "s1", "s2", "s3"},
                                        {{"s0", tv("0", "s1", "s2")},
                                         {"s1", tv("0", "s3", "s0")},
                                         {"s2", tv("1", "s2", "s2")},
                                         {"s3", tv("1", "s3", "s3")}});
    auto m = minimize(dfa);
    CHECK(m.quotient.size() == 3);
    CHECK(is_morphism(m.map, dfa, m.quotient));
    CHECK(behavioural_equivalence(m.quotient).result.num_blocks() == 3);
}

TEST_CASE("oracle equivalence and trace properties across system functors") {
    gen::Rng rng(3);
    for (const auto& [name, t] : gen::system_functors()) {
        for (int i = 0; i < 8; ++i) {
            std::int64_t d = 1 + static_cast<std::int64_t>(rng() % 4);
            Coalgebra c = gen::random_mixed_coalgebra(t, 1 + rng() % 5, rng, d);
            auto r = behavioural_equivalence(c);
            CHECK_MESSAGE(r.result == brute_force_equivalence(c), name);
            CHECK(r.rounds() <= c.size());
            for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].refines(r.trace[k - 1]));
            auto m = minimize(c);
            CHECK(is_morphism(m.map, c, m.quotient));
            auto m2 = minimize(m.quotient);
            CHECK(m2.quotient.size() == m.quotient.size());
            CHECK(m2.map.injective());
        }
    }
}

TEST_CASE("lifted coalgebras carry their morphism and preserve behaviour") {
    gen::Rng rng(17);
    for (const auto& [name, t] : gen::system_functors()) {
        for (int i = 0; i < 5; ++i) {
            auto s = gen::random_morphism(t, 4, 2, rng, 2);
            CHECK_MESSAGE(is_morphism(s.morphism, s.source, s.target), name);
            auto related = brute_force_bisimilarity(s.source, s.target);
            std::set<std::pair<std::string, std::string>> rel(related.begin(), related.end());
            for (const auto& x : s.source.carrier()) CHECK(rel.count({x, s.morphism(x)}) == 1);
        }
    }
}

TEST_CASE("graph of a function is a bisimulation iff it is a morphism") {
    // Small exhaustive version; the acceptance suite runs the full pool.
    FinSet x{"a", "b"};
    Functor t = Functor::powerset(Functor::id());
    auto values = apply_on_set(t, x);
    std::size_t checks = 0;
    for (const auto& va : values)
        for (const auto& vb : values) {
            Coalgebra c(t, x, {va, vb});
            for_each_function(x, x, [&](const FinFun& f) {
                bool graph = true;
                for (std::size_t i = 0; i < 2; ++i) {
                    std::set<std::string> img, tgt;
                    for (auto& s : c.at(i).items()) img.insert(f(s.symbol()));
                    for (auto& s : c.at(f(i)).items()) tgt.insert(s.symbol());
                    graph = graph && img == tgt;
                }
                CHECK(graph == is_morphism(f, c, c).holds);
                ++checks;
            });
        }
    CHECK(checks == 64);
}

TEST_CASE("tree models") {
    Functor k0 = kripke_functor({});
    Functor k1 = kripke_functor({"p"});
    CHECK(tree_model(k0, 0).size() == 1);
    CHECK(tree_model(k0, 0).at(0) == TValue::pair(TValue::constant("0"), TValue::set({})));
    CHECK(tree_model(k0, 1).size() == 2);
    CHECK(tree_model(k0, 2).size() == 4);
    CHECK(tree_model(k0, 3).size() == 16);
    CHECK(tree_model(k1, 1).size() == 8);
    CHECK(tree_model(k1, 2).size() == 512);
    Limits small;
    small.cardinality = 100;
    CHECK_THROWS_AS(tree_model(k1, 2, small), CapExceeded);
    for (std::size_t d = 0; d <= 2; ++d) {
        auto m = tree_model(k1, d);
        CHECK(behavioural_equivalence(m).result.num_blocks() == m.size());
    }
    CHECK(kripke_letters(k1) == std::optional<std::vector<std::string>>({"p"}));
    CHECK(valuation_symbol({"q", "p"}) == "p+q");
}

TEST_CASE("generated sub-coalgebras") {
    Coalgebra c = kripke_frame({{"a", {"b"}}, {"b", {}}, {"c", {"a"}}});
    auto g = generated_subcoalgebra(c, "a");
    CHECK(g.carrier() == FinSet{"a", "b"});
    CHECK_THROWS_AS(generated_subcoalgebra(c, "zz"), Error);
}
