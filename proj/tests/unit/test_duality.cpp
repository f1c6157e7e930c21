#include <doctest.h>

#include <set>

#include "coalg/duality.hpp"
#include "coalg/error.hpp"
#include "coalg/gen.hpp"
#include "coalg/logic.hpp"

using namespace coalg;

namespace {

/// Meet-preserving maps A -> B by exhaustive search over all element maps.
std::vector<std::vector<Element>> meet_maps_oracle(const FinBA& a, const FinBA& b) {
    auto ea = a.elements();
    auto eb = b.elements();
    std::vector<std::vector<Element>> out;
    std::vector<std::size_t> img(ea.size(), 0);
    for (;;) {
        bool ok = eb[img.back()] == b.top();
        for (std::size_t i = 0; ok && i < ea.size(); ++i)
            for (std::size_t j = 0; ok && j < ea.size(); ++j)
                ok = eb[img[FinBA::code(ea[i] & ea[j])]] == (eb[img[i]] & eb[img[j]]);
        if (ok) {
            std::vector<Element> m;
            for (auto i : img) m.push_back(eb[i]);
            out.push_back(std::move(m));
        }
        std::size_t k = 0;
        while (k < img.size() && ++img[k] == eb.size()) img[k++] = 0;
        if (k == img.size()) break;
    }
    return out;
}

TValue st(const std::string& s) { return TValue::state(s); }

Coalgebra frame(const std::map<std::string, std::vector<std::string>>& succ) {
    std::vector<std::string> names;
    std::map<std::string, TValue> m;
    for (auto& [k, v] : succ) {
        names.push_back(k);
        std::vector<TValue> s;
        for (auto& x : v) s.push_back(st(x));
        m.emplace(k, TValue::set(s));
    }
    return Coalgebra::from_map(Functor::powerset(Functor::id()), FinSet(names), m);
}

FinBA ba(std::size_t atoms) { return FinBA(FinSet::numbered("a", atoms)); }

}  // namespace

TEST_CASE("rank-1 equations") {
    auto k = LFunctor::K();
    CHECK(k.equations.size() == 2);
    CHECK(to_string(k.equations[1].first) == "[](a & b)");
    CHECK_THROWS_AS(LFunctor::parse({{"box", 1}}, {"[][]a = top"}), Error);
    CHECK_THROWS_AS(LFunctor::parse({{"box", 1}}, {"a = []a"}), Error);
    CHECK_THROWS_AS(LFunctor::parse({{"box", 1}}, {"d(a) = top"}), ParseError);
    CHECK_THROWS_AS(LFunctor::parse({{"d", 2}}, {"d(a) = top"}), ParseError);
    auto sym = LFunctor::parse({{"d", 2}}, {"d(a, b) = d(b, a)", "d(a, ~a) = bot"});
    CHECK(!rank1_violation(sym.equations[0].first));
    auto l = L_presented(FinBA::two(), sym);
    // Generators d(x,y) over {bot, top}: d(b,t)=d(t,b), d(b,t)=bot, d(t,b)=bot.
    CHECK(l.algebra().num_atoms() == 4);
    CHECK(l.apply("d", {FinBA::two().bottom(), FinBA::two().top()}) == l.algebra().bottom());
}

TEST_CASE("L presented: sizes, relations, universal property") {
    auto l2 = L_presented(FinBA::two());
    CHECK(l2.algebra().num_atoms() == 2);
    CHECK(l2.algebra().size() == 4);
    CHECK(l2.box(FinBA::two().top()) == l2.algebra().top());
    CHECK(l2.box(FinBA::two().bottom()) != l2.algebra().bottom());
    CHECK(l2.box(FinBA::two().bottom()) != l2.algebra().top());

    FinBA a4 = ba(2);
    auto l4 = L_presented(a4);
    CHECK(l4.algebra().num_atoms() == 4);
    Element g = a4.atom(0);
    CHECK(l4.box(g & ~g) == (l4.box(g) & l4.box(~g)));

    for (std::size_t n : {1, 2, 3, 4}) CHECK(L_presented(ba(n)).algebra().num_atoms() == ba(n).size());

    // Every meet-preserving map A -> B extends to exactly one morphism L A -> B.
    for (std::size_t n : {1, 2, 3}) {
        FinBA a = ba(n);
        auto l = L_presented(a);
        auto elems = a.elements();
        for (const FinBA& b : {FinBA::two(), FinBA(FinSet{"u", "v"})}) {
            auto maps = meet_maps_oracle(a, b);
            auto homs = hom_set(l.algebra(), b);
            for (const auto& m : maps) {
                std::size_t matching = 0;
                for (const auto& h : homs) {
                    bool same = true;
                    for (std::size_t i = 0; same && i < elems.size(); ++i) same = h(l.box(elems[i])) == m[i];
                    matching += same;
                }
                CHECK(matching == 1);
            }
            CHECK(maps.size() == homs.size());
        }
    }
    Limits small;
    small.generators = 3;
    CHECK_THROWS_AS(L_presented(a4, LFunctor::K(), small), CapExceeded);
}

TEST_CASE("L via duality and the filter description") {
    auto p = Functor::powerset(Functor::id());
    auto d2 = L_via_duality(ba(2), p);
    CHECK(d2.algebra.num_atoms() == 4);
    REQUIRE(d2.iso);
    CHECK(d2.iso->iso());
    auto d3 = L_via_duality(ba(3), p);
    CHECK(d3.algebra.num_atoms() == 8);
    REQUIRE(d3.iso);
    CHECK(d3.iso->iso());
    CHECK(L_via_duality(FinBA::two(), Functor::parse("C{a,b}")).algebra.num_atoms() == 2);
    CHECK(!L_via_duality(FinBA::two(), Functor::parse("C{a,b}")).iso);

    // The iso sends box(a) to the sets below a.
    FinBA a = ba(3);
    auto l = L_presented(a);
    for (const auto& e : a.elements()) {
        Element img = (*d3.iso)(l.box(e));
        for (std::size_t j = 0; j < d3.values.size(); ++j) {
            std::vector<std::string> names;
            for (auto& s : d3.values[j].items()) names.push_back(s.symbol());
            CHECK(img.test(j) == a.element(names).is_subset_of(e));
        }
    }
    // Filters: same atom count and box behaviour up to the iso.
    auto lf = L_filters(a);
    CHECK(lf.algebra.num_atoms() == l.algebra().num_atoms());
    for (const auto& e : a.elements()) CHECK(lf.box(e).count() == l.box(e).count());
}

TEST_CASE("delta examples and naturality") {
    auto dx = delta(FinSet{"x"});
    FinBA px(FinSet{"x"});
    CHECK(dx.iso(dx.lpx.box(px.top())) == dx.ptx.algebra.top());
    CHECK(check_delta_generators(dx));

    auto dxy = delta(FinSet{"x", "y"});
    FinBA pxy(FinSet{"x", "y"});
    CHECK(dxy.lpx.algebra().num_atoms() == 4);
    CHECK(dxy.ptx.algebra.num_atoms() == 4);
    CHECK(dxy.iso.iso());
    Element img = dxy.iso(dxy.lpx.box(pxy.element({"x"})));
    CHECK(dxy.ptx.algebra.name(img) == "{{x},{}}");

    std::size_t squares = 0;
    for (std::size_t n = 0; n <= 2; ++n)
        for (std::size_t m = 0; m <= 2; ++m)
            for_each_function(FinSet::numbered("x", n), FinSet::numbered("y", m), [&](const FinFun& f) {
                auto r = check_delta_naturality(f);
                CHECK(r.holds);
                ++squares;
            });
    CHECK(squares == 11);
}

TEST_CASE("dual algebras") {
    Coalgebra c = frame({{"s", {}}, {"t", {"s"}}});
    auto d = dual_algebra(c);
    FinBA p(c.carrier());
    CHECK(d.algebra.box(p.bottom()) == p.element({"s"}));
    CHECK(d.algebra.box(p.top()) == p.top());
    Coalgebra cyc = frame({{"x", {"y"}}, {"y", {"z"}}, {"z", {"x"}}});
    auto dc = dual_algebra(cyc);
    FinBA pc(cyc.carrier());
    CHECK(dc.algebra.box(pc.element({"x"})) == pc.element({"z"}));

    // The box agrees with the one-step semantics of [] on random frames.
    gen::Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        Coalgebra r = gen::random_coalgebra(Functor::powerset(Functor::id()), 1 + rng() % 4, rng, 1);
        auto dr = dual_algebra(r);
        FinBA pr(r.carrier());
        for (const auto& y : pr.elements()) {
            auto lifted = lifting_extension(step::box(step::embed(fml::top())), r.functor(), r.carrier(), y);
            std::set<TValue> ok(lifted.begin(), lifted.end());
            Element expect(r.size());
            for (std::size_t x = 0; x < r.size(); ++x)
                if (ok.count(r.at(x))) expect.set(x);
            CHECK(dr.algebra.box(y) == expect);
        }
    }
    CHECK_THROWS_AS(dual_algebra(Coalgebra::from_map(Functor::parse("C{a} * Id"), FinSet{"s"},
                                                     {{"s", TValue::pair(TValue::constant("a"), st("s"))}})),
                    Error);
}

TEST_CASE("morphisms dualise to modal-algebra morphisms and semantics commutes") {
    gen::Rng rng(9);
    Functor t = kripke_functor({"p"});
    gen::KSyntax syn{{"p"}, true, true, true};
    for (int i = 0; i < 15; ++i) {
        auto s = gen::random_morphism(t, 4, 2, rng, 1);
        auto ds = dual_algebra(s.source);
        auto dt = dual_algebra(s.target);
        CHECK(is_dual_morphism(s.morphism, ds, dt));
        BAHom inv = stone_P(s.morphism);
        for (int j = 0; j < 10; ++j) {
            Formula f = gen::random_k_formula(syn, 1 + rng() % 8, 3, rng);
            CHECK(eval(f, s.source) == inv(eval(f, s.target)));
        }
    }
    // A non-morphism fails.
    Coalgebra a = frame({{"x", {}}});
    Coalgebra b = frame({{"z", {"z"}}});
    FinFun f = FinFun::from_names(FinSet{"x"}, FinSet{"z"}, {"z"});
    CHECK(!is_dual_morphism(f, dual_algebra(a), dual_algebra(b)));
}

TEST_CASE("Lindenbaum tower sizes and the first level") {
    LindenbaumTower t0({}, 2);
    CHECK(t0.algebra(0).num_atoms() == 1);
    CHECK(t0.algebra(1).num_atoms() == 2);
    CHECK(t0.algebra(1).size() == 4);
    CHECK(t0.algebra(2).num_atoms() == 4);
    CHECK(t0.algebra(2).size() == 16);
    LindenbaumTower t1({"p"}, 1);
    CHECK(t1.algebra(1).num_atoms() == 8);
    CHECK(t1.algebra(1).size() == 256);
    CHECK(LindenbaumTower({"p"}, 2).algebra(2).num_atoms() == 512);
    CHECK(LindenbaumTower({}, 1, {}, true).algebra(1).num_atoms() == 2);
    Limits small;
    small.cardinality = 100;
    CHECK_THROWS_AS(LindenbaumTower({"p"}, 2, small), CapExceeded);

    LevelMap map(t0);
    Element bot = map(parse_formula("false"), 1);
    Element boxbot = map(parse_formula("[]false"), 1);
    Element nboxbot = map(parse_formula("~[]false"), 1);
    Element top = map(parse_formula("true"), 1);
    std::set<Element> four{bot, boxbot, nboxbot, top};
    CHECK(four.size() == 4);
    auto level1 = t0.algebra(1).elements();
    CHECK(four == std::set<Element>(level1.begin(), level1.end()));
    CHECK(map(parse_formula("O [] {false}"), 1) == boxbot);
    CHECK_THROWS_AS(map(parse_formula("[]false"), 0), Error);

    LindenbaumTower pow1({}, 1, {}, true);
    LevelMap pmap(pow1);
    CHECK(pmap(parse_formula("O [] {false}"), 1).count() == 1);
    CHECK_THROWS_AS(LindenbaumTower({"p"}, 1, {}, true), Error);
}

TEST_CASE("level maps commute with the embeddings") {
    LindenbaumTower t({"p"}, 2);
    LevelMap map(t);
    gen::Rng rng(4);
    gen::KSyntax syn{{"p"}, true, true, true};
    BAHom e0 = t.embedding(0), e1 = t.embedding(1);
    CHECK(e0.injective());
    CHECK(e1.injective());
    for (int i = 0; i < 200; ++i) {
        Formula f = gen::random_k_formula(syn, 1 + rng() % 9, 1, rng);
        std::size_t d = k_depth(f, t.functor());
        CHECK(d <= 1);
        CHECK(map(f, 2) == e1(map(f, 1)));
        if (d == 0) CHECK(map(f, 1) == e0(map(f, 0)));
    }
    CHECK(k_depth(parse_formula("p & []q"), kripke_functor({"p", "q"})) == 1);
    CHECK(k_depth(parse_formula("O pi1 = p"), kripke_functor({"p"})) == 0);
    CHECK(k_depth(parse_formula("[]<>p"), kripke_functor({"p"})) == 2);
}

TEST_CASE("kvalid examples and countermodels") {
    auto k = kvalid(parse_formula("O [](p -> q) -> (O []p -> O []q)"), 1);
    CHECK(k.valid);
    CHECK(k.letters == std::vector<std::string>{"p", "q"});
    CHECK(kvalid(parse_formula("[]true"), 0).valid);
    auto t = kvalid(parse_formula("[]p -> p"), 1);
    CHECK(!t.valid);
    REQUIRE(t.countermodel);
    CHECK(t.countermodel->size() == 1);
    CHECK(t.countermodel_checked);
    CHECK(t.state == "0[]");
    auto four = kvalid(parse_formula("[]p -> [][]p"), 1);
    CHECK(!four.valid);
    CHECK(four.countermodel_checked);
    CHECK(four.depth == 2);
    CHECK(kvalid(parse_formula("<>p -> ~[]~p"), 1).valid);
    CHECK(kvalid(parse_formula("p | ~p"), 0).valid);
    CHECK(!kvalid(parse_formula("<>true"), 0).valid);
}

TEST_CASE("kvalid agrees with the tree-model oracle on random formulas") {
    Functor t = kripke_functor({"p"});
    Coalgebra tm2 = tree_model(t, 2);
    Evaluator ev(tm2);
    gen::Rng rng(6);
    gen::KSyntax syn{{"p"}, true, true, true};
    std::size_t valid = 0;
    for (int i = 0; i < 150; ++i) {
        Formula f = gen::random_k_formula(syn, 1 + rng() % 9, 2, rng);
        auto r = kvalid(f, 1);
        CHECK(r.valid == ev(f).all());
        if (!r.valid) CHECK(r.countermodel_checked);
        valid += r.valid;
    }
    CHECK(valid > 0);
}

TEST_CASE("theories of tree-model states are the atoms") {
    for (auto [k, n] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}}) {
        LindenbaumTower t(default_letters(k), n);
        auto r = check_theories(t);
        CHECK(r.bijective);
        CHECK(r.characteristic_ok);
        // Trees are named as in tree_model.
        Coalgebra tm = tree_model(t.functor(), n);
        for (std::size_t x = 0; x < tm.size(); ++x) CHECK(t.tree_name(n, r.theory[x]) == tm.carrier()[x]);
    }
}

TEST_CASE("L A -> A morphisms versus meet-preserving self-maps") {
    for (std::size_t n : {1, 2}) {
        FinBA a = ba(n);
        auto ours = meet_preserving_self_maps(a);
        auto oracle = meet_maps_oracle(a, a);
        CHECK(std::set<std::vector<Element>>(ours.begin(), ours.end()) ==
              std::set<std::vector<Element>>(oracle.begin(), oracle.end()));
    }
    auto r2 = check_present_fun(ba(1));
    CHECK(r2.ok());
    CHECK(r2.homs == 2);
    auto r4 = check_present_fun(ba(2));
    CHECK(r4.ok());
    CHECK(r4.homs == 16);
    auto r8 = check_present_fun(ba(3));
    CHECK(r8.ok());
    CHECK(r8.homs == 512);
}
