// SPDX-License-Identifier: Apache-2.0
#include "coalg/selftest.hpp"

#include <chrono>
#include <set>
#include <sstream>

#include "coalg/boolalg.hpp"
#include "coalg/coalgebra.hpp"
#include "coalg/duality.hpp"
#include "coalg/error.hpp"
#include "coalg/formula.hpp"
#include "coalg/gen.hpp"
#include "coalg/io.hpp"
#include "coalg/logic.hpp"

namespace coalg {

namespace {

/// Thrown by `require` to stop a property at its first counterexample.
struct Failure {
    std::string detail;
};

struct Ctx {
    gen::Rng rng;
    Limits limits;
    std::size_t checks = 0;

    void require(bool ok, const std::function<std::string()>& detail) {
        ++checks;
        if (!ok) throw Failure{detail()};
    }
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
};

std::string show(const Coalgebra& c) { return io::write_coalgebra(c); }

std::string show(const FinFun& f) {
    std::string s = "{";
    for (std::size_t i = 0; i < f.dom().size(); ++i) s += (i ? "," : "") + f.dom()[i] + "->" + f.cod()[f(i)];
    return s + "}";
}

// --- functor-core ----------------------------------------------------------

void functor_laws(Ctx& c) {
    Limits lim = c.limits;
    lim.denominator = 2;
    for (const auto& [name, t] : gen::system_functors())
        for (std::size_t n = 0; n <= 3; ++n) {
            if (cardinality(t, n, 2) > 20000) continue;
            FinSet x = FinSet::numbered("x", n), y = FinSet::numbered("y", 2), z = FinSet::numbered("z", 2);
            std::vector<std::size_t> fi(n), gi(2);
            for (auto& v : fi) v = c.pick(2);
            for (auto& v : gi) v = c.pick(2);
            FinFun f(x, y, fi), g(y, z, gi);
            auto r = check_functor_laws(t, f, g, lim);
            c.require(r.ok(), [&] { return name + ": functor laws fail for f=" + show(f) + " g=" + show(g); });
        }
}

void enumeration(Ctx& c) {
    for (const auto& [name, t] : gen::system_functors())
        for (std::int64_t d = 1; d <= 3; ++d)
            for (std::size_t n = 0; n <= 2; ++n) {
                if (cardinality(t, n, d) > 20000) continue;
                Limits lim = c.limits;
                lim.denominator = d;
                auto v = apply_on_set(t, FinSet::numbered("x", n), lim);
                c.require(v.size() == cardinality(t, n, d), [&] {
                    return name + ": |T X| = " + std::to_string(v.size()) + " for |X| = " + std::to_string(n);
                });
            }
}

// --- coalgebra -----------------------------------------------------------

void refinement_oracle(Ctx& c) {
    for (const auto& [name, t] : gen::system_functors())
        for (int i = 0; i < 12; ++i) {
            std::int64_t d = 1 + static_cast<std::int64_t>(c.pick(4));
            Coalgebra k = gen::random_mixed_coalgebra(t, 1 + c.pick(5), c.rng, d);
            auto p = behavioural_equivalence(k, c.limits).result;
            auto q = brute_force_equivalence(k, c.limits);
            for (std::size_t a = 0; a < k.size(); ++a)
                for (std::size_t b = 0; b < k.size(); ++b)
                    c.require(p.same_block(a, b) == q.same_block(a, b), [&] {
                        return name + ": refinement and brute force disagree on " + k.carrier()[a] + "," +
                               k.carrier()[b] + " in " + show(k);
                    });
        }
}

void graph_bisimulation(Ctx& c) {
    Functor t = Functor::powerset(Functor::id());
    for (std::size_t n = 1; n <= 2; ++n) {
        FinSet x = FinSet::numbered("x", n);
        auto values = apply_on_set(t, x);
        std::vector<std::size_t> pick(n, 0);
        for (;;) {
            std::vector<TValue> s;
            for (auto i : pick) s.push_back(values[i]);
            Coalgebra k(t, x, s);
            for_each_function(x, x, [&](const FinFun& f) {
                bool graph = true;
                for (std::size_t i = 0; i < n; ++i) {
                    std::set<std::string> img, tgt;
                    for (auto& v : k.at(i).items()) img.insert(f(v.symbol()));
                    for (auto& v : k.at(f(i)).items()) tgt.insert(v.symbol());
                    graph = graph && img == tgt;
                }
                c.require(graph == is_morphism(f, k, k).holds,
                          [&] { return "graph of " + show(f) + " misjudged on " + show(k); });
            });
            std::size_t q = 0;
            while (q < n && ++pick[q] == values.size()) pick[q++] = 0;
            if (q == n) break;
        }
    }
}

void morphisms(Ctx& c) {
    for (const auto& [name, t] : gen::system_functors())
        for (int i = 0; i < 4; ++i) {
            auto s = gen::random_morphism(t, 2 + c.pick(3), 1 + c.pick(2), c.rng, 2);
            c.require(is_morphism(s.morphism, s.source, s.target, c.limits).holds,
                      [&] { return name + ": lifted map is not a morphism"; });
            auto m = minimize(s.source, c.limits);
            c.require(is_morphism(m.map, s.source, m.quotient, c.limits).holds,
                      [&] { return name + ": quotient map is not a morphism for " + show(s.source); });
            c.require(minimize(m.quotient, c.limits).quotient.size() == m.quotient.size(),
                      [&] { return name + ": minimisation is not idempotent on " + show(s.source); });
        }
}

// --- mlogic ----------------------------------------------------------------

void lifting_naturality(Ctx& c) {
    Limits lim = c.limits;
    lim.denominator = 2;
    for (const auto& l : gen::primitive_liftings())
        for (std::size_t n = 0; n <= 2; ++n)
            for (std::size_t m = 0; m <= 2; ++m)
                for_each_function(FinSet::numbered("x", n), FinSet::numbered("y", m), [&](const FinFun& f) {
                    auto r = check_naturality(l.step, l.functor, f, lim);
                    c.require(r.holds, [&] { return l.name + ": naturality fails for f=" + show(f); });
                });
}

void invariance(Ctx& c) {
    for (const auto& [name, t] : gen::system_functors())
        for (int i = 0; i < 6; ++i) {
            auto s = gen::random_morphism(t, 2 + c.pick(3), 1 + c.pick(2), c.rng, 2);
            Evaluator es(s.source, c.limits), et(s.target, c.limits);
            for (int j = 0; j < 4; ++j) {
                Formula f = gen::random_formula(t, 1 + c.pick(3), c.rng);
                StateSet a = es(f), b = et(f);
                for (std::size_t x = 0; x < s.source.size(); ++x)
                    c.require(a.test(x) == b.test(s.morphism(x)), [&] {
                        return name + ": " + to_string(f) + " not invariant at " + s.source.carrier()[x];
                    });
            }
        }
}

void distinguishing(Ctx& c) {
    for (const auto& [name, t] : gen::system_functors())
        for (int i = 0; i < 6; ++i) {
            Coalgebra k = gen::random_mixed_coalgebra(t, 2 + c.pick(4), c.rng, 1 + c.pick(3));
            Distinguisher dist(k, c.limits);
            Evaluator ev(k, c.limits);
            const auto& p = dist.refinement().result;
            for (std::size_t x = 0; x < k.size(); ++x)
                for (std::size_t y = 0; y < k.size(); ++y) {
                    auto f = dist(x, y);
                    c.require(f.has_value() != p.same_block(x, y),
                              [&] { return name + ": formula presence wrong for " + show(k); });
                    if (!f) continue;
                    const StateSet& e = ev.extension(*f);
                    c.require(e.test(x) && !e.test(y) && modal_depth(*f) <= dist.refinement().rounds(), [&] {
                        return name + ": " + to_string(*f) + " does not separate " + k.carrier()[x] + " from " +
                               k.carrier()[y] + " in " + show(k);
                    });
                }
        }
}

// --- boolalg ---------------------------------------------------------------

void representation(Ctx& c) {
    for (std::size_t n = 0; n <= 8; ++n) {
        BAHom h = hat_map(FinBA(FinSet::numbered("a", n)), c.limits);
        c.require(h.iso(), [&] { return "hat map not bijective for " + std::to_string(n) + " atoms"; });
    }
    for (int i = 0; i < 10; ++i) {
        std::size_t g = 1 + c.pick(3);
        Presentation p{FinSet::numbered("g", g), {}};
        auto leaf = [&] { return bterm::gen(p.generators[c.pick(g)]); };
        for (std::size_t r = c.pick(3); r > 0; --r)
            p.relations.push_back({c.pick(2) ? bterm::conj(leaf(), leaf()) : bterm::neg(leaf()), leaf()});
        auto real = realize(p, c.limits);
        BAHom h = hat_map(real.algebra, c.limits);
        std::set<Element> img;
        for (const auto& e : real.algebra.elements(c.limits)) img.insert(h(e));
        c.require(img.size() == real.algebra.size(),
                  [&] { return "hat map not injective on " + io::write_presentation(p); });
    }
    for (std::size_t n = 0; n <= 4; ++n)
        for (std::size_t m = 0; m <= 4; ++m) {
            auto d = duality_isos(FinBA(FinSet::numbered("a", n)), FinSet::numbered("x", m), c.limits);
            c.require(d.ok(), [&] { return "duality isos fail for " + std::to_string(n) + "/" + std::to_string(m); });
        }
}

// --- duality ---------------------------------------------------------------

void l_presented(Ctx& c) {
    for (std::size_t n = 1; n <= 4; ++n) {
        FinBA a(FinSet::numbered("a", n));
        auto v = L_via_duality(a, Functor::powerset(Functor::id()), c.limits);
        c.require(v.iso && v.iso->iso() && v.iso->source().num_atoms() == a.size(), [&] {
            return "L A is not iso to P P S A with |A| atoms for |A| = " + std::to_string(a.size());
        });
    }
}

void delta_naturality(Ctx& c) {
    for (std::size_t n = 0; n <= 3; ++n)
        for (std::size_t m = 0; m <= 3; ++m)
            for_each_function(FinSet::numbered("x", n), FinSet::numbered("y", m), [&](const FinFun& f) {
                auto r = check_delta_naturality(f, c.limits);
                c.require(r.holds, [&] {
                    return "delta square fails for f=" + show(f) + (r.witness ? " at Z=" + *r.witness : "");
                });
            });
}

void delta_iso(Ctx& c) {
    for (std::size_t n = 0; n <= 3; ++n) {
        auto d = delta(FinSet::numbered("x", n), c.limits);
        c.require(check_delta_generators(d), [&] { return "delta is not the expected iso for |X| = " + std::to_string(n); });
    }
}

void dual_algebras(Ctx& c) {
    Functor t = kripke_functor({"p"});
    for (int i = 0; i < 20; ++i) {
        auto s = gen::random_morphism(t, 2 + c.pick(3), 1 + c.pick(2), c.rng, 1);
        auto ds = dual_algebra(s.source), dt = dual_algebra(s.target);
        // The box must satisfy the K laws when given as a bare map.
        ModalAlgebra::from_map(ds.algebra.base(), [&](const Element& e) { return ds.algebra.box(e); }, c.limits);
        c.require(is_dual_morphism(s.morphism, ds, dt, c.limits),
                  [&] { return "inverse image is not a dual morphism for " + show(s.source); });
    }
}

void present_fun(Ctx& c) {
    for (std::size_t n = 1; n <= 3; ++n) {
        auto r = check_present_fun(FinBA(FinSet::numbered("a", n)), c.limits);
        c.require(r.ok(), [&] {
            return "L A -> A morphisms (" + std::to_string(r.homs) + ") vs meet-preserving maps (" +
                   std::to_string(r.meet_maps) + ") for " + std::to_string(n) + " atoms";
        });
    }
}

void lindenbaum_levels(Ctx& c) {
    struct Case {
        std::size_t k, n, atoms;
    };
    for (auto [k, n, atoms] : std::vector<Case>{{0, 0, 1}, {0, 1, 2}, {0, 2, 4}, {0, 3, 16}, {1, 1, 8}, {1, 2, 512}}) {
        LindenbaumTower tower(default_letters(k), n, c.limits);
        c.require(tower.algebra(n).num_atoms() == atoms, [&] {
            return "level " + std::to_string(n) + " with " + std::to_string(k) + " letters has " +
                   std::to_string(tower.algebra(n).num_atoms()) + " atoms";
        });
    }
}

void kvalid_oracle(Ctx& c) {
    Functor t = kripke_functor({"p"});
    Coalgebra tm = tree_model(t, 2, c.limits);
    Evaluator ev(tm, c.limits);
    LindenbaumTower tower({"p"}, 2, c.limits);
    LevelMap map(tower);
    gen::KSyntax syn{{"p"}, true, true, true};
    gen::KEnumerator en(syn, 5, 2);
    auto check = [&](const Formula& f) {
        std::size_t d = k_depth(f, t);
        bool valid = map(f, d).all();
        c.require(valid == ev(f).all(), [&] { return "validity of " + to_string(f) + " disagrees with tree models"; });
    };
    for (const auto& f : en.all()) check(f);
    for (int i = 0; i < 200; ++i) check(gen::random_k_formula(syn, 1 + c.pick(12), 2, c.rng));
}

void theories(Ctx& c) {
    for (auto [k, n] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}, {1, 1}, {1, 2}}) {
        LindenbaumTower tower(default_letters(k), n, c.limits);
        auto r = check_theories(tower, c.limits);
        c.require(r.bijective && (n == 2 && k == 1 ? true : r.characteristic_ok), [&] {
            return "theories are not a bijection for k=" + std::to_string(k) + ", n=" + std::to_string(n);
        });
    }
}

void known_validities(Ctx& c) {
    struct Case {
        const char* text;
        std::size_t letters;
        bool valid;
    };
    for (auto [text, k, valid] : std::vector<Case>{{"[](p -> q) -> ([]p -> []q)", 2, true},
                                                  {"[]true", 0, true},
                                                  {"[]p -> p", 1, false},
                                                  {"[]p -> [][]p", 1, false}}) {
        auto r = kvalid(parse_formula(text), k, c.limits);
        c.require(r.valid == valid && (valid || r.countermodel_checked),
                  [&] { return std::string("kvalid misjudges ") + text; });
    }
}

void round_trip(Ctx& c) {
    for (const auto& [name, t] : gen::system_functors()) {
        c.require(Functor::parse(t.to_string()) == t, [&] { return name + ": functor text does not round-trip"; });
        for (int i = 0; i < 4; ++i) {
            Coalgebra k = gen::random_coalgebra(t, 1 + c.pick(4), c.rng, 1 + c.pick(4));
            std::string text = io::write_coalgebra(k);
            c.require(io::write_coalgebra(io::read_coalgebra(text)) == text,
                      [&] { return name + ": document does not round-trip: " + text; });
            Formula f = gen::random_formula(t, 2, c.rng);
            c.require(equal(parse_formula(to_string(f)), f),
                      [&] { return name + ": formula does not round-trip: " + to_string(f); });
        }
    }
    Presentation p{FinSet{"g", "h"}, {{parse_bterm("g & ~h"), parse_bterm("bot")}}};
    std::string text = io::write_presentation(p);
    c.require(io::write_presentation(io::read_presentation(text)) == text, [&] { return "BA document: " + text; });
}

struct Property {
    const char* name;
    void (*run)(Ctx&);
};

const std::vector<Property>& properties() {
    static const std::vector<Property> all = {
        {"functor-laws", functor_laws},
        {"enumeration-cardinality", enumeration},
        {"refinement-oracle", refinement_oracle},
        {"graph-bisimulation", graph_bisimulation},
        {"morphisms-minimize", morphisms},
        {"lifting-naturality", lifting_naturality},
        {"invariance", invariance},
        {"distinguishing-formulas", distinguishing},
        {"representation", representation},
        {"L-presented", l_presented},
        {"delta-naturality", delta_naturality},
        {"delta-iso", delta_iso},
        {"dual-algebras", dual_algebras},
        {"present-fun", present_fun},
        {"lindenbaum-levels", lindenbaum_levels},
        {"kvalid-oracle", kvalid_oracle},
        {"theories", theories},
        {"known-validities", known_validities},
        {"round-trip", round_trip},
    };
    return all;
}

}  // namespace

std::vector<std::string> selftest_properties() {
    std::vector<std::string> out;
    for (const auto& p : properties()) out.emplace_back(p.name);
    return out;
}

SelftestReport run_selftest(std::uint64_t seed, const std::optional<std::string>& only, const Limits& limits,
                            const std::function<void(const PropertyResult&)>& progress) {
    if (only) {
        auto names = selftest_properties();
        if (std::find(names.begin(), names.end(), *only) == names.end())
            throw Error("unknown selftest property \"" + *only + "\"");
    }
    SelftestReport report;
    report.seed = seed;
    for (std::size_t i = 0; i < properties().size(); ++i) {
        const auto& p = properties()[i];
        if (only && *only != p.name) continue;
        // Each property has its own stream, so --only reproduces it exactly.
        Ctx ctx{gen::Rng(seed * 1000003 + i), limits};
        PropertyResult r;
        r.name = p.name;
        auto start = std::chrono::steady_clock::now();
        try {
            p.run(ctx);
            r.passed = true;
        } catch (const Failure& f) {
            r.detail = f.detail;
        } catch (const CapExceeded&) {
            throw;
        } catch (const Error& e) {
            r.detail = std::string("error: ") + e.what();
        }
        r.checks = ctx.checks;
        r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        report.results.push_back(r);
        if (progress) progress(r);
        if (!r.passed) {
            report.failed = p.name;
            report.repro = "coalg selftest --seed " + std::to_string(seed) + " --only " + p.name;
            break;
        }
    }
    return report;
}

}  // namespace coalg
