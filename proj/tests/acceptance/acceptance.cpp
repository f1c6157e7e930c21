// SPDX-License-Identifier: Apache-2.0
// Acceptance checks. Each criterion prints one PASS/FAIL line; the oracles
// below are written against the public API only and avoid reusing the
// library's own checking routines where a direct computation is possible.
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coalg/boolalg.hpp"
#include "coalg/coalgebra.hpp"
#include "coalg/duality.hpp"
#include "coalg/formula.hpp"
#include "coalg/functor.hpp"
#include "coalg/gen.hpp"
#include "coalg/io.hpp"
#include "coalg/logic.hpp"
#include "coalg/selftest.hpp"

using namespace coalg;

namespace {

struct Outcome {
    bool ok = true;
    std::string summary;
    std::string failure;

    void fail(const std::string& why) {
        if (ok) failure = why;
        ok = false;
    }
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

std::string show(const FinFun& f) {
    std::string s = "{";
    for (std::size_t i = 0; i < f.dom().size(); ++i) s += (i ? "," : "") + f.dom()[i] + "->" + f.cod()[f(i)];
    return s + "}";
}

// --- oracles ---------------------------------------------------------------

/// Largest congruence, by enumerating every partition (restricted growth
/// strings) and joining those whose quotient map makes related states have
/// equal T q images.
std::vector<std::size_t> largest_congruence(const Coalgebra& c) {
    const std::size_t n = c.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
        return parent[i] == i ? i : parent[i] = find(parent[i]);
    };
    if (n == 0) return {};
    std::vector<std::size_t> rgs(n, 0);
    Limits lim = c.resolve({});
    for (;;) {
        std::size_t blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        FinSet q = FinSet::numbered("b", blocks);
        FinFun qf(c.carrier(), q, rgs);
        FunctorAction tq(c.functor(), qf, lim);
        std::vector<TValue> img;
        for (std::size_t i = 0; i < n; ++i) img.push_back(tq(c.at(i)));
        bool congruence = true;
        for (std::size_t i = 0; i < n && congruence; ++i)
            for (std::size_t j = i + 1; j < n && congruence; ++j)
                if (rgs[i] == rgs[j] && !(img[i] == img[j])) congruence = false;
        if (congruence)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (rgs[i] == rgs[j]) parent[find(i)] = find(j);
        // next restricted growth string
        std::size_t k = n;
        while (k-- > 1) {
            std::size_t mx = *std::max_element(rgs.begin(), rgs.begin() + k);
            if (rgs[k] <= mx) {
                ++rgs[k];
                std::fill(rgs.begin() + k + 1, rgs.end(), 0);
                break;
            }
        }
        if (k == 0 || k == static_cast<std::size_t>(-1)) break;
    }
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = find(i);
    return out;
}

struct CorpusEntry {
    std::string functor_name;
    Coalgebra coalgebra;
    std::vector<std::size_t> classes;  // oracle
};

const std::vector<CorpusEntry>& corpus() {
    static const std::vector<CorpusEntry> entries = [] {
        std::vector<CorpusEntry> out;
        gen::Rng rng(20261014);
        auto shapes = gen::system_functors();
        for (int i = 0; i < 200; ++i) {
            const auto& [name, t] = shapes[i % shapes.size()];
            std::size_t states = 1 + rng() % 6;
            std::int64_t d = 1 + static_cast<std::int64_t>(rng() % 4);
            Coalgebra c = gen::random_mixed_coalgebra(t, states, rng, d);
            out.push_back({name, c, largest_congruence(c)});
        }
        return out;
    }();
    return entries;
}

// K formulas over extensional trees, evaluated directly on the sugar.
struct TreeUniverse {
    std::vector<std::string> letters;
    std::vector<std::uint32_t> label;                 // valuation bits
    std::vector<std::vector<std::size_t>> children;   // indices into the universe
    std::vector<std::size_t> level_size;              // |T_0|, |T_1|, ...
};

/// T_0 = valuations with no children, T_{m+1} = valuations times subsets of
/// T_m. Trees are deduplicated, so T_m is contained in T_{m+1}.
TreeUniverse trees(std::size_t k, std::size_t depth) {
    TreeUniverse u;
    u.letters = default_letters(k);
    std::map<std::pair<std::uint32_t, std::vector<std::size_t>>, std::size_t> index;
    auto add = [&](std::uint32_t v, std::vector<std::size_t> ch) {
        auto key = std::make_pair(v, ch);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        index.emplace(key, u.label.size());
        u.label.push_back(v);
        u.children.push_back(std::move(ch));
        return u.label.size() - 1;
    };
    std::vector<std::size_t> level;
    for (std::uint32_t v = 0; v < (1u << k); ++v) level.push_back(add(v, {}));
    u.level_size.push_back(level.size());
    for (std::size_t m = 0; m < depth; ++m) {
        std::set<std::size_t> next;
        for (std::uint32_t v = 0; v < (1u << k); ++v)
            for (std::uint64_t s = 0; s < (std::uint64_t{1} << level.size()); ++s) {
                std::vector<std::size_t> ch;
                for (std::size_t i = 0; i < level.size(); ++i)
                    if (s >> i & 1) ch.push_back(level[i]);
                std::sort(ch.begin(), ch.end());
                next.insert(add(v, ch));
            }
        level.assign(next.begin(), next.end());
        u.level_size.push_back(level.size());
    }
    return u;
}

class TreeEvaluator {
public:
    explicit TreeEvaluator(const TreeUniverse& u) : u_(u) {}

    std::vector<bool> operator()(const Formula& f) {
        auto it = memo_.find(f.get());
        if (it != memo_.end()) return it->second;
        const std::size_t n = u_.label.size();
        std::vector<bool> r(n);
        switch (f->op) {
            case FormulaOp::True: r.assign(n, true); break;
            case FormulaOp::False: break;
            case FormulaOp::Letter: {
                auto pos = std::find(u_.letters.begin(), u_.letters.end(), f->name) - u_.letters.begin();
                if (pos == static_cast<long>(u_.letters.size())) throw std::runtime_error("unknown letter " + f->name);
                for (std::size_t i = 0; i < n; ++i) r[i] = u_.label[i] >> pos & 1;
                break;
            }
            case FormulaOp::Not: {
                auto a = (*this)(f->lhs);
                for (std::size_t i = 0; i < n; ++i) r[i] = !a[i];
                break;
            }
            case FormulaOp::And:
            case FormulaOp::Or:
            case FormulaOp::Implies: {
                auto a = (*this)(f->lhs), b = (*this)(f->rhs);
                for (std::size_t i = 0; i < n; ++i)
                    r[i] = f->op == FormulaOp::And ? a[i] && b[i] : f->op == FormulaOp::Or ? a[i] || b[i] : !a[i] || b[i];
                break;
            }
            case FormulaOp::Box:
            case FormulaOp::Diamond: {
                auto a = (*this)(f->lhs);
                bool box = f->op == FormulaOp::Box;
                for (std::size_t i = 0; i < n; ++i) {
                    bool v = box;
                    for (auto c : u_.children[i])
                        if (a[c] != box) v = !box;
                    r[i] = v;
                }
                break;
            }
            default: throw std::runtime_error("tree evaluator: unsupported operator in " + to_string(f));
        }
        keep_.push_back(f);
        return memo_[f.get()] = r;
    }

    bool valid(const Formula& f) {
        auto r = (*this)(f);
        return std::all_of(r.begin(), r.end(), [](bool b) { return b; });
    }

private:
    const TreeUniverse& u_;
    std::map<const FormulaNode*, std::vector<bool>> memo_;
    std::vector<Formula> keep_;
};

// --- criteria --------------------------------------------------------------

Outcome criterion1() {
    Outcome o;
    auto start = Clock::now();
    const auto& entries = corpus();
    std::size_t pairs = 0, oracle_pairs = 0;
    std::set<std::string> shapes;
    for (const auto& e : entries) {
        const auto& c = e.coalgebra;
        shapes.insert(e.functor_name);
        auto ref = behavioural_equivalence(c);
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = 0; b < c.size(); ++b) {
                ++pairs;
                if (ref.result.same_block(a, b) != (e.classes[a] == e.classes[b]))
                    o.fail(e.functor_name + ": disagreement on " + c.carrier()[a] + "," + c.carrier()[b] + " in " +
                           io::write_coalgebra(c));
            }
        if (2 * c.size() <= Limits{}.brute_force_states) {
            auto rel = brute_force_bisimilarity(c, c);
            std::set<std::pair<std::string, std::string>> r(rel.begin(), rel.end());
            for (std::size_t a = 0; a < c.size(); ++a)
                for (std::size_t b = 0; b < c.size(); ++b) {
                    ++oracle_pairs;
                    bool same = r.count({c.carrier()[a], c.carrier()[b]}) == 1;
                    if (same != ref.result.same_block(a, b))
                        o.fail(e.functor_name + ": brute_force_bisimilarity disagrees in " + io::write_coalgebra(c));
                }
        }
        // the library's brute-force oracle on the coalgebra itself
        auto bf = brute_force_equivalence(c);
        if (!(bf == ref.result)) o.fail(e.functor_name + ": brute_force_equivalence disagrees");
    }
    double ms = ms_since(start);
    if (ms >= 30000) o.fail("took " + std::to_string(ms) + " ms");
    o.summary = std::to_string(entries.size()) + " coalgebras over " + std::to_string(shapes.size()) + " shapes, " +
                std::to_string(pairs) + " pairs vs partition oracle, " + std::to_string(oracle_pairs) +
                " vs cross-oracle, " + std::to_string(static_cast<long>(ms)) + " ms";
    return o;
}

Outcome criterion2() {
    Outcome o;
    const FinSet pool{"s0", "s1", "s2"};
    Functor t = Functor::powerset(Functor::id());
    // all structures on carriers {s0}, {s0,s1}; a fixed sample on all of pool
    std::vector<Coalgebra> systems;
    gen::Rng rng(7);
    for (std::size_t n = 1; n <= 3; ++n) {
        FinSet x(std::vector<std::string>(pool.begin(), pool.begin() + n));
        std::uint64_t total = sat::pow(sat::pow2(n), n);
        std::vector<std::uint64_t> codes;
        if (n < 3) {
            for (std::uint64_t k = 0; k < total; ++k) codes.push_back(k);
        } else {
            std::set<std::uint64_t> pick;
            while (pick.size() < 48) pick.insert(rng() % total);
            codes.assign(pick.begin(), pick.end());
        }
        for (auto code : codes) {
            std::vector<TValue> s;
            for (std::size_t i = 0; i < n; ++i) {
                std::uint64_t succ = code >> (n * i) & ((1u << n) - 1);
                std::vector<TValue> items;
                for (std::size_t j = 0; j < n; ++j)
                    if (succ >> j & 1) items.push_back(TValue::state(x[j]));
                s.push_back(TValue::set(items));
            }
            systems.emplace_back(t, x, s);
        }
    }
    auto succ = [](const Coalgebra& c, std::size_t i) {
        std::vector<std::size_t> out;
        for (const auto& v : c.at(i).items()) out.push_back(c.carrier().index_of(v.symbol()));
        return out;
    };
    std::size_t checks = 0, morphisms = 0;
    for (const auto& a : systems)
        for (const auto& b : systems)
            for_each_function(a.carrier(), b.carrier(), [&](const FinFun& f) {
                // graph of f as a relation: back and forth conditions
                bool bisim = true;
                for (std::size_t x = 0; x < a.size() && bisim; ++x) {
                    auto sx = succ(a, x), sy = succ(b, f(x));
                    for (auto x1 : sx)
                        if (std::find(sy.begin(), sy.end(), f(x1)) == sy.end()) bisim = false;
                    for (auto y1 : sy)
                        if (std::none_of(sx.begin(), sx.end(), [&](std::size_t x1) { return f(x1) == y1; }))
                            bisim = false;
                }
                bool morphism = is_morphism(f, a, b).holds;
                ++checks;
                morphisms += morphism;
                if (bisim != morphism)
                    o.fail("graph of " + show(f) + " from " + io::write_coalgebra(a) + " to " + io::write_coalgebra(b));
            });
    if (checks < 10000) o.fail("only " + std::to_string(checks) + " checks");
    o.summary = std::to_string(systems.size()) + " systems, " + std::to_string(checks) + " function checks, " +
                std::to_string(morphisms) + " morphisms";
    return o;
}

Outcome criterion3() {
    Outcome o;
    std::size_t squares = 0, elements = 0;
    for (const auto& l : gen::primitive_liftings()) {
        bool dist = l.functor.kind() == Functor::Kind::Dist;
        for (std::int64_t d = 1; d <= (dist ? 3 : 1); ++d) {
            Limits lim;
            lim.denominator = d;
            for (std::size_t n = 0; n <= 3; ++n)
                for (std::size_t m = 0; m <= 3; ++m) {
                    FinSet x = FinSet::numbered("x", n), y = FinSet::numbered("y", m);
                    auto tx = apply_on_set(l.functor, x, lim);
                    for_each_function(x, y, [&](const FinFun& f) {
                        FunctorAction tf(l.functor, f, lim);
                        for (std::uint64_t p = 0; p < (std::uint64_t{1} << m); ++p) {
                            StateSet py(m), px(n);
                            for (std::size_t j = 0; j < m; ++j) py[j] = p >> j & 1;
                            for (std::size_t i = 0; i < n; ++i) px[i] = py[f(i)];
                            auto ey = lifting_extension(l.step, l.functor, y, py, lim);
                            auto ex = lifting_extension(l.step, l.functor, x, px, lim);
                            std::set<TValue> sy(ey.begin(), ey.end()), sx(ex.begin(), ex.end());
                            for (const auto& t : tx) {
                                ++elements;
                                if ((sy.count(tf(t)) == 1) != (sx.count(t) == 1))
                                    o.fail(l.name + " (d=" + std::to_string(d) + "): square fails for f=" + show(f) +
                                           " at " + t.to_string());
                            }
                        }
                        ++squares;
                        if (!check_naturality(l.step, l.functor, f, lim).holds)
                            o.fail(l.name + ": check_naturality rejects f=" + show(f));
                    }, lim);
                }
        }
    }
    o.summary = std::to_string(gen::primitive_liftings().size()) + " liftings, " + std::to_string(squares) +
                " maps, " + std::to_string(elements) + " element comparisons";
    return o;
}

Outcome criterion4() {
    Outcome o;
    gen::Rng rng(4);
    auto shapes = gen::system_functors();
    std::size_t pairs = 0, comparisons = 0;
    for (int i = 0; i < 500; ++i) {
        const auto& [name, t] = shapes[i % shapes.size()];
        std::size_t src = 2 + rng() % 4;
        auto s = gen::random_morphism(t, src, 1 + rng() % std::min<std::size_t>(src, 3), rng, 1 + static_cast<std::int64_t>(rng() % 3));
        // morphism check by hand: T f . xi = zeta . f
        FunctorAction tf(t, s.morphism, s.source.resolve({}));
        for (std::size_t x = 0; x < s.source.size(); ++x)
            if (!(tf(s.source.at(x)) == s.target.at(s.morphism(x)))) o.fail(name + ": generated map is not a morphism");
        Formula f = gen::random_formula(t, rng() % 4, rng);
        if (modal_depth(f) > 3) o.fail("formula too deep: " + to_string(f));
        StateSet a = eval(f, s.source), b = eval(f, s.target);
        for (std::size_t x = 0; x < s.source.size(); ++x) {
            ++comparisons;
            if (a[x] != b[s.morphism(x)])
                o.fail(name + ": " + to_string(f) + " differs at " + s.source.carrier()[x] + " in " +
                       io::write_coalgebra(s.source));
        }
        ++pairs;
    }
    o.summary = std::to_string(pairs) + " (morphism, formula) pairs, " + std::to_string(comparisons) + " states compared";
    return o;
}

Outcome criterion5() {
    Outcome o;
    std::size_t pairs = 0, max_depth = 0;
    for (const auto& e : corpus()) {
        const auto& c = e.coalgebra;
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = 0; b < c.size(); ++b) {
                if (e.classes[a] == e.classes[b]) continue;
                ++pairs;
                auto d = distinguishing_formula(c, c.carrier()[a], c.carrier()[b]);
                if (!d.formula) {
                    o.fail(e.functor_name + ": no formula for " + c.carrier()[a] + "," + c.carrier()[b]);
                    continue;
                }
                StateSet ext = eval(*d.formula, c);
                std::size_t depth = modal_depth(*d.formula);
                max_depth = std::max(max_depth, depth);
                if (!ext[a] || ext[b])
                    o.fail(e.functor_name + ": " + to_string(*d.formula) + " does not separate " + c.carrier()[a] +
                           " from " + c.carrier()[b] + " in " + io::write_coalgebra(c));
                if (depth > d.rounds || d.rounds != behavioural_equivalence(c).rounds())
                    o.fail(e.functor_name + ": depth " + std::to_string(depth) + " exceeds rounds");
            }
    }
    o.summary = std::to_string(pairs) + " non-bisimilar pairs separated, max depth " + std::to_string(max_depth);
    return o;
}

Outcome criterion6() {
    Outcome o;
    std::size_t algebras = 0;
    auto injective = [&](const FinBA& a, const std::string& what) {
        BAHom h = hat_map(a);
        std::set<Element> img;
        auto pts = stone_S(a);
        for (const auto& e : a.elements()) {
            // hat(e) = { p | p(e) = 1 }
            Element expected(a.num_atoms());
            for (std::size_t p = 0; p < pts.homs.size(); ++p) expected[p] = pts.homs[p](e).all();
            if (h(e) != expected) o.fail(what + ": hat image differs from point evaluation at " + a.name(e));
            img.insert(h(e));
        }
        if (img.size() != a.size()) o.fail(what + ": hat map not injective");
        ++algebras;
    };
    for (std::size_t n = 0; n <= 12; ++n) injective(FinBA(FinSet::numbered("a", n)), std::to_string(n) + " atoms");
    gen::Rng rng(6);
    std::size_t realized = 0;
    std::vector<FinBA> small;
    for (int i = 0; i < 120; ++i) {
        std::size_t g = 1 + rng() % 4;
        Presentation p{FinSet::numbered("g", g), {}};
        auto leaf = [&]() -> BTerm {
            switch (rng() % 6) {
                case 0: return bterm::neg(bterm::gen(p.generators[rng() % g]));
                case 1: return bterm::bot();
                default: return bterm::gen(p.generators[rng() % g]);
            }
        };
        for (std::size_t r = rng() % 4; r > 0; --r) {
            BTerm l = rng() % 2 ? bterm::conj(leaf(), leaf()) : bterm::disj(leaf(), leaf());
            p.relations.push_back({l, leaf()});
        }
        auto real = realize(p);
        if (real.algebra.num_atoms() > 12) continue;
        ++realized;
        injective(real.algebra, "realize(" + io::write_presentation(p) + ")");
        if (real.algebra.num_atoms() <= 4) small.push_back(real.algebra);
    }
    for (std::size_t n = 0; n <= 4; ++n) small.push_back(FinBA(FinSet::numbered("a", n)));
    std::size_t iso_checks = 0;
    for (const auto& a : small)
        for (std::size_t m = 0; m <= 4; ++m) {
            FinSet x = FinSet::numbered("x", m);
            auto d = duality_isos(a, x);
            ++iso_checks;
            if (!d.ok()) o.fail("duality_isos fail for " + std::to_string(a.num_atoms()) + " atoms, |X| = " + std::to_string(m));
            // independent: |S A| counted through all maps to 2, |S P X| = |X|
            if (hom_set(a, FinBA::two()).size() != a.num_atoms()) o.fail("|S A| != atoms");
            auto spx = hom_set(stone_P(x), FinBA::two());
            if (spx.size() != m) o.fail("|S P X| != |X|");
            // sigma(x) evaluates at x: the point sends {x} to top
            StoneSpace points = stone_S(stone_P(x));
            for (std::size_t i = 0; i < m; ++i) {
                Element single(m);
                single.set(i);
                const BAHom& pt = points.homs.at(d.sigma(i));
                if (!pt(single).all()) o.fail("sigma(" + x[i] + ") is not evaluation at " + x[i]);
            }
            if (!d.rho.iso()) o.fail("rho not iso");
        }
    o.summary = std::to_string(algebras) + " algebras injective (" + std::to_string(realized) + " from realize), " +
                std::to_string(iso_checks) + " duality iso checks";
    return o;
}

/// Index of a subset Z (as member names) among the values of P(S A) or T X.
std::optional<std::size_t> value_index(const std::vector<TValue>& values, const std::set<std::string>& members) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::set<std::string> m;
        for (const auto& v : values[i].items()) m.insert(v.symbol());
        if (m == members) return i;
    }
    return std::nullopt;
}

Outcome criterion7() {
    Outcome o;
    Functor pid = Functor::powerset(Functor::id());
    std::string sizes;
    for (std::size_t k = 1; k <= 4; ++k) {
        FinBA a(FinSet::numbered("a", k));
        auto l = L_presented(a);
        auto v = L_via_duality(a, pid);
        if (l.algebra().num_atoms() != a.size())
            o.fail("|atoms(L A)| = " + std::to_string(l.algebra().num_atoms()) + " for |A| = " + std::to_string(a.size()));
        if (!v.iso || !v.iso->iso()) {
            o.fail("no iso L_presented -> L_via_duality for |A| = " + std::to_string(a.size()));
            continue;
        }
        // box(b) must go to { Z in P S A | Z <= b }
        auto pts = stone_S(a).points;
        for (const auto& b : a.elements()) {
            Element expected(v.values.size());
            for (std::size_t i = 0; i < v.values.size(); ++i) {
                bool inside = true;
                for (const auto& z : v.values[i].items()) inside = inside && b[pts.index_of(z.symbol())];
                expected[i] = inside;
            }
            if ((*v.iso)(l.box(b)) != expected) o.fail("iso misplaces box(" + a.name(b) + ")");
        }
        sizes += (sizes.empty() ? "" : ",") + std::to_string(a.size());
    }
    // delta
    std::size_t maps = 0;
    std::vector<Delta> deltas;
    for (std::size_t n = 0; n <= 3; ++n) {
        deltas.push_back(delta(FinSet::numbered("x", n)));
        const auto& d = deltas.back();
        if (!d.iso.iso()) o.fail("delta not iso for |X| = " + std::to_string(n));
        if (d.lpx.algebra().num_atoms() != (std::size_t{1} << n)) o.fail("|atoms(L P X)| != |P X|");
    }
    for (std::size_t n = 0; n <= 3; ++n)
        for (std::size_t m = 0; m <= 3; ++m) {
            const Delta& dx = deltas[n];
            const Delta& dy = deltas[m];
            for_each_function(dx.x, dy.x, [&](const FinFun& f) {
                ++maps;
                for (std::uint64_t u = 0; u < (std::uint64_t{1} << m); ++u) {
                    Element U(m), pre(n);
                    for (std::size_t j = 0; j < m; ++j) U[j] = u >> j & 1;
                    for (std::size_t i = 0; i < n; ++i) pre[i] = U[f(i)];
                    // delta_X(L(P f)(box U)) = delta_X(box(f^-1 U))
                    Element lhs = dx.iso(dx.lpx.box(pre));
                    // P(T f)(delta_Y(box U)): Z is in iff f[Z] is in delta_Y(box U)
                    Element dyu = dy.iso(dy.lpx.box(U));
                    Element rhs(dx.ptx.values.size());
                    for (std::size_t z = 0; z < dx.ptx.values.size(); ++z) {
                        std::set<std::string> image;
                        for (const auto& s : dx.ptx.values[z].items()) image.insert(f(s.symbol()));
                        auto idx = value_index(dy.ptx.values, image);
                        rhs[z] = idx && dyu[*idx];
                    }
                    // and the generator goes to { Z | f[Z] <= U }
                    Element expected(dx.ptx.values.size());
                    for (std::size_t z = 0; z < dx.ptx.values.size(); ++z) {
                        bool inside = true;
                        for (const auto& s : dx.ptx.values[z].items()) inside = inside && U[dy.x.index_of(f(s.symbol()))];
                        expected[z] = inside;
                    }
                    if (lhs != rhs || lhs != expected)
                        o.fail("delta square fails for f=" + show(f) + " at U=" + FinBA(dy.x).name(U));
                }
                if (!check_delta_naturality(f).holds) o.fail("check_delta_naturality rejects f=" + show(f));
            });
        }
    o.summary = "L A iso for |A| in {" + sizes + "}, delta iso for |X| <= 3 and natural on " + std::to_string(maps) +
                " maps";
    return o;
}

/// Maps A -> A preserving top and binary meets, by backtracking over element
/// codes: assigning in code order, every meet of two assigned elements is
/// already assigned since a & b <= a.
std::set<std::vector<std::uint64_t>> meet_maps(const FinBA& a) {
    const std::uint64_t n = a.size();
    std::set<std::vector<std::uint64_t>> out;
    std::vector<std::uint64_t> m(n);
    std::function<void(std::uint64_t)> go = [&](std::uint64_t i) {
        if (i == n) {
            out.insert(m);
            return;
        }
        for (std::uint64_t v = 0; v < n; ++v) {
            if (i == n - 1 && v != n - 1) continue;  // top to top
            bool ok = true;
            // i & j < i for j < i, so its image is already fixed
            for (std::uint64_t j = 0; j < i && ok; ++j) ok = m[i & j] == (v & m[j]);
            if (!ok) continue;
            m[i] = v;
            go(i + 1);
        }
    };
    go(0);
    return out;
}

Outcome criterion8() {
    Outcome o;
    std::string counts;
    for (std::size_t k = 1; k <= 3; ++k) {
        FinBA a(FinSet::numbered("a", k));
        auto oracle = meet_maps(a);
        auto l = L_presented(a);
        auto homs = hom_set(l.algebra(), a);
        std::set<std::vector<std::uint64_t>> image;
        for (const auto& h : homs) {
            std::vector<std::uint64_t> m;
            for (std::uint64_t c = 0; c < a.size(); ++c) m.push_back(FinBA::code(h(l.box(a.from_code(c)))));
            if (!oracle.count(m)) o.fail("h . box is not meet-preserving for |A| = " + std::to_string(a.size()));
            image.insert(m);
        }
        if (image.size() != homs.size()) o.fail("h -> h . box not injective for |A| = " + std::to_string(a.size()));
        if (image != oracle) o.fail("h -> h . box not surjective for |A| = " + std::to_string(a.size()));
        if (meet_preserving_self_maps(a).size() != oracle.size()) o.fail("library meet-map count differs");
        if (!check_present_fun(a).ok()) o.fail("check_present_fun fails");
        counts += (counts.empty() ? "" : ", ") + std::string("|A|=") + std::to_string(a.size()) + ": " +
                  std::to_string(homs.size());
    }
    o.summary = "homs = meet-preserving maps with bijection (" + counts + ")";
    return o;
}

Outcome criterion9() {
    Outcome o;
    // (a)
    TreeUniverse u = trees(1, 2);
    TreeEvaluator oracle(u);
    gen::KSyntax syn{{"p"}, true, true, true};
    gen::KEnumerator en(syn, 7, 2);
    auto all = en.all();
    gen::Rng rng(9);
    std::vector<Formula> sample = all;
    for (int i = 0; i < 1000; ++i) sample.push_back(gen::random_k_formula(syn, 1 + rng() % 12, 2, rng));
    std::size_t valid = 0, max_size = 0;
    for (const auto& f : sample) {
        max_size = std::max(max_size, formula_size(f));
        auto r = kvalid(f, 1);
        bool expected = oracle.valid(f);
        valid += expected;
        if (r.valid != expected) o.fail("kvalid says " + std::string(r.valid ? "valid" : "invalid") + " for " + to_string(f));
        if (!r.valid && !r.countermodel_checked) o.fail("unchecked countermodel for " + to_string(f));
    }
    if (max_size > 12) o.fail("sample exceeds size 12");
    // (b)
    std::string theories;
    for (auto [k, n] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}}) {
        LindenbaumTower tower(default_letters(k), n);
        Coalgebra tm = tree_model(kripke_functor(default_letters(k)), n);
        std::size_t atoms = tower.algebra(n).num_atoms();
        std::size_t trees_n = trees(k, n).level_size[n];
        if (atoms != tm.size() || atoms != trees_n)
            o.fail("k=" + std::to_string(k) + ", n=" + std::to_string(n) + ": " + std::to_string(atoms) + " atoms, " +
                   std::to_string(tm.size()) + " tree states, " + std::to_string(trees_n) + " trees");
        LevelMap map(tower);
        Evaluator ev(tm);
        std::set<std::size_t> hit;
        for (std::size_t a = 0; a < atoms; ++a) {
            Formula chi = characteristic_formula(tower, n, a);
            if (map(chi, n) != tower.algebra(n).atom(a)) o.fail("characteristic formula misses its atom");
            StateSet at = ev(chi);
            if (at.count() != 1) {
                o.fail("characteristic formula of atom " + std::to_string(a) + " holds at " + std::to_string(at.count()) +
                       " states");
                continue;
            }
            hit.insert(at.find_first());
        }
        if (hit.size() != tm.size()) o.fail("atoms do not cover the tree states");
        if (!check_theories(tower).bijective) o.fail("check_theories not bijective");
        theories += (theories.empty() ? "" : ", ") + std::string("k=") + std::to_string(k) + ",n=" + std::to_string(n) +
                    ":" + std::to_string(atoms);
    }
    // |A_1| = 4 for k = 0, exactly {bot, []bot, ~[]bot, top}
    {
        LindenbaumTower tower({}, 1);
        LevelMap map(tower);
        std::set<Element> elems;
        for (const char* text : {"false", "[]false", "~[]false", "true"}) elems.insert(map(parse_formula(text), 1));
        auto everything = tower.algebra(1).elements();
        if (tower.algebra(1).size() != 4 || elems != std::set<Element>(everything.begin(), everything.end()))
            o.fail("A_1 for k=0 is not {bot, []bot, ~[]bot, top}");
    }
    o.summary = std::to_string(all.size()) + " enumerated + 1000 random formulas (" + std::to_string(valid) +
                " valid) agree with tree oracle; theory bijections " + theories + "; |A_1| = 4 for k=0";
    return o;
}

Outcome criterion10() {
    Outcome o;
    struct Case {
        const char* text;
        std::size_t letters;
        bool valid;
    };
    std::string verdicts;
    for (auto [text, k, valid] : std::vector<Case>{{"[](p -> q) -> ([]p -> []q)", 2, true},
                                                  {"[]true", 0, true},
                                                  {"[]p -> p", 1, false},
                                                  {"[]p -> [][]p", 1, false}}) {
        Formula f = parse_formula(text);
        auto r = kvalid(f, k);
        if (r.valid != valid) o.fail(std::string(text) + " misjudged");
        if (!valid) {
            if (!r.countermodel) {
                o.fail(std::string(text) + ": no countermodel");
                continue;
            }
            // round-trip through the file format before checking
            Coalgebra cm = io::read_coalgebra(io::write_coalgebra(*r.countermodel));
            StateSet ext = eval(f, cm);
            if (ext[cm.carrier().index_of(r.state)]) o.fail(std::string(text) + ": countermodel does not refute");
            verdicts += std::string(verdicts.empty() ? "" : ", ") + text + " refuted at " + r.state;
        }
    }
    auto start = Clock::now();
    auto rep = run_selftest(1);
    double ms = ms_since(start);
    if (!rep.ok()) o.fail("selftest fails at " + *rep.failed);
    if (ms >= 60000) o.fail("selftest took " + std::to_string(ms) + " ms");
    o.summary = "K axiom and []true valid; " + verdicts + "; selftest " + std::to_string(rep.results.size()) +
                " properties in " + std::to_string(static_cast<long>(ms)) + " ms";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::pair<int, Outcome (*)()>> criteria = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    int failures = 0;
    for (auto [id, run] : criteria) {
        if (!wanted.empty() && !wanted.count(id)) continue;
        auto start = Clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        std::cout << (o.ok ? "PASS" : "FAIL") << " criterion " << id << ": " << o.summary << " ["
                  << static_cast<long>(ms_since(start)) << " ms]\n";
        if (!o.ok) {
            std::cout << "     " << o.failure << "\n";
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}
