// SPDX-License-Identifier: Apache-2.0
// coalg: command-line front end. Reports are JSON on stdout, diagnostics on
// stderr. Exit codes: 0 positive verdict, 1 negative verdict with witness,
// 2 usage or input error, 3 a size cap was hit.
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coalg/boolalg.hpp"
#include "coalg/coalgebra.hpp"
#include "coalg/duality.hpp"
#include "coalg/error.hpp"
#include "coalg/formula.hpp"
#include "coalg/io.hpp"
#include "coalg/logic.hpp"
#include "coalg/selftest.hpp"

namespace {

using coalg::io::Json;
using Clock = std::chrono::steady_clock;

constexpr int kPositive = 0;
constexpr int kNegative = 1;
constexpr int kUsage = 2;
constexpr int kCap = 3;

/// Input was rejected before any work started.
struct UsageError : coalg::Error {
    using coalg::Error::Error;
};

struct Caps {
    std::uint64_t cardinality = coalg::Limits{}.cardinality;
    std::size_t carrier = 4096;
    std::size_t generators = coalg::Limits{}.generators;
    std::int64_t denominator = 1 << 20;
};

struct Options {
    bool pretty = false;
    Caps caps;
    Clock::time_point start = Clock::now();
};

coalg::Limits limits_of(const Caps& caps) {
    coalg::Limits l;
    l.cardinality = caps.cardinality;
    l.generators = caps.generators;
    return l;
}

int emit(const Options& o, Json report, int code) {
    report["elapsed_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - o.start).count();
    std::cout << report.dump(o.pretty ? 2 : -1) << "\n";
    return code;
}

Json report(const std::string& command, const std::string& verdict) {
    Json r;
    r["command"] = command;
    r["verdict"] = verdict;
    return r;
}

Json size_json(std::size_t atoms) {
    if (atoms < 64) return Json(std::uint64_t{1} << atoms);
    return Json("2^" + std::to_string(atoms));
}

coalg::Coalgebra load_coalgebra(const std::string& path, const Caps& caps) {
    coalg::Coalgebra c;
    try {
        c = coalg::io::read_coalgebra(coalg::io::read_file(path));
    } catch (const coalg::ParseError& e) {
        throw coalg::Error("parse error in " + path + ": " + e.what());
    }
    if (c.size() > caps.carrier)
        throw coalg::CapExceeded("carrier of " + path + " has " + std::to_string(c.size()) +
                                 " states, cap is " + std::to_string(caps.carrier));
    if (c.denominator_lcm() > caps.denominator)
        throw coalg::CapExceeded("weights of " + path + " need denominator " + std::to_string(c.denominator_lcm()) +
                                 ", cap is " + std::to_string(caps.denominator));
    return c;
}

std::size_t state_index(const coalg::Coalgebra& c, const std::string& s) {
    const auto& x = c.carrier();
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] == s) return i;
    throw UsageError("unknown state \"" + s + "\"");
}

Json blocks_json(const coalg::Partition& p) {
    Json out = Json::array();
    for (const auto& b : p.named_blocks()) out.push_back(b);
    return out;
}

// --- subcommands -----------------------------------------------------------

int functor_check(const Options& o, const std::string& expr, std::size_t n, std::int64_t d) {
    if (d < 1) throw UsageError("--denominator must be positive");
    if (d > o.caps.denominator) throw coalg::CapExceeded("denominator above cap");
    coalg::Functor t = coalg::Functor::parse(expr);
    coalg::Limits lim = limits_of(o.caps);
    lim.denominator = d;
    coalg::FinSet x = coalg::FinSet::numbered("x", n), y = coalg::FinSet::numbered("y", n),
                  z = coalg::FinSet::numbered("z", n);
    std::uint64_t card = coalg::cardinality(t, n, d);
    std::uint64_t pairs = coalg::sat::mul(coalg::count_functions(n, n), coalg::count_functions(n, n));
    lim.require(card, "T X");
    lim.require(coalg::sat::mul(pairs, card), "function pairs times |T X|");
    std::size_t enumerated = coalg::apply_on_set(t, x, lim).size();

    Json r = report("functor-check", "laws-hold");
    r["functor"] = t.to_string();
    r["size"] = n;
    r["denominator"] = d;
    r["cardinality"] = card;
    r["enumerated"] = enumerated;
    std::size_t id_checks = 0, comp_checks = 0;
    std::optional<Json> witness;
    coalg::for_each_function(x, y, [&](const coalg::FinFun& f) {
        if (witness) return;
        coalg::for_each_function(y, z, [&](const coalg::FinFun& g) {
            if (witness) return;
            auto rep = coalg::check_functor_laws(t, f, g, lim);
            id_checks += rep.identity_checked;
            comp_checks += rep.composition_checked;
            if (!rep.ok()) {
                Json w;
                w["law"] = rep.identity_holds ? "composition" : "identity";
                w["f"] = f.image();
                w["g"] = g.image();
                if (rep.counterexample) w["element"] = coalg::io::to_json(*rep.counterexample, t);
                witness = w;
            }
        }, lim);
    }, lim);
    r["identity_checks"] = id_checks;
    r["composition_checks"] = comp_checks;
    if (enumerated != card) {
        r["verdict"] = "cardinality-mismatch";
        return emit(o, r, kNegative);
    }
    if (witness) {
        r["verdict"] = "law-fails";
        r["witness"] = *witness;
        return emit(o, r, kNegative);
    }
    return emit(o, r, kPositive);
}

int bisim(const Options& o, const std::string& file, const std::string& states) {
    auto c = load_coalgebra(file, o.caps);
    auto lim = c.resolve(limits_of(o.caps));
    auto ref = coalg::behavioural_equivalence(c, lim);
    Json r = report("bisim", "computed");
    r["states"] = c.size();
    r["rounds"] = ref.rounds();
    r["classes"] = ref.result.num_blocks();
    if (states.empty()) {
        r["partition"] = blocks_json(ref.result);
        return emit(o, r, kPositive);
    }
    auto comma = states.find(',');
    if (comma == std::string::npos || states.find(',', comma + 1) != std::string::npos)
        throw UsageError("--states expects two states separated by a comma");
    std::string a = states.substr(0, comma), b = states.substr(comma + 1);
    std::size_t ia = state_index(c, a), ib = state_index(c, b);
    r["pair"] = {a, b};
    if (ref.result.same_block(ia, ib)) {
        r["verdict"] = "bisimilar";
        std::vector<std::string> block;
        for (auto i : ref.result.blocks()[ref.result.block_of(ia)]) block.push_back(c.carrier()[i]);
        r["class"] = block;
        return emit(o, r, kPositive);
    }
    auto d = coalg::distinguishing_formula(c, a, b, lim);
    r["verdict"] = "not-bisimilar";
    r["witness"] = coalg::to_string(*d.formula);
    r["witness_depth"] = coalg::modal_depth(*d.formula);
    if (auto lvl = ref.separation_level(ia, ib)) r["separated_at"] = *lvl;
    return emit(o, r, kNegative);
}

int minimize(const Options& o, const std::string& file, const std::string& out) {
    auto c = load_coalgebra(file, o.caps);
    auto m = coalg::minimize(c, c.resolve(limits_of(o.caps)));
    coalg::io::write_file(out, coalg::io::write_coalgebra(m.quotient, o.pretty));
    Json r = report("minimize", "written");
    r["output"] = out;
    r["states"] = c.size();
    r["quotient_states"] = m.quotient.size();
    Json map = Json::object();
    for (std::size_t i = 0; i < c.size(); ++i) map[c.carrier()[i]] = m.map.cod()[m.map(i)];
    r["map"] = map;
    return emit(o, r, kPositive);
}

int mc(const Options& o, const std::string& file, const std::string& text, const std::string& state) {
    auto c = load_coalgebra(file, o.caps);
    coalg::Formula f = coalg::parse_formula(text);
    coalg::Evaluator ev(c, c.resolve(limits_of(o.caps)));
    coalg::StateSet ext = ev(f);
    Json r = report("mc", "holds");
    r["formula"] = coalg::to_string(f);
    r["extension"] = coalg::members(ext, c.carrier());
    if (!state.empty()) {
        r["state"] = state;
        if (ext.test(state_index(c, state))) return emit(o, r, kPositive);
        r["verdict"] = "fails";
        return emit(o, r, kNegative);
    }
    if (ext.all()) return emit(o, r, kPositive);
    r["verdict"] = "fails";
    r["refuted_at"] = coalg::members(~ext, c.carrier());
    return emit(o, r, kNegative);
}

int distinguish(const Options& o, const std::string& file, const std::string& x, const std::string& y) {
    auto c = load_coalgebra(file, o.caps);
    state_index(c, x);
    state_index(c, y);
    auto lim = c.resolve(limits_of(o.caps));
    auto d = coalg::distinguishing_formula(c, x, y, lim);
    Json r = report("distinguish", "distinguished");
    r["pair"] = {x, y};
    r["rounds"] = d.rounds;
    if (!d.formula) {
        r["verdict"] = "bisimilar";
        auto ref = coalg::behavioural_equivalence(c, lim);
        std::vector<std::string> block;
        for (auto i : ref.result.blocks()[ref.result.block_of(state_index(c, x))]) block.push_back(c.carrier()[i]);
        r["class"] = block;
        return emit(o, r, kNegative);
    }
    coalg::Evaluator ev(c, lim);
    r["formula"] = coalg::to_string(*d.formula);
    r["depth"] = coalg::modal_depth(*d.formula);
    r["checked"] = ev.holds_at(*d.formula, x) && !ev.holds_at(*d.formula, y);
    return emit(o, r, kPositive);
}

int dual(const Options& o, const std::string& file) {
    auto c = load_coalgebra(file, o.caps);
    auto lim = limits_of(o.caps);
    auto d = coalg::dual_algebra(c);
    const auto& base = d.algebra.base();
    Json r = report("dual", "modal-algebra");
    r["functor"] = c.functor().to_string();
    r["atoms"] = base.num_atoms();
    r["size"] = size_json(base.num_atoms());
    Json letters = Json::object();
    for (const auto& [p, e] : d.letters) letters[p] = coalg::members(e, c.carrier());
    r["letters"] = letters;
    // box is determined by its values on the coatoms X \ {x}
    Json box = Json::object();
    for (std::size_t i = 0; i < base.num_atoms(); ++i) {
        coalg::Element e = base.top();
        e.reset(i);
        box[c.carrier()[i]] = coalg::members(d.algebra.box(e), c.carrier());
    }
    r["box_of_complement"] = box;
    bool laws = true;
    if (base.size() <= lim.cardinality) {
        try {
            coalg::ModalAlgebra::from_map(base, [&](const coalg::Element& e) { return d.algebra.box(e); }, lim);
        } catch (const coalg::CapExceeded&) {
            throw;
        } catch (const coalg::Error& e) {
            laws = false;
            r["law_failure"] = e.what();
        }
        r["k_laws_checked"] = true;
    } else {
        r["k_laws_checked"] = false;
    }
    if (!laws) {
        r["verdict"] = "not-modal";
        return emit(o, r, kNegative);
    }
    return emit(o, r, kPositive);
}

int lindenbaum(const Options& o, const std::string& expr, std::size_t depth, std::optional<std::size_t> k) {
    coalg::Functor t = coalg::Functor::parse(expr);
    auto lim = limits_of(o.caps);
    bool pow_only = t == coalg::Functor::powerset(coalg::Functor::id());
    std::vector<std::string> letters;
    if (pow_only) {
        if (k && *k != 0) throw UsageError("P(Id) has no proposition letters; use a Kripke functor C{...} * P(Id)");
    } else if (auto kl = coalg::kripke_letters(t)) {
        letters = *kl;
        if (k && *k != letters.size())
            throw UsageError("functor has " + std::to_string(letters.size()) + " letters, --letters says " +
                             std::to_string(*k));
    } else {
        throw UsageError("lindenbaum supports P(Id) and Kripke functors C{valuations} * P(Id), not " + t.to_string());
    }
    coalg::LindenbaumTower tower(letters, depth, lim, pow_only);
    Json r = report("lindenbaum", "computed");
    r["functor"] = t.to_string();
    r["depth"] = depth;
    r["letters"] = letters;
    Json levels = Json::array();
    for (std::size_t n = 0; n <= depth; ++n) {
        Json l;
        l["level"] = n;
        l["atoms"] = tower.algebra(n).num_atoms();
        l["size"] = size_json(tower.algebra(n).num_atoms());
        levels.push_back(l);
    }
    r["levels"] = levels;
    const auto& top = tower.algebra(depth);
    r["atoms"] = top.num_atoms();
    r["size"] = size_json(top.num_atoms());
    if (top.num_atoms() <= 64) {
        std::vector<std::string> trees;
        for (std::size_t a = 0; a < top.num_atoms(); ++a) trees.push_back(tower.tree_name(depth, a));
        r["atom_trees"] = trees;
        if (!pow_only) {
            auto th = coalg::check_theories(tower, lim);
            r["theories_bijective"] = th.bijective;
        }
    }
    return emit(o, r, kPositive);
}

int kvalid(const Options& o, const std::string& text, std::size_t k) {
    coalg::Formula f = coalg::parse_formula(text);
    auto v = coalg::kvalid(f, k, limits_of(o.caps));
    Json r = report("kvalid", v.valid ? "valid" : "invalid");
    r["formula"] = coalg::to_string(f);
    r["depth"] = v.depth;
    r["letters"] = v.letters;
    if (v.valid) return emit(o, r, kPositive);
    if (v.countermodel) {
        r["countermodel"] = coalg::io::to_json(*v.countermodel);
        r["state"] = v.state;
        r["countermodel_checked"] = v.countermodel_checked;
    }
    return emit(o, r, kNegative);
}

int stone(const Options& o, const std::string& file) {
    coalg::Presentation p;
    try {
        p = coalg::io::read_presentation(coalg::io::read_file(file));
    } catch (const coalg::ParseError& e) {
        throw coalg::Error("parse error in " + file + ": " + e.what());
    }
    auto lim = limits_of(o.caps);
    auto real = coalg::realize(p, lim);
    const auto& a = real.algebra;
    Json r = report("stone", "iso");
    r["generators"] = p.generators.size();
    r["relations"] = p.relations.size();
    r["atoms"] = a.num_atoms();
    r["size"] = size_json(a.num_atoms());
    r["atom_names"] = a.atoms().elements();
    Json gens = Json::object();
    for (std::size_t g = 0; g < p.generators.size(); ++g) {
        const auto& name = p.generators[g];
        std::vector<std::string> below;
        const auto& e = real.generator.at(name);
        for (std::size_t i = 0; i < a.num_atoms(); ++i)
            if (e.test(i)) below.push_back(a.atoms()[i]);
        gens[name] = below;
    }
    r["interpretation"] = gens;
    auto iso = coalg::duality_isos(a, a.atoms(), lim);
    // rho sends each atom to a singleton set of points
    coalg::FinBA psa = iso.rho.target();
    Json pairing = Json::array();
    for (std::size_t i = 0; i < a.num_atoms(); ++i) pairing.push_back({a.atoms()[i], psa.name(iso.rho(a.atom(i)))});
    r["rho"] = pairing;
    r["rho_iso"] = iso.rho_iso;
    r["sigma_bijective"] = iso.sigma_bijective;
    if (!iso.ok()) {
        r["verdict"] = "not-iso";
        return emit(o, r, kNegative);
    }
    return emit(o, r, kPositive);
}

int selftest(const Options& o, std::uint64_t seed, const std::string& only) {
    std::optional<std::string> name;
    if (!only.empty()) name = only;
    auto rep = coalg::run_selftest(seed, name, limits_of(o.caps), [](const coalg::PropertyResult& p) {
        std::cerr << (p.passed ? "ok   " : "FAIL ") << p.name << " (" << p.checks << " checks, "
                  << static_cast<long long>(p.elapsed_ms) << " ms)\n";
        if (!p.passed) std::cerr << "     " << p.detail << "\n";
    });
    Json r = report("selftest", rep.ok() ? "pass" : "fail");
    r["seed"] = seed;
    Json props = Json::array();
    for (const auto& p : rep.results) {
        Json j;
        j["name"] = p.name;
        j["passed"] = p.passed;
        j["checks"] = p.checks;
        if (!p.passed) j["detail"] = p.detail;
        props.push_back(j);
    }
    r["properties"] = props;
    if (rep.ok()) return emit(o, r, kPositive);
    r["failed"] = *rep.failed;
    r["repro"] = rep.repro;
    std::cerr << "reproduce with: " << rep.repro << "\n";
    return emit(o, r, kNegative);
}

std::optional<std::uint64_t> env_cap() {
    const char* v = std::getenv("COALG_CAP");
    if (!v) return std::nullopt;
    std::string s(v);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw UsageError("COALG_CAP must be a non-negative integer, got \"" + s + "\"");
    try {
        return std::stoull(s);
    } catch (const std::out_of_range&) {
        throw UsageError("COALG_CAP out of range");
    }
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Coalgebras, modal logics and their duals on finite sets"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--pretty", o.pretty, "Indent the JSON report");
    std::optional<std::uint64_t> cap;
    app.add_option("--cap", cap, "Largest enumeration (overrides COALG_CAP)");
    app.add_option("--max-carrier", o.caps.carrier, "Largest carrier accepted from files")->capture_default_str();
    app.add_option("--max-generators", o.caps.generators, "Largest generator set for presented algebras")
        ->capture_default_str();
    app.add_option("--max-denominator", o.caps.denominator, "Largest weight denominator accepted from files")
        ->capture_default_str();

    std::string expr, file, out, formula, state, states, x, y, only;
    std::size_t size = 2, depth = 1, letters = 0;
    std::int64_t denominator = 2;
    std::optional<std::size_t> opt_letters;
    std::uint64_t seed = 1;

    auto* fc = app.add_subcommand("functor-check", "Check the functor laws on all maps between sets of a size");
    fc->add_option("expr", expr, "Functor expression")->required();
    fc->add_option("--size,-n", size, "Set size")->required();
    fc->add_option("--denominator", denominator, "Distribution weights are multiples of 1/D")->capture_default_str();

    auto* bs = app.add_subcommand("bisim", "Behavioural equivalence of a coalgebra");
    bs->add_option("file", file, "Coalgebra file")->required();
    bs->add_option("--states", states, "Two states a,b to compare");

    auto* mn = app.add_subcommand("minimize", "Quotient by behavioural equivalence");
    mn->add_option("file", file, "Coalgebra file")->required();
    mn->add_option("-o,--output", out, "Output file")->required();

    auto* mcc = app.add_subcommand("mc", "Model check a formula");
    mcc->add_option("file", file, "Coalgebra file")->required();
    mcc->add_option("--formula,-f", formula, "Formula")->required();
    mcc->add_option("--state", state, "Check at a single state");

    auto* ds = app.add_subcommand("distinguish", "Formula separating two states");
    ds->add_option("file", file, "Coalgebra file")->required();
    ds->add_option("x", x, "State")->required();
    ds->add_option("y", y, "State")->required();

    auto* du = app.add_subcommand("dual", "Dual modal algebra of a Kripke coalgebra");
    du->add_option("file", file, "Coalgebra file")->required();

    auto* lb = app.add_subcommand("lindenbaum", "Levels of the Lindenbaum tower");
    lb->add_option("--functor", expr, "P(Id) or C{valuations} * P(Id)")->required();
    lb->add_option("--depth", depth, "Depth")->required();
    lb->add_option("--letters", opt_letters, "Number of proposition letters");

    auto* kv = app.add_subcommand("kvalid", "Validity in modal logic K");
    kv->add_option("formula", formula, "Formula")->required();
    kv->add_option("--letters", letters, "Extra proposition letters")->capture_default_str();

    auto* st = app.add_subcommand("stone", "Atoms and Stone duals of a presented Boolean algebra");
    st->add_option("file", file, "Boolean algebra file")->required();

    auto* sf = app.add_subcommand("selftest", "Run the property suite");
    sf->add_option("--seed", seed, "Random seed")->capture_default_str();
    sf->add_option("--only", only, "Run one property");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (auto e = env_cap()) o.caps.cardinality = *e;
        if (cap) o.caps.cardinality = *cap;
        if (o.caps.cardinality == 0 || o.caps.carrier == 0 || o.caps.generators == 0 || o.caps.denominator <= 0)
            throw UsageError("caps must be positive");

        if (*fc) return functor_check(o, expr, size, denominator);
        if (*bs) return bisim(o, file, states);
        if (*mn) return minimize(o, file, out);
        if (*mcc) return mc(o, file, formula, state);
        if (*ds) return distinguish(o, file, x, y);
        if (*du) return dual(o, file);
        if (*lb) return lindenbaum(o, expr, depth, opt_letters);
        if (*kv) return kvalid(o, formula, letters);
        if (*st) return stone(o, file);
        if (*sf) return selftest(o, seed, only);
    } catch (const coalg::CapExceeded& e) {
        std::cerr << "coalg: cap exceeded: " << e.what() << "\n";
        return kCap;
    } catch (const coalg::ParseError& e) {
        std::cerr << "coalg: parse error: " << e.what() << "\n";
        return kUsage;
    } catch (const coalg::Error& e) {
        std::cerr << "coalg: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "coalg: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
