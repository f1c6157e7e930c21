// SPDX-License-Identifier: Apache-2.0
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coalg/boolalg.hpp"
#include "coalg/coalgebra.hpp"
#include "coalg/duality.hpp"
#include "coalg/error.hpp"
#include "coalg/formula.hpp"
#include "coalg/io.hpp"
#include "coalg/logic.hpp"
#include "coalg/selftest.hpp"

namespace py = pybind11;
using namespace coalg;

namespace {

Limits limits_with(std::optional<std::uint64_t> cap) {
    Limits l;
    if (cap) l.cardinality = *cap;
    return l;
}

std::size_t index_of(const Coalgebra& c, const std::string& s) { return c.carrier().index_of(s); }

py::dict kvalid_dict(const std::string& text, std::size_t letters, std::optional<std::uint64_t> cap) {
    auto r = kvalid(parse_formula(text), letters, limits_with(cap));
    py::dict d;
    d["valid"] = r.valid;
    d["depth"] = r.depth;
    d["letters"] = r.letters;
    if (r.countermodel) {
        d["countermodel"] = Coalgebra(*r.countermodel);
        d["state"] = r.state;
        d["countermodel_checked"] = r.countermodel_checked;
    }
    return d;
}

py::dict stone_dict(const std::string& document, std::optional<std::uint64_t> cap) {
    auto lim = limits_with(cap);
    auto p = io::read_presentation(document);
    auto real = realize(p, lim);
    const auto& a = real.algebra;
    py::dict gens;
    for (const auto& g : p.generators) {
        std::vector<std::string> below;
        const Element& e = real.generator.at(g);
        for (std::size_t i = 0; i < a.num_atoms(); ++i)
            if (e.test(i)) below.push_back(a.atoms()[i]);
        gens[py::str(g)] = below;
    }
    auto iso = duality_isos(a, a.atoms(), lim);
    py::dict d;
    d["atoms"] = a.atoms().elements();
    d["interpretation"] = gens;
    d["rho_iso"] = iso.rho_iso;
    d["sigma_bijective"] = iso.sigma_bijective;
    return d;
}

py::dict selftest_dict(std::uint64_t seed, std::optional<std::string> only) {
    auto rep = run_selftest(seed, only);
    py::list props;
    for (const auto& p : rep.results) {
        py::dict j;
        j["name"] = p.name;
        j["passed"] = p.passed;
        j["checks"] = p.checks;
        j["detail"] = p.detail;
        props.append(j);
    }
    py::dict d;
    d["ok"] = rep.ok();
    d["seed"] = rep.seed;
    d["properties"] = props;
    if (rep.failed) {
        d["failed"] = *rep.failed;
        d["repro"] = rep.repro;
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_coalg, m) {
    m.doc() = "Coalgebras, their modal logics and finite Stone duality";

    static py::exception<Error> base(m, "CoalgError", PyExc_RuntimeError);
    static py::exception<ParseError> parse(m, "ParseError", base.ptr());
    static py::exception<CapExceeded> cap(m, "CapExceeded", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParseError& e) {
            parse(e.what());
        } catch (const CapExceeded& e) {
            cap(e.what());
        } catch (const Error& e) {
            base(e.what());
        }
    });

    py::class_<Coalgebra>(m, "Coalgebra")
        .def_static("loads", [](const std::string& text) { return io::read_coalgebra(text); }, py::arg("text"),
                    "Parse a coalgebra document.")
        .def("dumps", &io::write_coalgebra, py::arg("pretty") = false)
        .def_property_readonly("functor", [](const Coalgebra& c) { return c.functor().to_string(); })
        .def_property_readonly("carrier", [](const Coalgebra& c) { return c.carrier().elements(); })
        .def("__len__", &Coalgebra::size)
        .def("__eq__", [](const Coalgebra& a, const Coalgebra& b) { return a == b; })
        .def("__repr__", [](const Coalgebra& c) {
            return "<Coalgebra " + c.functor().to_string() + " with " + std::to_string(c.size()) + " states>";
        });

    m.def("normalize_functor", [](const std::string& s) { return Functor::parse(s).to_string(); }, py::arg("expr"),
          "Canonical text of a functor expression.");
    m.def("cardinality", [](const std::string& s, std::uint64_t n, std::int64_t d) {
        return cardinality(Functor::parse(s), n, d);
    }, py::arg("expr"), py::arg("n"), py::arg("denominator") = 1, "|T X| for |X| = n.");
    m.def("check_functor_laws", [](const std::string& s, std::size_t n, std::int64_t d) {
        Functor t = Functor::parse(s);
        Limits lim;
        lim.denominator = d;
        FinSet x = FinSet::numbered("x", n), y = FinSet::numbered("y", n), z = FinSet::numbered("z", n);
        bool ok = true;
        for_each_function(x, y, [&](const FinFun& f) {
            for_each_function(y, z, [&](const FinFun& g) { ok = ok && check_functor_laws(t, f, g, lim).ok(); }, lim);
        }, lim);
        return ok;
    }, py::arg("expr"), py::arg("size"), py::arg("denominator") = 1,
          "Functor laws for all maps between sets of the given size.");
    m.def("normalize_formula", [](const std::string& s) { return to_string(parse_formula(s)); }, py::arg("formula"));

    m.def("behavioural_equivalence", [](const Coalgebra& c) {
        return behavioural_equivalence(c).result.named_blocks();
    }, py::arg("coalgebra"), "Classes of behaviourally equivalent states.");
    m.def("bisimilar", [](const Coalgebra& c, const std::string& x, const std::string& y) {
        auto p = behavioural_equivalence(c).result;
        return p.same_block(index_of(c, x), index_of(c, y));
    }, py::arg("coalgebra"), py::arg("x"), py::arg("y"));
    m.def("distinguishing_formula", [](const Coalgebra& c, const std::string& x, const std::string& y) {
        auto d = distinguishing_formula(c, x, y);
        return d.formula ? std::optional<std::string>(to_string(*d.formula)) : std::nullopt;
    }, py::arg("coalgebra"), py::arg("x"), py::arg("y"), "A formula true at x and false at y, or None.");
    m.def("minimize", [](const Coalgebra& c) { return minimize(c).quotient; }, py::arg("coalgebra"));
    m.def("extension", [](const Coalgebra& c, const std::string& f) {
        return members(eval(parse_formula(f), c), c.carrier());
    }, py::arg("coalgebra"), py::arg("formula"), "States satisfying a formula.");

    m.def("kvalid", &kvalid_dict, py::arg("formula"), py::arg("letters") = 0, py::arg("cap") = py::none());
    m.def("lindenbaum_atoms", [](std::size_t letters, std::size_t depth, bool pow_only) {
        LindenbaumTower t(default_letters(letters), depth, {}, pow_only);
        std::vector<std::size_t> out;
        for (std::size_t n = 0; n <= depth; ++n) out.push_back(t.algebra(n).num_atoms());
        return out;
    }, py::arg("letters"), py::arg("depth"), py::arg("pow_only") = false, "Atom counts of levels 0..depth.");
    m.def("stone", &stone_dict, py::arg("document"), py::arg("cap") = py::none(),
          "Atoms and generator interpretations of a presented Boolean algebra.");
    m.def("selftest", &selftest_dict, py::arg("seed") = 1, py::arg("only") = py::none());
    m.def("selftest_properties", &selftest_properties);
}
