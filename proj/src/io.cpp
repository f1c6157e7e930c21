// SPDX-License-Identifier: Apache-2.0
#include "coalg/io.hpp"

#include <fstream>
#include <sstream>

#include "coalg/error.hpp"
#include "coalg/rational.hpp"

namespace coalg::io {

namespace {

std::string extend(const std::string& path, const std::string& step) { return path.empty() ? step : path + "/" + step; }

[[noreturn]] void bad(const std::string& what, const std::string& path) { throw ShapeError(what, path); }

const Json& only(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object() || j.size() != 1 || !j.contains(key))
        bad(std::string("expected a {\"") + key + "\": ...} literal", path);
    return j.at(key);
}

std::string text(const Json& j, const std::string& path) {
    if (!j.is_string()) bad("expected a string", path);
    return j.get<std::string>();
}

std::pair<std::size_t, std::size_t> line_col(std::string_view s, std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < s.size(); ++i) {
        if (s[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

Json parse_json(std::string_view s) {
    try {
        return Json::parse(s.begin(), s.end());
    } catch (const nlohmann::json::parse_error& e) {
        // byte is one past the offending character.
        auto [line, col] = line_col(s, e.byte == 0 ? 0 : e.byte - 1);
        std::string what = e.what();
        auto at = what.find("syntax error");
        throw ParseError(at == std::string::npos ? what : what.substr(at), line, col);
    }
}

/// Best-effort location of a structure entry: the first quoted occurrence of
/// the first path component after the "structure" key.
[[noreturn]] void located(std::string_view s, const std::string& what, const std::string& path) {
    std::size_t offset = 0;
    std::string head = path.substr(0, path.find('/'));
    if (auto st = s.find("\"structure\""); st != std::string_view::npos) {
        offset = st;
        if (auto k = s.find("\"" + head + "\"", st + 11); k != std::string_view::npos) offset = k;
    } else if (auto k = s.find("\"" + head + "\""); k != std::string_view::npos) {
        offset = k;
    }
    auto [line, col] = line_col(s, offset);
    throw ParseError(what, line, col);
}

}  // namespace

Json to_json(const TValue& v, const Functor& t) {
    switch (t.kind()) {
        case Functor::Kind::Id: return {{"id", v.symbol()}};
        case Functor::Kind::Const: return {{"c", v.symbol()}};
        case Functor::Kind::Prod:
            return {{"pair", Json::array({to_json(v.first(), t.left()), to_json(v.second(), t.right())})}};
        case Functor::Kind::Coprod:
            if (v.kind() == TValue::Kind::Inl) return {{"inl", to_json(v.payload(), t.left())}};
            return {{"inr", to_json(v.payload(), t.right())}};
        case Functor::Kind::Exp: {
            Json m = Json::object();
            for (std::size_t i = 0; i < t.alphabet().size(); ++i) m[t.alphabet()[i]] = to_json(v.items()[i], t.inner());
            return {{"fun", m}};
        }
        case Functor::Kind::Pow: {
            Json a = Json::array();
            for (const auto& x : v.items()) a.push_back(to_json(x, t.inner()));
            return {{"set", a}};
        }
        case Functor::Kind::Dist: {
            Json a = Json::array();
            for (std::size_t i = 0; i < v.items().size(); ++i)
                a.push_back(Json::array({to_json(v.items()[i], t.inner()), v.weights()[i].to_string()}));
            return {{"dist", a}};
        }
        case Functor::Kind::Nbhd: {
            Json a = Json::array();
            for (const auto& s : v.items()) {
                Json inner = Json::array();
                for (const auto& x : s.items()) inner.push_back(to_json(x, t.inner()));
                a.push_back(inner);
            }
            return {{"nbhd", a}};
        }
    }
    return {};
}

TValue tvalue_from_json(const Json& j, const Functor& t, const std::string& path) {
    switch (t.kind()) {
        case Functor::Kind::Id: return TValue::state(text(only(j, "id", path), path));
        case Functor::Kind::Const: return TValue::constant(text(only(j, "c", path), path));
        case Functor::Kind::Prod: {
            const Json& p = only(j, "pair", path);
            if (!p.is_array() || p.size() != 2) bad("a pair needs two components", path);
            return TValue::pair(tvalue_from_json(p[0], t.left(), extend(path, "pi1")),
                                tvalue_from_json(p[1], t.right(), extend(path, "pi2")));
        }
        case Functor::Kind::Coprod:
            if (j.is_object() && j.size() == 1 && j.contains("inl"))
                return TValue::inl(tvalue_from_json(j.at("inl"), t.left(), extend(path, "inl")));
            return TValue::inr(tvalue_from_json(only(j, "inr", path), t.right(), extend(path, "inr")));
        case Functor::Kind::Exp: {
            const Json& m = only(j, "fun", path);
            if (!m.is_object() || m.size() != t.alphabet().size()) bad("a table needs one entry per key", path);
            std::vector<TValue> entries;
            for (const auto& k : t.alphabet()) {
                if (!m.contains(k)) bad("missing table key \"" + k + "\"", path);
                entries.push_back(tvalue_from_json(m.at(k), t.inner(), extend(path, "@" + k)));
            }
            return TValue::table(std::move(entries));
        }
        case Functor::Kind::Pow: {
            const Json& a = only(j, "set", path);
            if (!a.is_array()) bad("a set needs a list", path);
            std::vector<TValue> items;
            for (std::size_t i = 0; i < a.size(); ++i)
                items.push_back(tvalue_from_json(a[i], t.inner(), extend(path, "set[" + std::to_string(i) + "]")));
            return TValue::set(std::move(items));
        }
        case Functor::Kind::Dist: {
            const Json& a = only(j, "dist", path);
            if (!a.is_array()) bad("a distribution needs a list", path);
            std::vector<std::pair<TValue, Rational>> w;
            for (std::size_t i = 0; i < a.size(); ++i) {
                std::string p = extend(path, "dist[" + std::to_string(i) + "]");
                if (!a[i].is_array() || a[i].size() != 2) bad("expected [value, \"weight\"]", p);
                try {
                    w.emplace_back(tvalue_from_json(a[i][0], t.inner(), p), Rational::parse(text(a[i][1], p)));
                } catch (const ShapeError&) {
                    throw;
                } catch (const Error& e) {
                    bad(e.what(), p);
                }
            }
            try {
                return TValue::dist(std::move(w));
            } catch (const ShapeError&) {
                throw;
            } catch (const Error& e) {
                bad(e.what(), path);
            }
        }
        case Functor::Kind::Nbhd: {
            const Json& a = only(j, "nbhd", path);
            if (!a.is_array()) bad("a neighbourhood system needs a list of lists", path);
            std::vector<TValue> sets;
            for (std::size_t i = 0; i < a.size(); ++i) {
                std::string p = extend(path, "nbhd[" + std::to_string(i) + "]");
                if (!a[i].is_array()) bad("expected a list", p);
                std::vector<TValue> items;
                for (std::size_t k = 0; k < a[i].size(); ++k) items.push_back(tvalue_from_json(a[i][k], t.inner(), p));
                sets.push_back(TValue::set(std::move(items)));
            }
            return TValue::nbhd(std::move(sets));
        }
    }
    bad("unsupported functor", path);
}

Json to_json(const Coalgebra& c) {
    Json j = Json::object();
    j["functor"] = c.functor().to_string();
    j["carrier"] = c.carrier().elements();
    Json s = Json::object();
    for (std::size_t i = 0; i < c.size(); ++i) s[c.carrier()[i]] = to_json(c.at(i), c.functor());
    j["structure"] = s;
    return j;
}

Coalgebra coalgebra_from_json(const Json& j) {
    if (!j.is_object()) bad("a coalgebra document must be an object", {});
    for (const char* key : {"functor", "carrier", "structure"})
        if (!j.contains(key)) bad(std::string("missing field \"") + key + "\"", {});
    Functor t = Functor::parse(text(j.at("functor"), "functor"));
    const Json& carrier = j.at("carrier");
    if (!carrier.is_array()) bad("carrier must be a list", "carrier");
    std::vector<std::string> names;
    for (const auto& x : carrier) names.push_back(text(x, "carrier"));
    FinSet x(names);
    const Json& s = j.at("structure");
    if (!s.is_object()) bad("structure must be an object", "structure");
    std::map<std::string, TValue> m;
    for (auto it = s.begin(); it != s.end(); ++it) {
        if (!x.contains(it.key())) bad("state \"" + it.key() + "\" is not in the carrier", it.key());
        m.emplace(it.key(), tvalue_from_json(it.value(), t, it.key()));
    }
    for (const auto& name : x)
        if (!m.count(name)) bad("state \"" + name + "\" has no structure", name);
    for (const auto& [name, v] : m) {
        try {
            check_shape(t, v, x);
        } catch (const ShapeError& e) {
            throw ShapeError(e.message(), extend(name, e.path()));
        }
    }
    return Coalgebra::from_map(t, x, m);
}

std::string write_coalgebra(const Coalgebra& c, bool pretty) { return to_json(c).dump(pretty ? 2 : -1) + "\n"; }

Coalgebra read_coalgebra(std::string_view s) {
    Json j = parse_json(s);
    try {
        return coalgebra_from_json(j);
    } catch (const ParseError& e) {
        // Functor syntax inside the document.
        located(s, e.what(), "");
    } catch (const ShapeError& e) {
        located(s, e.what(), e.path());
    } catch (const Error& e) {
        located(s, e.what(), "");
    }
}

Json to_json(const Presentation& p) {
    Json rel = Json::array();
    for (const auto& [l, r] : p.relations) rel.push_back(Json::array({to_string(l), to_string(r)}));
    return {{"generators", p.generators.elements()}, {"relations", rel}};
}

std::string write_presentation(const Presentation& p, bool pretty) { return to_json(p).dump(pretty ? 2 : -1) + "\n"; }

Presentation read_presentation(std::string_view s) {
    Json j = parse_json(s);
    auto fail = [&](const std::string& what, const std::string& near) {
        std::size_t off = near.empty() ? 0 : s.find(near);
        auto [line, col] = line_col(s, off == std::string_view::npos ? 0 : off);
        throw ParseError(what, line, col);
    };
    if (!j.is_object() || !j.contains("generators")) fail("a BA document needs \"generators\"", "");
    const Json& g = j.at("generators");
    if (!g.is_array()) fail("generators must be a list", "\"generators\"");
    Presentation p;
    std::vector<std::string> names;
    for (const auto& x : g) {
        if (!x.is_string()) fail("generator names must be strings", "\"generators\"");
        names.push_back(x.get<std::string>());
    }
    try {
        p.generators = FinSet(names);
    } catch (const Error& e) {
        fail(e.what(), "\"generators\"");
    }
    if (j.contains("relations")) {
        const Json& r = j.at("relations");
        if (!r.is_array()) fail("relations must be a list", "\"relations\"");
        for (const auto& pair : r) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
                fail("each relation is a pair of term strings", "\"relations\"");
            std::pair<BTerm, BTerm> rel;
            for (int side = 0; side < 2; ++side) {
                std::string term = pair[side].get<std::string>();
                try {
                    (side ? rel.second : rel.first) = parse_bterm(term);
                } catch (const ParseError& e) {
                    // Point into the document at the term.
                    std::size_t off = s.find("\"" + term + "\"");
                    auto [line, col] = line_col(s, off == std::string_view::npos ? 0 : off + 1 + e.column() - 1);
                    throw ParseError(std::string("bad term \"") + term + "\": " + e.what(), line, col);
                }
                std::vector<std::string> used;
                collect_generators(side ? rel.second : rel.first, used);
                for (const auto& u : used)
                    if (!p.generators.contains(u)) fail("unknown generator \"" + u + "\"", "\"" + term + "\"");
            }
            p.relations.push_back(std::move(rel));
        }
    }
    return p;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << contents;
}

}  // namespace coalg::io
