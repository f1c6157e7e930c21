// SPDX-License-Identifier: Apache-2.0
#include "coalg/functor.hpp"

#include <algorithm>
#include <functional>
#include <cctype>

namespace coalg {

struct Functor::Node {
    Kind kind = Kind::Id;
    FinSet alphabet;
    std::vector<Functor> children;
};

Functor::Functor() {
    static const auto node = std::make_shared<const Node>();
    node_ = node;
}

Functor Functor::constant(FinSet alphabet) {
    if (alphabet.empty()) throw Error("constant functor needs a nonempty alphabet");
    return Functor(std::make_shared<const Node>(Node{Kind::Const, std::move(alphabet), {}}));
}

Functor Functor::product(Functor l, Functor r) {
    return Functor(std::make_shared<const Node>(Node{Kind::Prod, {}, {std::move(l), std::move(r)}}));
}

Functor Functor::coproduct(Functor l, Functor r) {
    return Functor(std::make_shared<const Node>(Node{Kind::Coprod, {}, {std::move(l), std::move(r)}}));
}

Functor Functor::exponent(Functor base, FinSet alphabet) {
    if (alphabet.empty()) throw Error("exponent functor needs a nonempty alphabet");
    return Functor(std::make_shared<const Node>(Node{Kind::Exp, std::move(alphabet), {std::move(base)}}));
}

Functor Functor::powerset(Functor inner) {
    return Functor(std::make_shared<const Node>(Node{Kind::Pow, {}, {std::move(inner)}}));
}

Functor Functor::distribution(Functor inner) {
    return Functor(std::make_shared<const Node>(Node{Kind::Dist, {}, {std::move(inner)}}));
}

Functor Functor::neighbourhood(Functor inner) {
    return Functor(std::make_shared<const Node>(Node{Kind::Nbhd, {}, {std::move(inner)}}));
}

Functor::Kind Functor::kind() const noexcept { return node_->kind; }
const FinSet& Functor::alphabet() const noexcept { return node_->alphabet; }

const Functor& Functor::left() const {
    if (node_->children.empty()) throw Error("functor node has no operand");
    return node_->children[0];
}

const Functor& Functor::right() const {
    if (node_->children.size() < 2) throw Error("functor node has no right operand");
    return node_->children[1];
}

bool Functor::contains_dist() const {
    if (kind() == Kind::Dist) return true;
    for (const auto& c : node_->children)
        if (c.contains_dist()) return true;
    return false;
}

bool operator==(const Functor& a, const Functor& b) {
    if (a.node_ == b.node_) return true;
    return a.node_->kind == b.node_->kind && a.node_->alphabet == b.node_->alphabet &&
           a.node_->children == b.node_->children;
}

// ---------------------------------------------------------------------------
// Text syntax

namespace {

class FunctorParser {
public:
    explicit FunctorParser(std::string_view s) : s_(s) {}

    Functor parse() {
        Functor f = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("functor: " + msg, 1, pos_ + 1); }

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
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    bool keyword(std::string_view kw) {
        skip();
        if (s_.substr(pos_, kw.size()) != kw) return false;
        std::size_t end = pos_ + kw.size();
        if (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) return false;
        pos_ = end;
        return true;
    }

    Functor sum() {
        Functor f = prod();
        while (eat('+')) f = Functor::coproduct(f, prod());
        return f;
    }
    Functor prod() {
        Functor f = postfix();
        while (eat('*')) f = Functor::product(f, postfix());
        return f;
    }
    Functor postfix() {
        Functor f = atom();
        while (eat('^')) f = Functor::exponent(f, alphabet());
        return f;
    }
    Functor unary_arg() {
        expect('(');
        Functor f = sum();
        expect(')');
        return f;
    }
    Functor atom() {
        skip();
        if (keyword("Id")) return Functor::id();
        if (pos_ < s_.size() && s_[pos_] == 'C' && pos_ + 1 < s_.size()) {
            std::size_t save = pos_++;
            skip();
            if (pos_ < s_.size() && s_[pos_] == '{') return Functor::constant(alphabet());
            pos_ = save;
        }
        if (keyword("P")) return Functor::powerset(unary_arg());
        if (keyword("D")) return Functor::distribution(unary_arg());
        if (keyword("N")) return Functor::neighbourhood(unary_arg());
        if (eat('(')) {
            Functor f = sum();
            expect(')');
            return f;
        }
        fail("expected a functor");
    }
    FinSet alphabet() {
        expect('{');
        std::vector<std::string> syms;
        while (true) {
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}' &&
                   !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '{')
                ++pos_;
            if (pos_ == start) fail("expected an alphabet symbol");
            syms.emplace_back(s_.substr(start, pos_ - start));
            if (eat('}')) break;
            expect(',');
        }
        try {
            return FinSet(std::move(syms));
        } catch (const Error& e) {
            fail(e.what());
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

int precedence(Functor::Kind k) {
    switch (k) {
        case Functor::Kind::Coprod: return 1;
        case Functor::Kind::Prod: return 2;
        case Functor::Kind::Exp: return 3;
        default: return 4;
    }
}

std::string alphabet_text(const FinSet& a) {
    std::string out = "{";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) out += ",";
        out += a[i];
    }
    return out + "}";
}

std::string print(const Functor& f, int min_prec) {
    std::string out;
    switch (f.kind()) {
        case Functor::Kind::Id: out = "Id"; break;
        case Functor::Kind::Const: out = "C" + alphabet_text(f.alphabet()); break;
        case Functor::Kind::Prod: out = print(f.left(), 2) + " * " + print(f.right(), 3); break;
        case Functor::Kind::Coprod: out = print(f.left(), 1) + " + " + print(f.right(), 2); break;
        case Functor::Kind::Exp: out = print(f.left(), 3) + "^" + alphabet_text(f.alphabet()); break;
        case Functor::Kind::Pow: out = "P(" + print(f.inner(), 0) + ")"; break;
        case Functor::Kind::Dist: out = "D(" + print(f.inner(), 0) + ")"; break;
        case Functor::Kind::Nbhd: out = "N(" + print(f.inner(), 0) + ")"; break;
    }
    if (precedence(f.kind()) < min_prec) return "(" + out + ")";
    return out;
}

}  // namespace

Functor Functor::parse(std::string_view text) { return FunctorParser(text).parse(); }
std::string Functor::to_string() const { return print(*this, 0); }

// ---------------------------------------------------------------------------
// TValue

TValue TValue::state(std::string id) { return TValue(Kind::State, std::move(id), {}); }
TValue TValue::constant(std::string symbol) { return TValue(Kind::Const, std::move(symbol), {}); }
TValue TValue::pair(TValue a, TValue b) { return TValue(Kind::Pair, {}, {std::move(a), std::move(b)}); }
TValue TValue::inl(TValue v) { return TValue(Kind::Inl, {}, {std::move(v)}); }
TValue TValue::inr(TValue v) { return TValue(Kind::Inr, {}, {std::move(v)}); }
TValue TValue::table(std::vector<TValue> entries) { return TValue(Kind::Table, {}, std::move(entries)); }

TValue TValue::set(std::vector<TValue> items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return TValue(Kind::Set, {}, std::move(items));
}

TValue TValue::dist(std::vector<std::pair<TValue, Rational>> weighted) {
    std::sort(weighted.begin(), weighted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<TValue> items;
    std::vector<Rational> weights;
    Rational total(0);
    for (auto& [v, w] : weighted) {
        if (w < Rational(0) || w > Rational(1)) throw Error("distribution weight " + w.to_string() + " outside [0,1]");
        total += w;
        if (!items.empty() && items.back() == v) {
            weights.back() += w;
        } else {
            items.push_back(std::move(v));
            weights.push_back(w);
        }
    }
    if (total != Rational(1)) throw Error("distribution weights sum to " + total.to_string() + ", not 1");
    std::vector<TValue> kept_items;
    std::vector<Rational> kept_weights;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (weights[i] == Rational(0)) continue;
        kept_items.push_back(std::move(items[i]));
        kept_weights.push_back(weights[i]);
    }
    return TValue(Kind::Dist, {}, std::move(kept_items), std::move(kept_weights));
}

TValue TValue::nbhd(std::vector<TValue> sets) {
    for (const auto& s : sets)
        if (s.kind() != Kind::Set) throw Error("neighbourhood members must be sets");
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    return TValue(Kind::Nbhd, {}, std::move(sets));
}

bool operator==(const TValue& a, const TValue& b) {
    return a.kind_ == b.kind_ && a.symbol_ == b.symbol_ && a.items_ == b.items_ && a.weights_ == b.weights_;
}

std::strong_ordering operator<=>(const TValue& a, const TValue& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    if (auto c = a.symbol_.compare(b.symbol_); c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    std::size_t n = std::min(a.items_.size(), b.items_.size());
    for (std::size_t i = 0; i < n; ++i)
        if (auto c = a.items_[i] <=> b.items_[i]; c != 0) return c;
    if (auto c = a.items_.size() <=> b.items_.size(); c != 0) return c;
    n = std::min(a.weights_.size(), b.weights_.size());
    for (std::size_t i = 0; i < n; ++i)
        if (auto c = a.weights_[i] <=> b.weights_[i]; c != 0) return c;
    return a.weights_.size() <=> b.weights_.size();
}

std::string TValue::to_string() const {
    auto join = [](const std::vector<TValue>& v, const std::vector<Rational>* w) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ",";
            out += v[i].to_string();
            if (w) out += ":" + (*w)[i].to_string();
        }
        return out;
    };
    switch (kind_) {
        case Kind::State: return symbol_;
        case Kind::Const: return "'" + symbol_;
        case Kind::Pair: return "(" + join(items_, nullptr) + ")";
        case Kind::Inl: return "inl(" + join(items_, nullptr) + ")";
        case Kind::Inr: return "inr(" + join(items_, nullptr) + ")";
        case Kind::Table: return "[" + join(items_, nullptr) + "]";
        case Kind::Set: return "{" + join(items_, nullptr) + "}";
        case Kind::Dist: return "D{" + join(items_, &weights_) + "}";
        case Kind::Nbhd: return "N{" + join(items_, nullptr) + "}";
    }
    return {};
}

// ---------------------------------------------------------------------------
// Shapes and enumeration

namespace {

std::string extend(const std::string& path, const std::string& step) { return path.empty() ? step : path + "/" + step; }

void shape(const Functor& t, const TValue& v, const FinSet& x, const std::string& path) {
    using K = Functor::Kind;
    using V = TValue::Kind;
    auto want = [&](V k, const char* name) {
        if (v.kind() != k) throw ShapeError(std::string("expected ") + name + " value, found " + v.to_string(), path);
    };
    switch (t.kind()) {
        case K::Id:
            want(V::State, "a state");
            if (!x.contains(v.symbol())) throw ShapeError("unknown state \"" + v.symbol() + "\"", path);
            return;
        case K::Const:
            want(V::Const, "a constant");
            if (!t.alphabet().contains(v.symbol()))
                throw ShapeError("constant \"" + v.symbol() + "\" not in alphabet", path);
            return;
        case K::Prod:
            want(V::Pair, "a pair");
            shape(t.left(), v.first(), x, extend(path, "pi1"));
            shape(t.right(), v.second(), x, extend(path, "pi2"));
            return;
        case K::Coprod:
            if (v.kind() == V::Inl) return shape(t.left(), v.payload(), x, extend(path, "inl"));
            if (v.kind() == V::Inr) return shape(t.right(), v.payload(), x, extend(path, "inr"));
            throw ShapeError("expected an injection, found " + v.to_string(), path);
        case K::Exp:
            want(V::Table, "a table");
            if (v.items().size() != t.alphabet().size()) throw ShapeError("table has wrong number of entries", path);
            for (std::size_t i = 0; i < v.items().size(); ++i)
                shape(t.inner(), v.items()[i], x, extend(path, "@" + t.alphabet()[i]));
            return;
        case K::Pow:
            want(V::Set, "a set");
            for (std::size_t i = 0; i < v.items().size(); ++i)
                shape(t.inner(), v.items()[i], x, extend(path, "set[" + std::to_string(i) + "]"));
            return;
        case K::Dist:
            want(V::Dist, "a distribution");
            for (std::size_t i = 0; i < v.items().size(); ++i)
                shape(t.inner(), v.items()[i], x, extend(path, "dist[" + std::to_string(i) + "]"));
            return;
        case K::Nbhd:
            want(V::Nbhd, "a neighbourhood");
            for (std::size_t i = 0; i < v.items().size(); ++i)
                for (std::size_t j = 0; j < v.items()[i].items().size(); ++j)
                    shape(t.inner(), v.items()[i].items()[j], x,
                          extend(path, "nbhd[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
            return;
    }
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    // Exact while the intermediate fits; saturate otherwise.
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > UINT64_MAX) return UINT64_MAX;
    }
    return static_cast<std::uint64_t>(r);
}

std::vector<TValue> all_subsets(const std::vector<TValue>& base, const Limits& limits) {
    std::uint64_t count = sat::pow2(base.size());
    limits.require(count, "powerset");
    std::vector<TValue> out;
    out.reserve(count);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        if ((mask & 0xfff) == 0) limits.poll();
        std::vector<TValue> members;
        for (std::size_t i = 0; i < base.size(); ++i)
            if (mask >> i & 1) members.push_back(base[i]);
        out.push_back(TValue::set(std::move(members)));
    }
    return out;
}

std::vector<TValue> enumerate(const Functor& t, const FinSet& x, const Limits& limits) {
    using K = Functor::Kind;
    limits.require(cardinality(t, x.size(), std::max<std::int64_t>(limits.denominator, 1)), t.to_string());
    std::vector<TValue> out;
    switch (t.kind()) {
        case K::Id:
            for (const auto& e : x) out.push_back(TValue::state(e));
            return out;
        case K::Const:
            for (const auto& c : t.alphabet()) out.push_back(TValue::constant(c));
            return out;
        case K::Prod: {
            auto l = enumerate(t.left(), x, limits);
            auto r = enumerate(t.right(), x, limits);
            for (const auto& a : l)
                for (const auto& b : r) out.push_back(TValue::pair(a, b));
            return out;
        }
        case K::Coprod: {
            for (auto& a : enumerate(t.left(), x, limits)) out.push_back(TValue::inl(std::move(a)));
            for (auto& b : enumerate(t.right(), x, limits)) out.push_back(TValue::inr(std::move(b)));
            return out;
        }
        case K::Exp: {
            auto base = enumerate(t.inner(), x, limits);
            std::size_t arity = t.alphabet().size();
            if (base.empty()) return out;
            std::vector<std::size_t> idx(arity, 0);
            while (true) {
                limits.poll();
                std::vector<TValue> entries;
                entries.reserve(arity);
                for (auto i : idx) entries.push_back(base[i]);
                out.push_back(TValue::table(std::move(entries)));
                std::size_t pos = arity;
                while (pos > 0 && ++idx[pos - 1] == base.size()) idx[--pos] = 0;
                if (pos == 0) break;
            }
            return out;
        }
        case K::Pow: {
            out = all_subsets(enumerate(t.inner(), x, limits), limits);
            std::sort(out.begin(), out.end());
            return out;
        }
        case K::Dist: {
            if (limits.denominator < 1) throw Error("enumerating distributions needs a denominator bound >= 1");
            auto base = enumerate(t.inner(), x, limits);
            std::int64_t d = limits.denominator;
            if (base.empty()) return out;
            std::vector<std::int64_t> parts(base.size(), 0);
            // Odometer over compositions of d into |base| parts.
            std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t left) {
                if (i + 1 == base.size()) {
                    parts[i] = left;
                    std::vector<std::pair<TValue, Rational>> w;
                    for (std::size_t j = 0; j < base.size(); ++j)
                        if (parts[j] > 0) w.emplace_back(base[j], Rational(parts[j], d));
                    out.push_back(TValue::dist(std::move(w)));
                    return;
                }
                for (std::int64_t k = 0; k <= left; ++k) {
                    parts[i] = k;
                    rec(i + 1, left - k);
                }
            };
            rec(0, d);
            std::sort(out.begin(), out.end());
            return out;
        }
        case K::Nbhd: {
            auto subsets = all_subsets(enumerate(t.inner(), x, limits), limits);
            std::sort(subsets.begin(), subsets.end());
            std::uint64_t count = sat::pow2(subsets.size());
            limits.require(count, "neighbourhood functor");
            for (std::uint64_t mask = 0; mask < count; ++mask) {
                if ((mask & 0xfff) == 0) limits.poll();
                std::vector<TValue> members;
                for (std::size_t i = 0; i < subsets.size(); ++i)
                    if (mask >> i & 1) members.push_back(subsets[i]);
                out.push_back(TValue::nbhd(std::move(members)));
            }
            std::sort(out.begin(), out.end());
            return out;
        }
    }
    return out;
}

}  // namespace

void check_shape(const Functor& t, const TValue& v, const FinSet& x) { shape(t, v, x, ""); }

bool well_shaped(const Functor& t, const TValue& v, const FinSet& x) {
    try {
        shape(t, v, x, "");
        return true;
    } catch (const ShapeError&) {
        return false;
    }
}

std::uint64_t cardinality(const Functor& t, std::uint64_t n, std::int64_t d) {
    using K = Functor::Kind;
    switch (t.kind()) {
        case K::Id: return n;
        case K::Const: return t.alphabet().size();
        case K::Prod: return sat::mul(cardinality(t.left(), n, d), cardinality(t.right(), n, d));
        case K::Coprod: return sat::add(cardinality(t.left(), n, d), cardinality(t.right(), n, d));
        case K::Exp: return sat::pow(cardinality(t.inner(), n, d), t.alphabet().size());
        case K::Pow: return sat::pow2(cardinality(t.inner(), n, d));
        case K::Dist: {
            std::uint64_t m = cardinality(t.inner(), n, d);
            if (m == 0) return 0;
            if (m == UINT64_MAX) return UINT64_MAX;
            return binomial(static_cast<std::uint64_t>(d) + m - 1, m - 1);
        }
        case K::Nbhd: {
            std::uint64_t m = cardinality(t.inner(), n, d);
            return m >= 6 ? UINT64_MAX : sat::pow2(sat::pow2(m));
        }
    }
    return 0;
}

std::vector<TValue> apply_on_set(const Functor& t, const FinSet& x, const Limits& limits) {
    auto out = enumerate(t, x, limits);
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Action on functions

FunctorAction::FunctorAction(Functor t, FinFun f, Limits limits)
    : t_(std::move(t)), f_(std::move(f)), limits_(std::move(limits)) {}

TValue FunctorAction::operator()(const TValue& v) const { return apply(t_, v, ""); }

const FunctorAction::NbhdCache& FunctorAction::cache_for(const Functor& inner) const {
    auto it = nbhd_cache_.find(inner.node_id());
    if (it != nbhd_cache_.end()) return it->second;
    NbhdCache c;
    c.dom_values = apply_on_set(inner, f_.dom(), limits_);
    c.cod_values = apply_on_set(inner, f_.cod(), limits_);
    std::vector<bool> hit(c.cod_values.size(), false);
    for (const auto& u : c.dom_values) {
        TValue img = apply(inner, u, "");
        auto pos = std::lower_bound(c.cod_values.begin(), c.cod_values.end(), img);
        std::size_t k = static_cast<std::size_t>(pos - c.cod_values.begin());
        c.image.push_back(k);
        hit[k] = true;
    }
    for (std::size_t k = 0; k < hit.size(); ++k)
        if (!hit[k]) c.outside.push_back(k);
    return nbhd_cache_.emplace(inner.node_id(), std::move(c)).first->second;
}

TValue FunctorAction::apply(const Functor& t, const TValue& v, const std::string& path) const {
    using K = Functor::Kind;
    using V = TValue::Kind;
    auto mismatch = [&](const char* what) { return ShapeError(std::string("expected ") + what + ", found " + v.to_string(), path); };
    switch (t.kind()) {
        case K::Id: {
            if (v.kind() != V::State) throw mismatch("a state");
            auto i = f_.dom().find(v.symbol());
            if (!i) throw ShapeError("state \"" + v.symbol() + "\" outside the function's domain", path);
            return TValue::state(f_.cod()[f_(*i)]);
        }
        case K::Const:
            if (v.kind() != V::Const) throw mismatch("a constant");
            return v;
        case K::Prod:
            if (v.kind() != V::Pair) throw mismatch("a pair");
            return TValue::pair(apply(t.left(), v.first(), extend(path, "pi1")),
                                apply(t.right(), v.second(), extend(path, "pi2")));
        case K::Coprod:
            if (v.kind() == V::Inl) return TValue::inl(apply(t.left(), v.payload(), extend(path, "inl")));
            if (v.kind() == V::Inr) return TValue::inr(apply(t.right(), v.payload(), extend(path, "inr")));
            throw mismatch("an injection");
        case K::Exp: {
            if (v.kind() != V::Table || v.items().size() != t.alphabet().size()) throw mismatch("a table");
            std::vector<TValue> entries;
            entries.reserve(v.items().size());
            for (std::size_t i = 0; i < v.items().size(); ++i)
                entries.push_back(apply(t.inner(), v.items()[i], extend(path, "@" + t.alphabet()[i])));
            return TValue::table(std::move(entries));
        }
        case K::Pow: {
            if (v.kind() != V::Set) throw mismatch("a set");
            std::vector<TValue> image;
            image.reserve(v.items().size());
            for (std::size_t i = 0; i < v.items().size(); ++i)
                image.push_back(apply(t.inner(), v.items()[i], extend(path, "set[" + std::to_string(i) + "]")));
            return TValue::set(std::move(image));
        }
        case K::Dist: {
            if (v.kind() != V::Dist) throw mismatch("a distribution");
            std::vector<std::pair<TValue, Rational>> pushed;
            for (std::size_t i = 0; i < v.items().size(); ++i)
                pushed.emplace_back(apply(t.inner(), v.items()[i], extend(path, "dist[" + std::to_string(i) + "]")),
                                    v.weights()[i]);
            return TValue::dist(std::move(pushed));
        }
        case K::Nbhd: {
            if (v.kind() != V::Nbhd) throw mismatch("a neighbourhood");
            const NbhdCache& c = cache_for(t.inner());
            auto dom_index = [&](const TValue& u) -> std::size_t {
                auto pos = std::lower_bound(c.dom_values.begin(), c.dom_values.end(), u);
                if (pos == c.dom_values.end() || !(*pos == u))
                    throw ShapeError("neighbourhood member outside F X: " + u.to_string(), path);
                return static_cast<std::size_t>(pos - c.dom_values.begin());
            };
            limits_.require(sat::mul(sat::pow2(c.outside.size()), v.items().size()), "neighbourhood image");
            std::vector<TValue> result;
            for (const auto& member : v.items()) {
                // Only members that are full preimages (unions of fibres of F f) contribute.
                std::vector<bool> in_member(c.dom_values.size(), false);
                std::vector<bool> in_image(c.cod_values.size(), false);
                for (const auto& u : member.items()) {
                    std::size_t i = dom_index(u);
                    in_member[i] = true;
                    in_image[c.image[i]] = true;
                }
                bool saturated = true;
                for (std::size_t i = 0; i < c.dom_values.size() && saturated; ++i)
                    if (in_image[c.image[i]] && !in_member[i]) saturated = false;
                if (!saturated) continue;
                std::vector<TValue> core;
                for (std::size_t k = 0; k < c.cod_values.size(); ++k)
                    if (in_image[k]) core.push_back(c.cod_values[k]);
                std::uint64_t extra = sat::pow2(c.outside.size());
                for (std::uint64_t mask = 0; mask < extra; ++mask) {
                    std::vector<TValue> b = core;
                    for (std::size_t j = 0; j < c.outside.size(); ++j)
                        if (mask >> j & 1) b.push_back(c.cod_values[c.outside[j]]);
                    result.push_back(TValue::set(std::move(b)));
                }
            }
            return TValue::nbhd(std::move(result));
        }
    }
    return v;
}

FunctorLawReport check_functor_laws(const Functor& t, const FinFun& f, const FinFun& g, const Limits& limits) {
    FunctorLawReport report;
    auto values = apply_on_set(t, f.dom(), limits);
    FunctorAction id_x(t, FinFun::identity(f.dom()), limits);
    FunctorAction tf(t, f, limits);
    FunctorAction tg(t, g, limits);
    FunctorAction tgf(t, f.then(g), limits);
    for (const auto& v : values) {
        limits.poll();
        ++report.identity_checked;
        if (report.identity_holds && !(id_x(v) == v)) {
            report.identity_holds = false;
            if (!report.counterexample) report.counterexample = v;
        }
        ++report.composition_checked;
        if (report.composition_holds && !(tgf(v) == tg(tf(v)))) {
            report.composition_holds = false;
            if (!report.counterexample) report.counterexample = v;
        }
    }
    return report;
}

TValue pow_prod_to_exp_pow(const TValue& v, const FinSet& labels) {
    if (v.kind() != TValue::Kind::Set) throw ShapeError("expected a set of labelled successors", "");
    std::vector<std::vector<TValue>> per_label(labels.size());
    for (const auto& p : v.items()) {
        if (p.kind() != TValue::Kind::Pair || p.first().kind() != TValue::Kind::Const)
            throw ShapeError("expected (label, successor) pairs", "");
        per_label[labels.index_of(p.first().symbol())].push_back(p.second());
    }
    std::vector<TValue> entries;
    for (auto& succ : per_label) entries.push_back(TValue::set(std::move(succ)));
    return TValue::table(std::move(entries));
}

TValue exp_pow_to_pow_prod(const TValue& v, const FinSet& labels) {
    if (v.kind() != TValue::Kind::Table || v.items().size() != labels.size())
        throw ShapeError("expected a table of successor sets", "");
    std::vector<TValue> pairs;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (const auto& s : v.items()[i].items()) pairs.push_back(TValue::pair(TValue::constant(labels[i]), s));
    return TValue::set(std::move(pairs));
}

}  // namespace coalg
