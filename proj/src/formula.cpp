// SPDX-License-Identifier: Apache-2.0
#include "coalg/formula.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "coalg/coalgebra.hpp"
#include "coalg/error.hpp"

namespace coalg {

namespace {

Formula make(FormulaOp op, Formula l = nullptr, Formula r = nullptr, std::string name = {}, Step s = nullptr) {
    auto n = std::make_shared<FormulaNode>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    n->name = std::move(name);
    n->step = std::move(s);
    return n;
}

Step make_step(StepOp op, Step l = nullptr, Step r = nullptr, std::string sym = {}, Formula body = nullptr,
               Rational q = {}) {
    auto n = std::make_shared<StepNode>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    n->symbol = std::move(sym);
    n->body = std::move(body);
    n->threshold = q;
    return n;
}

void need(const void* p) {
    if (!p) throw Error("null formula operand");
}

}  // namespace

namespace fml {
Formula top() {
    static const Formula t = make(FormulaOp::True);
    return t;
}
Formula bottom() {
    static const Formula f = make(FormulaOp::False);
    return f;
}
Formula neg(Formula a) { return need(a.get()), make(FormulaOp::Not, std::move(a)); }
Formula conj(Formula a, Formula b) { return need(a.get()), need(b.get()), make(FormulaOp::And, std::move(a), std::move(b)); }
Formula disj(Formula a, Formula b) { return need(a.get()), need(b.get()), make(FormulaOp::Or, std::move(a), std::move(b)); }
Formula implies(Formula a, Formula b) {
    return need(a.get()), need(b.get()), make(FormulaOp::Implies, std::move(a), std::move(b));
}
Formula next(Step s) { return need(s.get()), make(FormulaOp::Next, nullptr, nullptr, {}, std::move(s)); }
Formula letter(std::string name) { return make(FormulaOp::Letter, nullptr, nullptr, std::move(name)); }
Formula box(Formula a) { return need(a.get()), make(FormulaOp::Box, std::move(a)); }
Formula diamond(Formula a) { return need(a.get()), make(FormulaOp::Diamond, std::move(a)); }
Formula label_box(std::string label, Formula a) {
    return need(a.get()), make(FormulaOp::LabelBox, std::move(a), nullptr, std::move(label));
}
Formula label_diamond(std::string label, Formula a) {
    return need(a.get()), make(FormulaOp::LabelDiamond, std::move(a), nullptr, std::move(label));
}
}  // namespace fml

namespace step {
Step embed(Formula f) { return need(f.get()), make_step(StepOp::Embed, nullptr, nullptr, {}, std::move(f)); }
Step top() {
    static const Step t = make_step(StepOp::True);
    return t;
}
Step bottom() {
    static const Step f = make_step(StepOp::False);
    return f;
}
Step neg(Step a) { return need(a.get()), make_step(StepOp::Not, std::move(a)); }
Step conj(Step a, Step b) { return need(a.get()), need(b.get()), make_step(StepOp::And, std::move(a), std::move(b)); }
Step disj(Step a, Step b) { return need(a.get()), need(b.get()), make_step(StepOp::Or, std::move(a), std::move(b)); }
Step implies(Step a, Step b) {
    return need(a.get()), need(b.get()), make_step(StepOp::Implies, std::move(a), std::move(b));
}
Step conj_all(const std::vector<Step>& parts) {
    if (parts.empty()) return top();
    Step acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = conj(acc, parts[i]);
    return acc;
}
Step disj_all(const std::vector<Step>& parts) {
    if (parts.empty()) return bottom();
    Step acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = disj(acc, parts[i]);
    return acc;
}
Step eq(std::string c) { return make_step(StepOp::Eq, nullptr, nullptr, std::move(c)); }
Step pi1(Step a) { return need(a.get()), make_step(StepOp::Pi1, std::move(a)); }
Step pi2(Step a) { return need(a.get()), make_step(StepOp::Pi2, std::move(a)); }
Step isl() { return make_step(StepOp::IsL); }
Step isr() { return make_step(StepOp::IsR); }
Step inl(Step a) { return need(a.get()), make_step(StepOp::InL, std::move(a)); }
Step inr(Step a) { return need(a.get()), make_step(StepOp::InR, std::move(a)); }
Step at(std::string key, Step a) { return need(a.get()), make_step(StepOp::At, std::move(a), nullptr, std::move(key)); }
Step box(Step a) { return need(a.get()), make_step(StepOp::Box, std::move(a)); }
Step diamond(Step a) { return need(a.get()), make_step(StepOp::Diamond, std::move(a)); }
Step prob(Rational q, Step a) {
    need(a.get());
    if (q < Rational(0) || Rational(1) < q) throw Error("probability threshold " + q.to_string() + " outside [0,1]");
    return make_step(StepOp::Prob, std::move(a), nullptr, {}, nullptr, q);
}
Step nbox(Step a) { return need(a.get()), make_step(StepOp::NBox, std::move(a)); }
}  // namespace step

// ---------------------------------------------------------------------------
// Parser

namespace {

bool symbol_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("_*+'#$.:!?").find(c) != std::string_view::npos;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

class FormulaParser {
public:
    explicit FormulaParser(std::string_view text) : s_(text) {}

    Formula parse() {
        Formula f = implication();
        skip();
        if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
            if (s_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("formula: " + msg, line, col);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(std::string_view tok) {
        skip();
        return s_.substr(pos_, tok.size()) == tok;
    }
    bool eat(std::string_view tok) {
        if (!peek(tok)) return false;
        pos_ += tok.size();
        return true;
    }
    void expect(std::string_view tok) {
        if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
    }

    /// Identifier at the cursor without consuming it.
    std::string peek_ident() {
        skip();
        std::size_t p = pos_;
        if (p >= s_.size() || !ident_start(s_[p])) return {};
        while (p < s_.size() && ident_char(s_[p])) ++p;
        return std::string(s_.substr(pos_, p - pos_));
    }

    std::string symbol() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && symbol_char(s_[pos_])) ++pos_;
        if (start == pos_) fail("expected a symbol");
        return std::string(s_.substr(start, pos_ - start));
    }

    /// `[label]` / `<label>`, with the opening bracket at the cursor. Returns
    /// false (cursor unchanged) when the brackets do not enclose a label.
    bool label(char open, char close, std::string& out) {
        skip();
        if (pos_ >= s_.size() || s_[pos_] != open) return false;
        std::size_t p = pos_ + 1;
        while (p < s_.size() && s_[p] == ' ') ++p;
        std::size_t start = p;
        while (p < s_.size() && symbol_char(s_[p])) ++p;
        std::size_t stop = p;
        while (p < s_.size() && s_[p] == ' ') ++p;
        if (stop == start || p >= s_.size() || s_[p] != close) return false;
        out = std::string(s_.substr(start, stop - start));
        pos_ = p + 1;
        return true;
    }

    // -- state layer --

    Formula implication() {
        Formula l = disjunction();
        if (eat("->")) return fml::implies(l, implication());
        return l;
    }
    Formula disjunction() {
        Formula l = conjunction();
        while (eat("|")) l = fml::disj(l, conjunction());
        return l;
    }
    Formula conjunction() {
        Formula l = unary();
        while (eat("&")) l = fml::conj(l, unary());
        return l;
    }
    Formula unary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of formula");
        if (eat("~")) return fml::neg(unary());
        if (eat("(")) {
            Formula f = implication();
            expect(")");
            return f;
        }
        if (eat("[]")) return fml::box(unary());
        if (eat("<>")) return fml::diamond(unary());
        std::string lab;
        if (label('[', ']', lab)) return fml::label_box(lab, unary());
        if (label('<', '>', lab)) return fml::label_diamond(lab, unary());
        std::string id = peek_ident();
        if (id.empty()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        pos_ += id.size();
        if (id == "true") return fml::top();
        if (id == "false") return fml::bottom();
        if (id == "O") return fml::next(step_unary());
        return fml::letter(id);
    }

    // -- one-step layer --

    Step step_implication() {
        Step l = step_disjunction();
        if (eat("->")) return step::implies(l, step_implication());
        return l;
    }
    Step step_disjunction() {
        Step l = step_conjunction();
        while (eat("|")) l = step::disj(l, step_conjunction());
        return l;
    }
    Step step_conjunction() {
        Step l = step_unary();
        while (eat("&")) l = step::conj(l, step_unary());
        return l;
    }
    Step step_unary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of formula");
        if (eat("~")) return step::neg(step_unary());
        if (eat("(")) {
            Step s = step_implication();
            expect(")");
            return s;
        }
        if (eat("{")) {
            Formula f = implication();
            expect("}");
            return step::embed(f);
        }
        if (eat("[]")) return step::box(step_unary());
        if (eat("<>")) return step::diamond(step_unary());
        if (eat("[N]")) return step::nbox(step_unary());
        if (eat("=")) return step::eq(symbol());
        if (eat("@")) {
            std::string key = symbol();
            return step::at(key, step_unary());
        }
        std::string lab;
        if (peek("[") && label('[', ']', lab)) return step::embed(fml::label_box(lab, unary()));
        if (peek("<") && label('<', '>', lab)) return step::embed(fml::label_diamond(lab, unary()));
        std::string id = peek_ident();
        if (id.empty()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        std::size_t after = pos_ + id.size();
        if ((id == "inl" || id == "inr") && after < s_.size() && s_[after] == '.') {
            pos_ = after + 1;
            Step a = step_unary();
            return id == "inl" ? step::inl(a) : step::inr(a);
        }
        if (id == "Pr" && s_.substr(after, 2) == ">=") {
            pos_ = after + 2;
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '/')) ++pos_;
            if (start == pos_) fail("expected a probability threshold");
            Rational q;
            try {
                q = Rational::parse(s_.substr(start, pos_ - start));
            } catch (const Error& e) {
                pos_ = start;
                fail(e.what());
            }
            if (Rational(1) < q) {
                pos_ = start;
                fail("probability threshold above 1");
            }
            return step::prob(q, step_unary());
        }
        pos_ = after;
        if (id == "true") return step::top();
        if (id == "false") return step::bottom();
        if (id == "pi1") return step::pi1(step_unary());
        if (id == "pi2") return step::pi2(step_unary());
        if (id == "isl") return step::isl();
        if (id == "isr") return step::isr();
        if (id == "O") return step::embed(fml::next(step_unary()));
        return step::embed(fml::letter(id));
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text) { return FormulaParser(text).parse(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

void print(const Formula& f, std::string& out);

void print(const Step& s, std::string& out) {
    auto binary = [&](const char* op) {
        out += '(';
        print(s->lhs, out);
        out += op;
        print(s->rhs, out);
        out += ')';
    };
    auto prefix = [&](const std::string& op) {
        out += op;
        print(s->lhs, out);
    };
    switch (s->op) {
        case StepOp::Embed:
            out += '{';
            print(s->body, out);
            out += '}';
            return;
        case StepOp::True: out += "true"; return;
        case StepOp::False: out += "false"; return;
        case StepOp::Not: prefix("~"); return;
        case StepOp::And: binary(" & "); return;
        case StepOp::Or: binary(" | "); return;
        case StepOp::Implies: binary(" -> "); return;
        case StepOp::Eq: out += "= " + s->symbol; return;
        case StepOp::Pi1: prefix("pi1 "); return;
        case StepOp::Pi2: prefix("pi2 "); return;
        case StepOp::IsL: out += "isl"; return;
        case StepOp::IsR: out += "isr"; return;
        case StepOp::InL: prefix("inl."); return;
        case StepOp::InR: prefix("inr."); return;
        case StepOp::At: prefix("@" + s->symbol + " "); return;
        case StepOp::Box: prefix("[] "); return;
        case StepOp::Diamond: prefix("<> "); return;
        case StepOp::Prob: prefix("Pr>=" + s->threshold.to_string() + " "); return;
        case StepOp::NBox: prefix("[N] "); return;
    }
}

void print(const Formula& f, std::string& out) {
    auto binary = [&](const char* op) {
        out += '(';
        print(f->lhs, out);
        out += op;
        print(f->rhs, out);
        out += ')';
    };
    auto prefix = [&](const std::string& op) {
        out += op;
        print(f->lhs, out);
    };
    switch (f->op) {
        case FormulaOp::True: out += "true"; return;
        case FormulaOp::False: out += "false"; return;
        case FormulaOp::Not: prefix("~"); return;
        case FormulaOp::And: binary(" & "); return;
        case FormulaOp::Or: binary(" | "); return;
        case FormulaOp::Implies: binary(" -> "); return;
        case FormulaOp::Next:
            out += "O ";
            print(f->step, out);
            return;
        case FormulaOp::Letter: out += f->name; return;
        case FormulaOp::Box: prefix("[] "); return;
        case FormulaOp::Diamond: prefix("<> "); return;
        case FormulaOp::LabelBox: prefix("[" + f->name + "] "); return;
        case FormulaOp::LabelDiamond: prefix("<" + f->name + "> "); return;
    }
}

}  // namespace

std::string to_string(const Formula& f) {
    std::string out;
    print(f, out);
    return out;
}

std::string to_string(const Step& s) {
    std::string out;
    print(s, out);
    return out;
}

// ---------------------------------------------------------------------------
// Structure

bool equal(const Step& a, const Step& b);

bool equal(const Formula& a, const Formula& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op != b->op || a->name != b->name) return false;
    if (!!a->lhs != !!b->lhs || (a->lhs && !equal(a->lhs, b->lhs))) return false;
    if (!!a->rhs != !!b->rhs || (a->rhs && !equal(a->rhs, b->rhs))) return false;
    if (!!a->step != !!b->step || (a->step && !equal(a->step, b->step))) return false;
    return true;
}

bool equal(const Step& a, const Step& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op != b->op || a->symbol != b->symbol || !(a->threshold == b->threshold)) return false;
    if (!!a->lhs != !!b->lhs || (a->lhs && !equal(a->lhs, b->lhs))) return false;
    if (!!a->rhs != !!b->rhs || (a->rhs && !equal(a->rhs, b->rhs))) return false;
    if (!!a->body != !!b->body || (a->body && !equal(a->body, b->body))) return false;
    return true;
}

namespace {

std::size_t size_of(const Step& s);

std::size_t size_of(const Formula& f) {
    if (!f) return 0;
    return 1 + size_of(f->lhs) + size_of(f->rhs) + (f->step ? size_of(f->step) : 0);
}

std::size_t size_of(const Step& s) {
    if (!s) return 0;
    return 1 + size_of(s->lhs) + size_of(s->rhs) + size_of(s->body);
}

std::size_t depth_of(const Step& s);

std::size_t depth_of(const Formula& f) {
    if (!f) return 0;
    switch (f->op) {
        case FormulaOp::Next: return 1 + depth_of(f->step);
        case FormulaOp::Box:
        case FormulaOp::Diamond:
        case FormulaOp::LabelBox:
        case FormulaOp::LabelDiamond: return 1 + depth_of(f->lhs);
        case FormulaOp::Letter: return 0;
        default: return std::max(depth_of(f->lhs), depth_of(f->rhs));
    }
}

std::size_t depth_of(const Step& s) {
    if (!s) return 0;
    if (s->op == StepOp::Embed) return depth_of(s->body);
    return std::max(depth_of(s->lhs), depth_of(s->rhs));
}

void collect_letters(const Formula& f, std::set<std::string>& out);

void collect_letters(const Step& s, std::set<std::string>& out) {
    if (!s) return;
    collect_letters(s->lhs, out);
    collect_letters(s->rhs, out);
    collect_letters(s->body, out);
}

void collect_letters(const Formula& f, std::set<std::string>& out) {
    if (!f) return;
    if (f->op == FormulaOp::Letter) out.insert(f->name);
    collect_letters(f->lhs, out);
    collect_letters(f->rhs, out);
    collect_letters(f->step, out);
}

}  // namespace

std::size_t formula_size(const Formula& f) { return size_of(f); }
std::size_t modal_depth(const Formula& f) { return depth_of(f); }

std::vector<std::string> letters_of(const Formula& f) {
    std::set<std::string> out;
    collect_letters(f, out);
    return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------
// Elaboration

namespace {

using Kind = Functor::Kind;

std::string extend(const std::string& path, const std::string& s) { return path.empty() ? s : path + "/" + s; }

const char* step_name(StepOp op) {
    switch (op) {
        case StepOp::Embed: return "{..}";
        case StepOp::Eq: return "=";
        case StepOp::Pi1: return "pi1";
        case StepOp::Pi2: return "pi2";
        case StepOp::IsL: return "isl";
        case StepOp::IsR: return "isr";
        case StepOp::InL: return "inl.";
        case StepOp::InR: return "inr.";
        case StepOp::At: return "@";
        case StepOp::Box: return "[]";
        case StepOp::Diamond: return "<>";
        case StepOp::Prob: return "Pr>=";
        case StepOp::NBox: return "[N]";
        default: return "boolean";
    }
}

bool boolean(StepOp op) {
    return op == StepOp::True || op == StepOp::False || op == StepOp::Not || op == StepOp::And || op == StepOp::Or ||
           op == StepOp::Implies;
}

/// Whether a non-boolean operator addresses `sort` itself.
bool native(const StepNode& s, const Functor& sort) {
    switch (s.op) {
        case StepOp::Embed: return sort.kind() == Kind::Id;
        case StepOp::Eq: return sort.kind() == Kind::Const && sort.alphabet().contains(s.symbol);
        case StepOp::Pi1:
        case StepOp::Pi2: return sort.kind() == Kind::Prod;
        case StepOp::IsL:
        case StepOp::IsR:
        case StepOp::InL:
        case StepOp::InR: return sort.kind() == Kind::Coprod;
        case StepOp::At: return sort.kind() == Kind::Exp && sort.alphabet().contains(s.symbol);
        case StepOp::Box:
        case StepOp::Diamond: return sort.kind() == Kind::Pow;
        case StepOp::Prob: return sort.kind() == Kind::Dist;
        case StepOp::NBox: return sort.kind() == Kind::Nbhd;
        default: return true;
    }
}

/// Whether `s` fits `sort` directly or after projections.
bool reachable(const StepNode& s, const Functor& sort) {
    if (native(s, sort)) return true;
    if (sort.kind() == Kind::Prod) return reachable(s, sort.left()) || reachable(s, sort.right());
    return false;
}

}  // namespace

Elaborator::Elaborator(Functor functor) : functor_(std::move(functor)) {
    if (auto l = kripke_letters(functor_)) {
        letters_ = *l;
        has_letters_ = true;
    }
}

Formula Elaborator::operator()(const Formula& f) { return formula(f, ""); }

Formula Elaborator::formula(const Formula& f, const std::string& path) {
    if (!f) throw Error("null formula");
    if (auto it = memo_.find(f.get()); it != memo_.end()) return it->second.second;

    auto rebuild_binary = [&](FormulaOp op) {
        Formula l = formula(f->lhs, path);
        Formula r = formula(f->rhs, path);
        if (l == f->lhs && r == f->rhs) return f;
        return make(op, l, r);
    };

    Formula out;
    switch (f->op) {
        case FormulaOp::True:
        case FormulaOp::False: out = f; break;
        case FormulaOp::Not: {
            Formula a = formula(f->lhs, path);
            out = a == f->lhs ? f : fml::neg(a);
            break;
        }
        case FormulaOp::And:
        case FormulaOp::Or:
        case FormulaOp::Implies: out = rebuild_binary(f->op); break;
        case FormulaOp::Next: {
            Step s = one_step(f->step, functor_, extend(path, "O"));
            out = s == f->step ? f : fml::next(s);
            break;
        }
        case FormulaOp::Letter: {
            if (!has_letters_)
                throw SortError("letter '" + f->name + "' needs a functor of shape C{V} * P(Id) with V valuations",
                                path);
            if (!std::binary_search(letters_.begin(), letters_.end(), f->name))
                throw SortError("unknown letter '" + f->name + "'", path);
            std::vector<Step> vals;
            for (const auto& v : functor_.left().alphabet()) {
                auto ls = valuation_letters(v);
                if (std::binary_search(ls->begin(), ls->end(), f->name)) vals.push_back(step::eq(v));
            }
            out = fml::next(step::pi1(step::disj_all(vals)));
            break;
        }
        case FormulaOp::Box:
        case FormulaOp::Diamond: {
            bool box = f->op == FormulaOp::Box;
            const char* op = box ? "[]" : "<>";
            // Plain P(Id), or any functor with a unique P(Id) component (for example the Kripke shape).
            Step inner = step::embed(formula(f->lhs, extend(path, op)));
            Step s = box ? step::box(inner) : step::diamond(inner);
            if (!reachable(*s, functor_))
                throw SortError(std::string("'") + op + "' needs a powerset component in " + functor_.to_string(), path);
            out = fml::next(infer(s, functor_, extend(path, "O")));
            break;
        }
        case FormulaOp::LabelBox:
        case FormulaOp::LabelDiamond: {
            bool box = f->op == FormulaOp::LabelBox;
            std::string where = extend(path, (box ? "[" : "<") + f->name + (box ? "]" : ">"));
            Formula body = formula(f->lhs, where);
            const Functor& t = functor_;
            if (t.kind() == Kind::Exp && t.inner().kind() == Kind::Pow && t.inner().inner().kind() == Kind::Id) {
                if (!t.alphabet().contains(f->name)) throw SortError("unknown label '" + f->name + "'", path);
                Step inner = step::embed(body);
                out = fml::next(step::at(f->name, box ? step::box(inner) : step::diamond(inner)));
            } else if (t.kind() == Kind::Pow && t.inner().kind() == Kind::Prod &&
                       t.inner().left().kind() == Kind::Const && t.inner().right().kind() == Kind::Id) {
                if (!t.inner().left().alphabet().contains(f->name))
                    throw SortError("unknown label '" + f->name + "'", path);
                Step is_label = step::pi1(step::eq(f->name));
                Step then = step::pi2(step::embed(body));
                out = fml::next(box ? step::box(step::disj(step::neg(is_label), then))
                                    : step::diamond(step::conj(is_label, then)));
            } else {
                throw SortError("labelled modalities need P(C * Id) or P(Id)^C, not " + t.to_string(), path);
            }
            break;
        }
    }
    memo_.emplace(f.get(), std::make_pair(f, out));
    return out;
}

Step Elaborator::infer(const Step& s, const Functor& sort, const std::string& path) {
    if (native(*s, sort)) return one_step(s, sort, path);
    if (sort.kind() == Kind::Prod) {
        bool l = reachable(*s, sort.left());
        bool r = reachable(*s, sort.right());
        if (l && r)
            throw SortError(std::string("'") + step_name(s->op) + "' is ambiguous in " + sort.to_string() +
                                "; add pi1 or pi2",
                            path);
        if (l) return step::pi1(infer(s, sort.left(), extend(path, "pi1")));
        if (r) return step::pi2(infer(s, sort.right(), extend(path, "pi2")));
    }
    std::string what = std::string("'") + step_name(s->op) + "'";
    if (s->op == StepOp::Eq || s->op == StepOp::At) what += " with symbol '" + s->symbol + "'";
    throw SortError(what + " does not fit sort " + sort.to_string(), path);
}

Step Elaborator::one_step(const Step& s, const Functor& sort, const std::string& path) {
    if (!s) throw Error("null one-step formula");
    if (boolean(s->op)) {
        switch (s->op) {
            case StepOp::True:
            case StepOp::False: return s;
            case StepOp::Not: {
                Step a = one_step(s->lhs, sort, path);
                return a == s->lhs ? s : step::neg(a);
            }
            default: {
                Step l = one_step(s->lhs, sort, path);
                Step r = one_step(s->rhs, sort, path);
                if (l == s->lhs && r == s->rhs) return s;
                return make_step(s->op, l, r);
            }
        }
    }
    if (!native(*s, sort)) return infer(s, sort, path);
    switch (s->op) {
        case StepOp::Embed: {
            Formula b = formula(s->body, extend(path, "{}"));
            return b == s->body ? s : step::embed(b);
        }
        case StepOp::Eq:
        case StepOp::IsL:
        case StepOp::IsR: return s;
        case StepOp::Pi1:
        case StepOp::Pi2: {
            bool first = s->op == StepOp::Pi1;
            Step a = one_step(s->lhs, first ? sort.left() : sort.right(), extend(path, first ? "pi1" : "pi2"));
            return a == s->lhs ? s : make_step(s->op, a);
        }
        case StepOp::InL:
        case StepOp::InR: {
            bool left = s->op == StepOp::InL;
            Step a = one_step(s->lhs, left ? sort.left() : sort.right(), extend(path, left ? "inl" : "inr"));
            return a == s->lhs ? s : make_step(s->op, a);
        }
        case StepOp::At: {
            Step a = one_step(s->lhs, sort.inner(), extend(path, "@" + s->symbol));
            return a == s->lhs ? s : step::at(s->symbol, a);
        }
        case StepOp::Box:
        case StepOp::Diamond:
        case StepOp::NBox: {
            Step a = one_step(s->lhs, sort.inner(), extend(path, step_name(s->op)));
            return a == s->lhs ? s : make_step(s->op, a);
        }
        case StepOp::Prob: {
            Step a = one_step(s->lhs, sort.inner(), extend(path, "Pr>=" + s->threshold.to_string()));
            return a == s->lhs ? s : step::prob(s->threshold, a);
        }
        default: break;
    }
    throw std::logic_error("unhandled one-step operator");
}

Formula elaborate(const Formula& f, const Functor& functor) { return Elaborator(functor)(f); }

}  // namespace coalg
