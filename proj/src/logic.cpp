// SPDX-License-Identifier: Apache-2.0
#include "coalg/logic.hpp"

#include <algorithm>
#include <stdexcept>

#include "coalg/error.hpp"

namespace coalg {

using Kind = Functor::Kind;

std::vector<std::string> members(const StateSet& s, const FinSet& carrier) {
    std::vector<std::string> out;
    for (auto i = s.find_first(); i != StateSet::npos; i = s.find_next(i)) out.push_back(carrier[i]);
    return out;
}

StateSet state_set(const FinSet& carrier, const std::vector<std::string>& names) {
    StateSet s(carrier.size());
    for (const auto& n : names) s.set(carrier.index_of(n));
    return s;
}

// ---------------------------------------------------------------------------
// One-step semantics

OneStepSemantics::OneStepSemantics(FinSet carrier, EmbedFn embedded, Limits limits)
    : carrier_(std::move(carrier)), embedded_(std::move(embedded)), limits_(std::move(limits)) {}

bool OneStepSemantics::operator()(const Step& alpha, const TValue& t, const Functor& sort) const {
    return holds(alpha, t, sort);
}

void OneStepSemantics::pin(const TValue& t, const Functor& sort) const {
    switch (sort.kind()) {
        case Kind::Id:
        case Kind::Const: return;
        case Kind::Prod:
            pin(t.first(), sort.left());
            pin(t.second(), sort.right());
            return;
        case Kind::Coprod: pin(t.payload(), t.kind() == TValue::Kind::Inl ? sort.left() : sort.right()); return;
        case Kind::Exp:
            for (const auto& e : t.items()) pin(e, sort.inner());
            return;
        case Kind::Pow:
            if (sort.inner().kind() == Kind::Id) {
                StateSet m(carrier_.size());
                for (const auto& s : t.items()) m.set(carrier_.index_of(s.symbol()));
                member_cache_.emplace(&t, std::move(m));
            } else {
                for (const auto& e : t.items()) pin(e, sort.inner());
            }
            return;
        case Kind::Dist:
            for (const auto& e : t.items()) pin(e, sort.inner());
            return;
        case Kind::Nbhd: return;
    }
}

const StateSet& OneStepSemantics::members_of(const TValue& set) const {
    if (auto it = member_cache_.find(&set); it != member_cache_.end()) return it->second;
    scratch_.resize(carrier_.size());
    scratch_.reset();
    for (const auto& s : set.items()) scratch_.set(carrier_.index_of(s.symbol()));
    return scratch_;
}

const StateSet& OneStepSemantics::at_id(const Step& alpha) const {
    if (auto it = id_cache_.find(alpha.get()); it != id_cache_.end()) return it->second.second;
    StateSet out(carrier_.size());
    switch (alpha->op) {
        case StepOp::Embed:
            for (std::size_t i = 0; i < carrier_.size(); ++i)
                if (embedded_(alpha->body, i)) out.set(i);
            break;
        case StepOp::True: out.set(); break;
        case StepOp::False: break;
        case StepOp::Not: out = ~at_id(alpha->lhs); break;
        case StepOp::And: out = at_id(alpha->lhs) & at_id(alpha->rhs); break;
        case StepOp::Or: out = at_id(alpha->lhs) | at_id(alpha->rhs); break;
        case StepOp::Implies: out = ~at_id(alpha->lhs) | at_id(alpha->rhs); break;
        default: throw SortError("one-step operator does not fit sort Id", "");
    }
    return id_cache_.emplace(alpha.get(), std::make_pair(alpha, std::move(out))).first->second.second;
}

const TValue& OneStepSemantics::truth_set(const Step& alpha, const Functor& inner) const {
    auto key = std::make_pair(alpha.get(), inner.node_id());
    if (auto it = nbhd_cache_.find(key); it != nbhd_cache_.end()) return it->second.second;
    auto vit = values_.find(inner.node_id());
    if (vit == values_.end()) vit = values_.emplace(inner.node_id(), apply_on_set(inner, carrier_, limits_)).first;
    std::vector<TValue> yes;
    for (const auto& u : vit->second)
        if (holds(alpha, u, inner)) yes.push_back(u);
    return nbhd_cache_.emplace(key, std::make_pair(alpha, TValue::set(std::move(yes)))).first->second.second;
}

bool OneStepSemantics::holds(const Step& a, const TValue& t, const Functor& sort) const {
    switch (a->op) {
        case StepOp::True: return true;
        case StepOp::False: return false;
        case StepOp::Not: return !holds(a->lhs, t, sort);
        case StepOp::And: return holds(a->lhs, t, sort) && holds(a->rhs, t, sort);
        case StepOp::Or: return holds(a->lhs, t, sort) || holds(a->rhs, t, sort);
        case StepOp::Implies: return !holds(a->lhs, t, sort) || holds(a->rhs, t, sort);
        default: break;
    }
    auto mismatch = [&]() -> bool {
        throw SortError("one-step formula " + to_string(a) + " does not fit sort " + sort.to_string(), "");
    };
    switch (a->op) {
        case StepOp::Embed:
            if (sort.kind() != Kind::Id) return mismatch();
            return embedded_(a->body, carrier_.index_of(t.symbol()));
        case StepOp::Eq:
            if (sort.kind() != Kind::Const) return mismatch();
            return t.symbol() == a->symbol;
        case StepOp::Pi1:
            if (sort.kind() != Kind::Prod) return mismatch();
            return holds(a->lhs, t.first(), sort.left());
        case StepOp::Pi2:
            if (sort.kind() != Kind::Prod) return mismatch();
            return holds(a->lhs, t.second(), sort.right());
        case StepOp::IsL:
        case StepOp::IsR:
            if (sort.kind() != Kind::Coprod) return mismatch();
            return (t.kind() == TValue::Kind::Inl) == (a->op == StepOp::IsL);
        case StepOp::InL:
            if (sort.kind() != Kind::Coprod) return mismatch();
            return t.kind() == TValue::Kind::Inl && holds(a->lhs, t.payload(), sort.left());
        case StepOp::InR:
            if (sort.kind() != Kind::Coprod) return mismatch();
            return t.kind() == TValue::Kind::Inr && holds(a->lhs, t.payload(), sort.right());
        case StepOp::At: {
            if (sort.kind() != Kind::Exp) return mismatch();
            return holds(a->lhs, t.items().at(sort.alphabet().index_of(a->symbol)), sort.inner());
        }
        case StepOp::Box:
        case StepOp::Diamond: {
            if (sort.kind() != Kind::Pow) return mismatch();
            bool box = a->op == StepOp::Box;
            if (sort.inner().kind() == Kind::Id) {
                const StateSet& yes = at_id(a->lhs);
                const StateSet& m = members_of(t);
                return box ? m.is_subset_of(yes) : m.intersects(yes);
            }
            for (const auto& u : t.items())
                if (holds(a->lhs, u, sort.inner()) != box) return !box;
            return box;
        }
        case StepOp::Prob: {
            if (sort.kind() != Kind::Dist) return mismatch();
            Rational mass(0);
            const bool id = sort.inner().kind() == Kind::Id;
            for (std::size_t i = 0; i < t.items().size(); ++i) {
                const TValue& u = t.items()[i];
                bool yes = id ? at_id(a->lhs).test(carrier_.index_of(u.symbol())) : holds(a->lhs, u, sort.inner());
                if (yes) mass += t.weights()[i];
            }
            return !(mass < a->threshold);
        }
        case StepOp::NBox: {
            if (sort.kind() != Kind::Nbhd) return mismatch();
            const TValue& b = truth_set(a->lhs, sort.inner());
            return std::binary_search(t.items().begin(), t.items().end(), b);
        }
        default: break;
    }
    throw std::logic_error("unhandled one-step operator");
}

bool holds(const Step& alpha, const TValue& t, const Functor& sort, const FinSet& carrier, const EmbedFn& embedded,
           const Limits& limits) {
    return OneStepSemantics(carrier, embedded, limits)(alpha, t, sort);
}

// ---------------------------------------------------------------------------
// Evaluator

Evaluator::Evaluator(Coalgebra c, const Limits& limits)
    : c_(std::move(c)),
      limits_(c_.resolve(limits)),
      elab_(c_.functor()),
      sem_(c_.carrier(), [this](const Formula& body, std::size_t i) { return extension(body).test(i); }, limits_) {
    for (std::size_t i = 0; i < c_.size(); ++i) sem_.pin(c_.at(i), c_.functor());
}

StateSet Evaluator::operator()(const Formula& f) { return extension(elab_(f)); }

bool Evaluator::holds_at(const Formula& f, const std::string& state) {
    return (*this)(f).test(c_.carrier().index_of(state));
}

const StateSet& Evaluator::extension(const Formula& f) {
    if (auto it = memo_.find(f.get()); it != memo_.end()) return it->second.second;
    limits_.poll();
    const std::size_t n = c_.size();
    StateSet out(n);
    switch (f->op) {
        case FormulaOp::True: out.set(); break;
        case FormulaOp::False: break;
        case FormulaOp::Not: out = ~extension(f->lhs); break;
        case FormulaOp::And: out = extension(f->lhs) & extension(f->rhs); break;
        case FormulaOp::Or: out = extension(f->lhs) | extension(f->rhs); break;
        case FormulaOp::Implies: out = ~extension(f->lhs) | extension(f->rhs); break;
        case FormulaOp::Next:
            for (std::size_t i = 0; i < n; ++i)
                if (sem_(f->step, c_.at(i), c_.functor())) out.set(i);
            break;
        default: {
            // Sugar reached directly: elaborate this node and evaluate that.
            Formula e = elab_(f);
            if (e == f) throw std::logic_error("formula was not elaborated");
            out = extension(e);
            break;
        }
    }
    return memo_.emplace(f.get(), std::make_pair(f, std::move(out))).first->second.second;
}

StateSet eval(const Formula& f, const Coalgebra& c, const Limits& limits) { return Evaluator(c, limits)(f); }

// ---------------------------------------------------------------------------
// Liftings and naturality

namespace {

Limits with_denominator(const Functor& t, const Limits& limits) {
    Limits lim = limits;
    if (lim.denominator <= 0) {
        if (t.contains_dist()) throw Error("a denominator bound is needed to enumerate distributions");
        lim.denominator = 1;
    }
    return lim;
}

}  // namespace

std::vector<TValue> lifting_extension(const Step& alpha, const Functor& t, const FinSet& x, const StateSet& pred,
                                      const Limits& limits) {
    if (pred.size() != x.size()) throw Error("predicate size does not match the carrier");
    Limits lim = with_denominator(t, limits);
    OneStepSemantics sem(x, [&](const Formula&, std::size_t i) { return pred.test(i); }, lim);
    std::vector<TValue> out;
    for (const auto& v : apply_on_set(t, x, lim))
        if (sem(alpha, v, t)) out.push_back(v);
    return out;
}

NaturalityReport check_naturality(const Step& alpha, const Functor& t, const FinFun& f, const Limits& limits) {
    Limits lim = with_denominator(t, limits);
    const FinSet& x = f.dom();
    const FinSet& y = f.cod();
    if (y.size() >= 24) throw CapExceeded("too many predicates on the codomain");
    std::vector<TValue> tx = apply_on_set(t, x, lim);
    FunctorAction tf(t, f, lim);
    std::vector<TValue> images;
    images.reserve(tx.size());
    for (const auto& u : tx) images.push_back(tf(u));

    NaturalityReport report;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << y.size()); ++mask) {
        lim.poll();
        StateSet p(y.size(), mask);
        StateSet pre(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) pre[i] = p[f(i)];
        OneStepSemantics sy(y, [&](const Formula&, std::size_t i) { return p.test(i); }, lim);
        OneStepSemantics sx(x, [&](const Formula&, std::size_t i) { return pre.test(i); }, lim);
        ++report.predicates_checked;
        for (std::size_t k = 0; k < tx.size(); ++k) {
            if (sy(alpha, images[k], t) != sx(alpha, tx[k], t)) {
                report.holds = false;
                report.failing_predicate = members(p, y);
                report.witness = tx[k];
                return report;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Characteristic and distinguishing formulas

namespace {

Step falsum(const Functor& sort) { return sort.kind() == Kind::Id ? step::embed(fml::bottom()) : step::bottom(); }

Step disj_or_false(const std::vector<Step>& parts, const Functor& sort) {
    return parts.empty() ? falsum(sort) : step::disj_all(parts);
}

}  // namespace

Step char_one_step(const TValue& t, const Functor& sort, const FinSet& q, const std::vector<Formula>& chars,
                   const Limits& limits) {
    switch (sort.kind()) {
        case Kind::Id: return step::embed(chars.at(q.index_of(t.symbol())));
        case Kind::Const: return step::eq(t.symbol());
        case Kind::Prod:
            return step::conj(step::pi1(char_one_step(t.first(), sort.left(), q, chars, limits)),
                              step::pi2(char_one_step(t.second(), sort.right(), q, chars, limits)));
        case Kind::Coprod:
            if (t.kind() == TValue::Kind::Inl) return step::inl(char_one_step(t.payload(), sort.left(), q, chars, limits));
            return step::inr(char_one_step(t.payload(), sort.right(), q, chars, limits));
        case Kind::Exp: {
            std::vector<Step> parts;
            for (std::size_t i = 0; i < sort.alphabet().size(); ++i)
                parts.push_back(step::at(sort.alphabet()[i], char_one_step(t.items()[i], sort.inner(), q, chars, limits)));
            return step::conj_all(parts);
        }
        case Kind::Pow: {
            std::vector<Step> member_chars;
            for (const auto& u : t.items()) member_chars.push_back(char_one_step(u, sort.inner(), q, chars, limits));
            std::vector<Step> parts{step::box(disj_or_false(member_chars, sort.inner()))};
            for (const auto& m : member_chars) parts.push_back(step::diamond(m));
            return step::conj_all(parts);
        }
        case Kind::Dist: {
            std::vector<Step> parts;
            for (std::size_t i = 0; i < t.items().size(); ++i)
                parts.push_back(step::prob(t.weights()[i], char_one_step(t.items()[i], sort.inner(), q, chars, limits)));
            return step::conj_all(parts);
        }
        case Kind::Nbhd: {
            Limits lim = limits;
            if (lim.denominator <= 0) lim.denominator = 1;
            std::vector<TValue> fq = apply_on_set(sort.inner(), q, lim);
            lim.require(sat::pow2(fq.size()), "characteristic neighbourhood formula");
            std::vector<Step> value_chars;
            for (const auto& u : fq) value_chars.push_back(char_one_step(u, sort.inner(), q, chars, lim));
            std::vector<Step> parts;
            for (std::uint64_t mask = 0; mask < sat::pow2(fq.size()); ++mask) {
                lim.poll();
                std::vector<TValue> b;
                std::vector<Step> bchars;
                for (std::size_t i = 0; i < fq.size(); ++i)
                    if (mask >> i & 1) {
                        b.push_back(fq[i]);
                        bchars.push_back(value_chars[i]);
                    }
                Step box = step::nbox(disj_or_false(bchars, sort.inner()));
                bool in = std::binary_search(t.items().begin(), t.items().end(), TValue::set(std::move(b)));
                parts.push_back(in ? box : step::neg(box));
            }
            return step::conj_all(parts);
        }
    }
    throw std::logic_error("unhandled functor kind");
}

Distinguisher::Distinguisher(const Coalgebra& c, const Limits& limits) {
    Limits lim = c.resolve(limits);
    ref_ = behavioural_equivalence(c, lim);
    chars_.push_back({fml::top()});
    for (std::size_t level = 1; level < ref_.trace.size(); ++level) {
        const Partition& prev = ref_.trace[level - 1];
        const Partition& cur = ref_.trace[level];
        FinSet q = prev.quotient_set();
        std::vector<Formula> by_index(q.size());
        for (std::size_t b = 0; b < prev.num_blocks(); ++b) by_index[q.index_of("q" + std::to_string(b))] = chars_[level - 1][b];
        FunctorAction tq(c.functor(), prev.quotient_map(), lim);
        std::vector<Formula> level_chars;
        for (const auto& block : cur.blocks())
            level_chars.push_back(fml::next(char_one_step(tq(c.at(block.front())), c.functor(), q, by_index, lim)));
        chars_.push_back(std::move(level_chars));
    }
}

const Formula& Distinguisher::characteristic(std::size_t level, std::size_t x) const {
    return chars_.at(level).at(ref_.trace.at(level).block_of(x));
}

std::optional<Formula> Distinguisher::operator()(std::size_t x, std::size_t y) const {
    auto level = ref_.separation_level(x, y);
    if (!level) return std::nullopt;
    return characteristic(*level, x);
}

Distinction distinguishing_formula(const Coalgebra& c, const std::string& x, const std::string& y,
                                   const Limits& limits) {
    Distinguisher d(c, limits);
    return {d(c.carrier().index_of(x), c.carrier().index_of(y)), d.refinement().rounds()};
}

}  // namespace coalg
