#include "reachck/subtype.hpp"

#include <deque>

namespace reachck {

namespace {

// Declared qualifier usable for replacement (q-var / q-qvar), if any.
const Qual* replaceable(const Context& g, const Atom& a) {
    if (!a.isVar()) return nullptr;
    const Qual* d = g.declaredQual(a.name);
    if (!d || containsFresh(*d)) return nullptr;
    return d;
}

QType renameIn(const QType& q, const std::map<std::string, Qual>& m) { return substQualsInQType(q, m); }

}  // namespace

Qual expandTarget(const Context& g, const Qual& q) {
    Qual e = q;
    std::deque<Atom> work(q.begin(), q.end());
    while (!work.empty()) {
        Atom a = work.front();
        work.pop_front();
        if (!a.isVar()) continue;
        const Binding* b = g.lookupTerm(a.name);
        if (!b || containsFresh(b->q.q)) continue;
        for (const auto& r : b->q.q)
            if (e.insert(r).second) work.push_back(r);
    }
    return e;
}

bool subQual(const Context& g, const Qual& p, const Qual& q) {
    if (qsubset(p, q)) return true;
    Qual e = expandTarget(g, q);
    std::set<Atom> seen;
    std::deque<Atom> work(p.begin(), p.end());
    while (!work.empty()) {
        Atom a = work.front();
        work.pop_front();
        if (e.count(a) || !seen.insert(a).second) continue;
        const Qual* d = replaceable(g, a);
        if (!d) return false;
        for (const auto& r : *d) work.push_back(r);
    }
    return true;
}

TypeP promote(const Context& g, const TypeP& t) {
    TypeP cur = t;
    std::set<std::string> seen;
    while (cur && cur->kind == TypeKind::TVar && seen.insert(cur->tparam).second) {
        const Binding* b = g.lookupTypeVar(cur->tparam);
        if (!b) return cur;
        cur = b->q.ty;
    }
    return cur;
}

bool subType(const Context& g, const TypeP& s, const TypeP& t) {
    if (!s || !t) return false;
    if (alphaEq(s, t)) return true;
    if (s->kind == TypeKind::Bot || t->kind == TypeKind::Top) return true;
    if (s->kind == TypeKind::TVar) {
        if (t->kind == TypeKind::TVar && s->tparam == t->tparam) return true;
        const Binding* b = g.lookupTypeVar(s->tparam);
        if (!b) return false;
        return subType(g, b->q.ty, t);
    }
    if (s->kind != t->kind) return false;
    switch (s->kind) {
        case TypeKind::Unit:
        case TypeKind::Nat:
        case TypeKind::Bool: return true;
        case TypeKind::Fun: {
            std::string f = freshName(s->self.empty() ? "f" : s->self);
            std::string x = freshName(s->param.empty() ? "x" : s->param);
            std::map<std::string, Qual> ms{{s->self, {Atom::var(f)}}, {s->param, {Atom::var(x)}}};
            std::map<std::string, Qual> mt{{t->self, {Atom::var(f)}}, {t->param, {Atom::var(x)}}};
            if (!subQType(g, t->a, s->a)) return false;
            Context inner = g.withTerm(f, QType{s, {Atom::fresh()}}).withTerm(x, t->a);
            return subQType(inner, renameIn(s->b, ms), renameIn(t->b, mt));
        }
        case TypeKind::All: {
            std::string f = freshName(s->self.empty() ? "f" : s->self);
            std::string x = freshName(s->param.empty() ? "x" : s->param);
            std::string X = freshName(s->tparam);
            if (!subQType(g, t->a, s->a)) return false;
            QType sb = renameIn(s->b, {{s->self, {Atom::var(f)}}, {s->param, {Atom::var(x)}}});
            QType tb = renameIn(t->b, {{t->self, {Atom::var(f)}}, {t->param, {Atom::var(x)}}});
            sb.ty = substTypeVar(sb.ty, s->tparam, tVar(X));
            tb.ty = substTypeVar(tb.ty, t->tparam, tVar(X));
            Context inner = g.withTerm(f, QType{s, {Atom::fresh()}}).withType(X, x, t->a);
            return subQType(inner, sb, tb);
        }
        case TypeKind::Ref: {
            std::string z = freshName("z");
            std::map<std::string, Qual> ms, mt;
            if (!s->self.empty()) ms[s->self] = {Atom::var(z)};
            if (!t->self.empty()) mt[t->self] = {Atom::var(z)};
            QType sw = renameIn(s->a, ms), sr = renameIn(s->b, ms);
            QType tw = renameIn(t->a, mt), tr = renameIn(t->b, mt);
            Context inner = g.withTerm(z, QType{s, {Atom::fresh()}});
            return subType(inner, tw.ty, sw.ty) && subQual(inner, tw.q, sw.q) && subType(inner, sr.ty, tr.ty) &&
                   subQual(inner, sr.q, tr.q);
        }
        default: return false;
    }
}

std::optional<Qual> upcast(const Context& g, const QType& p, const TypeP& t) {
    if (!p.ty || !t) return std::nullopt;
    TypeP s = p.ty;
    if (t->kind == TypeKind::Ref && s->kind == TypeKind::TVar) s = promote(g, s);
    if (s->kind != TypeKind::Ref || t->kind != TypeKind::Ref) {
        if (subType(g, s, t)) return p.q;
        return std::nullopt;
    }
    std::string z = freshName("z");
    std::map<std::string, Qual> ms, mt;
    if (!s->self.empty()) ms[s->self] = {Atom::var(z)};
    if (!t->self.empty()) mt[t->self] = {Atom::var(z)};
    QType sw = renameIn(s->a, ms), sr = renameIn(s->b, ms);
    QType tw = renameIn(t->a, mt), tr = renameIn(t->b, mt);
    Context inner = g.withTerm(z, QType{s, p.q});

    if (!subType(inner, tw.ty, sw.ty) || !subQual(inner, tw.q, sw.q)) return std::nullopt;
    auto readQ = upcast(inner, sr, tr.ty);
    if (!readQ) return std::nullopt;

    if (!qhasVar(tr.q, z)) {
        if (!subQual(inner, *readQ, tr.q)) return std::nullopt;
        return p.q;
    }
    // Escape: whatever the target read qualifier does not cover moves outward.
    Qual r = p.q;
    for (const auto& a : *readQ)
        if (!subQual(inner, Qual{a}, tr.q)) r.insert(a);
    if (qhasVar(r, z)) return std::nullopt;
    if (!subQual(inner, qunion(*readQ, p.q), qunion(tr.q, r))) return std::nullopt;
    return r;
}

bool subQType(const Context& g, const QType& p, const QType& q) {
    auto r = upcast(g, p, q.ty);
    return r && subQual(g, *r, q.q);
}

}  // namespace reachck
