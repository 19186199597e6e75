#include "reachck/syntax.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>

namespace reachck {

Qual qualOf(std::initializer_list<Atom> atoms) { return Qual(atoms.begin(), atoms.end()); }

Qual qunion(const Qual& a, const Qual& b) {
    Qual r = a;
    r.insert(b.begin(), b.end());
    return r;
}

Qual qintersect(const Qual& a, const Qual& b) {
    Qual r;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(r, r.end()));
    return r;
}

Qual qminus(const Qual& a, const Qual& b) {
    Qual r;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(r, r.end()));
    return r;
}

Qual qwithout(const Qual& a, const Atom& x) {
    Qual r = a;
    r.erase(x);
    return r;
}

bool qsubset(const Qual& a, const Qual& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }
bool qhas(const Qual& q, const Atom& a) { return q.count(a) > 0; }
bool qhasVar(const Qual& q, const std::string& x) { return q.count(Atom::var(x)) > 0; }

std::string printAtom(const Atom& a) {
    switch (a.kind) {
        case Atom::Kind::Var: return a.name;
        case Atom::Kind::Loc: return "@" + std::to_string(a.loc);
        case Atom::Kind::Fresh: return "fresh";
    }
    return "?";
}

std::string printQual(const Qual& q) {
    std::string s = "{";
    bool first = true;
    for (const auto& a : q) {
        if (!first) s += ", ";
        first = false;
        s += printAtom(a);
    }
    return s + "}";
}

// ------------------------------------------------------------------ types

namespace {
TypeP mk(TypeKind k) {
    auto t = std::make_shared<Type>();
    t->kind = k;
    return t;
}
}  // namespace

TypeP tUnit() { static TypeP t = mk(TypeKind::Unit); return t; }
TypeP tNat() { static TypeP t = mk(TypeKind::Nat); return t; }
TypeP tBool() { static TypeP t = mk(TypeKind::Bool); return t; }
TypeP tTop() { static TypeP t = mk(TypeKind::Top); return t; }
TypeP tBot() { static TypeP t = mk(TypeKind::Bot); return t; }

TypeP tVar(std::string name) {
    auto t = std::make_shared<Type>();
    t->kind = TypeKind::TVar;
    t->tparam = std::move(name);
    return t;
}

TypeP tFun(std::string f, std::string x, QType dom, QType cod) {
    auto t = std::make_shared<Type>();
    t->kind = TypeKind::Fun;
    t->self = std::move(f);
    t->param = std::move(x);
    t->a = std::move(dom);
    t->b = std::move(cod);
    return t;
}

TypeP tAll(std::string f, std::string X, std::string x, QType bound, QType body) {
    auto t = std::make_shared<Type>();
    t->kind = TypeKind::All;
    t->self = std::move(f);
    t->tparam = std::move(X);
    t->param = std::move(x);
    t->a = std::move(bound);
    t->b = std::move(body);
    return t;
}

TypeP tRef(std::string z, QType write, QType read) {
    auto t = std::make_shared<Type>();
    t->kind = TypeKind::Ref;
    t->self = std::move(z);
    t->a = std::move(write);
    t->b = std::move(read);
    return t;
}

TypeP tRef(QType both) { return tRef("", both, both); }

bool isBase(const Type& t) {
    return t.kind == TypeKind::Unit || t.kind == TypeKind::Nat || t.kind == TypeKind::Bool;
}

namespace {

void qualVars(const Qual& q, const std::set<std::string>& bound, std::set<std::string>& out) {
    for (const auto& a : q)
        if (a.isVar() && !bound.count(a.name)) out.insert(a.name);
}

void fvType(const TypeP& t, std::set<std::string> bound, std::set<std::string>& out);

void fvQType(const QType& q, const std::set<std::string>& bound, std::set<std::string>& out) {
    qualVars(q.q, bound, out);
    fvType(q.ty, bound, out);
}

void fvType(const TypeP& t, std::set<std::string> bound, std::set<std::string>& out) {
    if (!t) return;
    switch (t->kind) {
        case TypeKind::Fun:
        case TypeKind::All:
            fvQType(t->a, bound, out);
            bound.insert(t->self);
            bound.insert(t->param);
            fvQType(t->b, bound, out);
            break;
        case TypeKind::Ref:
            if (!t->self.empty()) bound.insert(t->self);
            fvQType(t->a, bound, out);
            fvQType(t->b, bound, out);
            break;
        default: break;
    }
}

void ftvType(const TypeP& t, std::set<std::string> bound, std::set<std::string>& out) {
    if (!t) return;
    switch (t->kind) {
        case TypeKind::TVar:
            if (!bound.count(t->tparam)) out.insert(t->tparam);
            break;
        case TypeKind::Fun:
        case TypeKind::Ref:
            ftvType(t->a.ty, bound, out);
            ftvType(t->b.ty, bound, out);
            break;
        case TypeKind::All:
            ftvType(t->a.ty, bound, out);
            bound.insert(t->tparam);
            ftvType(t->b.ty, bound, out);
            break;
        default: break;
    }
}

void locsType(const TypeP& t, Qual& out) {
    if (!t) return;
    if (t->kind == TypeKind::Fun || t->kind == TypeKind::All || t->kind == TypeKind::Ref) {
        for (const QType* c : {&t->a, &t->b}) {
            for (const auto& a : c->q)
                if (a.isLoc()) out.insert(a);
            locsType(c->ty, out);
        }
    }
}

}  // namespace

std::set<std::string> freeVars(const TypeP& t) {
    std::set<std::string> out;
    fvType(t, {}, out);
    return out;
}

std::set<std::string> freeVars(const QType& q) {
    std::set<std::string> out;
    fvQType(q, {}, out);
    return out;
}

std::set<std::string> freeTypeVars(const TypeP& t) {
    std::set<std::string> out;
    ftvType(t, {}, out);
    return out;
}

Qual freeLocs(const TypeP& t) {
    Qual out;
    locsType(t, out);
    return out;
}

std::string freshName(const std::string& base) {
    static std::atomic<unsigned long> counter{0};
    std::string stem = base.substr(0, base.find('\''));
    if (stem.empty()) stem = "v";
    return stem + "'" + std::to_string(++counter);
}

// Combined qualifier-variable and type-variable substitution over types.
namespace {

using QS = std::map<std::string, Qual>;
using TS = std::map<std::string, TypeP>;

struct TypeSubst {
    QS quals;
    TS types;
    std::set<std::string> rangeVars;   // free qualifier vars of the range
    std::set<std::string> rangeTVars;  // free type vars of the range

    void computeRange() {
        rangeVars.clear();
        rangeTVars.clear();
        for (const auto& [k, q] : quals)
            for (const auto& a : q)
                if (a.isVar()) rangeVars.insert(a.name);
        for (const auto& [k, t] : types) {
            auto v = freeVars(t);
            rangeVars.insert(v.begin(), v.end());
            auto tv = freeTypeVars(t);
            rangeTVars.insert(tv.begin(), tv.end());
        }
    }
    bool empty() const { return quals.empty() && types.empty(); }
};

Qual applyQual(const Qual& q, const QS& s) {
    Qual out;
    for (const auto& a : q) {
        if (a.isVar()) {
            auto it = s.find(a.name);
            if (it != s.end()) {
                out.insert(it->second.begin(), it->second.end());
                continue;
            }
        }
        out.insert(a);
    }
    return out;
}

TypeP applyType(const TypeP& t, const TypeSubst& s);

QType applyQType(const QType& q, const TypeSubst& s) { return QType{applyType(q.ty, s), applyQual(q.q, s.quals)}; }

// Enter a qualifier-variable binder: drop it from the substitution and rename
// it if the range would be captured. Returns the (possibly renamed) binder.
std::string enterBinder(const std::string& b, TypeSubst& s) {
    if (b.empty()) return b;
    s.quals.erase(b);
    if (s.rangeVars.count(b)) {
        std::string nb = freshName(b);
        s.quals[b] = Qual{Atom::var(nb)};
        return nb;
    }
    return b;
}

TypeP applyType(const TypeP& t, const TypeSubst& s) {
    if (!t || s.empty()) return t;
    switch (t->kind) {
        case TypeKind::TVar: {
            auto it = s.types.find(t->tparam);
            return it != s.types.end() ? it->second : t;
        }
        case TypeKind::Fun: {
            QType dom = applyQType(t->a, s);
            TypeSubst inner = s;
            std::string f = enterBinder(t->self, inner);
            std::string x = enterBinder(t->param, inner);
            inner.computeRange();
            return tFun(f, x, dom, applyQType(t->b, inner));
        }
        case TypeKind::All: {
            QType bound = applyQType(t->a, s);
            TypeSubst inner = s;
            std::string f = enterBinder(t->self, inner);
            std::string x = enterBinder(t->param, inner);
            std::string X = t->tparam;
            inner.types.erase(X);
            if (inner.rangeTVars.count(X)) {
                std::string nX = freshName(X);
                inner.types[X] = tVar(nX);
                X = nX;
            }
            inner.computeRange();
            return tAll(f, X, x, bound, applyQType(t->b, inner));
        }
        case TypeKind::Ref: {
            TypeSubst inner = s;
            std::string z = enterBinder(t->self, inner);
            inner.computeRange();
            return tRef(z, applyQType(t->a, inner), applyQType(t->b, inner));
        }
        default: return t;
    }
}

TypeSubst makeSubst(QS quals, TS types) {
    TypeSubst s{std::move(quals), std::move(types), {}, {}};
    s.computeRange();
    return s;
}

}  // namespace

Qual substQual(const Qual& q, const std::string& x, const Qual& p) { return applyQual(q, QS{{x, p}}); }
Qual substQuals(const Qual& q, const std::map<std::string, Qual>& s) { return applyQual(q, s); }

TypeP substQualInType(const TypeP& t, const std::string& x, const Qual& p) {
    return applyType(t, makeSubst(QS{{x, p}}, {}));
}

QType substQualInQType(const QType& q, const std::string& x, const Qual& p) {
    return applyQType(q, makeSubst(QS{{x, p}}, {}));
}

TypeP substQualsInType(const TypeP& t, const std::map<std::string, Qual>& s) {
    return applyType(t, makeSubst(s, {}));
}

QType substQualsInQType(const QType& q, const std::map<std::string, Qual>& s) {
    return applyQType(q, makeSubst(s, {}));
}

TypeP substTypeVar(const TypeP& t, const std::string& X, const TypeP& by) {
    return applyType(t, makeSubst({}, TS{{X, by}}));
}

Qual substFreshQual(const Qual& q, const Qual& p) {
    if (!q.count(Atom::fresh())) return q;
    return qunion(q, p);
}

// ------------------------------------------------------------------ alpha

namespace {

struct AlphaEnv {
    std::map<std::string, int> qa, qb, ta, tb;
    int next = 0;
};

std::string canon(const std::string& n, const std::map<std::string, int>& m) {
    auto it = m.find(n);
    return it == m.end() ? "free:" + n : "#" + std::to_string(it->second);
}

bool qualEq(const Qual& a, const Qual& b, const AlphaEnv& e) {
    std::set<std::string> ca, cb;
    for (const auto& x : a) ca.insert(x.isVar() ? canon(x.name, e.qa) : "atom:" + printAtom(x));
    for (const auto& x : b) cb.insert(x.isVar() ? canon(x.name, e.qb) : "atom:" + printAtom(x));
    return ca == cb;
}

bool typeEq(const TypeP& a, const TypeP& b, AlphaEnv e);

bool qtypeEq(const QType& a, const QType& b, const AlphaEnv& e) {
    return qualEq(a.q, b.q, e) && typeEq(a.ty, b.ty, e);
}

void bindPair(AlphaEnv& e, const std::string& x, const std::string& y) {
    int id = e.next++;
    if (!x.empty()) e.qa[x] = id;
    if (!y.empty()) e.qb[y] = id;
}

bool typeEq(const TypeP& a, const TypeP& b, AlphaEnv e) {
    if (a == b && e.qa.empty() && e.qb.empty() && e.ta.empty() && e.tb.empty()) return true;
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case TypeKind::TVar: return canon(a->tparam, e.ta) == canon(b->tparam, e.tb);
        case TypeKind::Fun: {
            if (!qtypeEq(a->a, b->a, e)) return false;
            bindPair(e, a->self, b->self);
            bindPair(e, a->param, b->param);
            return qtypeEq(a->b, b->b, e);
        }
        case TypeKind::All: {
            if (!qtypeEq(a->a, b->a, e)) return false;
            bindPair(e, a->self, b->self);
            bindPair(e, a->param, b->param);
            int id = e.next++;
            e.ta[a->tparam] = id;
            e.tb[b->tparam] = id;
            return qtypeEq(a->b, b->b, e);
        }
        case TypeKind::Ref: {
            // An anonymous binder shields nothing; bind the other side alone.
            int id = e.next++;
            if (!a->self.empty()) e.qa[a->self] = id;
            if (!b->self.empty()) e.qb[b->self] = id;
            return qtypeEq(a->a, b->a, e) && qtypeEq(a->b, b->b, e);
        }
        default: return true;
    }
}

}  // namespace

bool alphaEq(const TypeP& a, const TypeP& b) { return typeEq(a, b, {}); }
bool alphaEq(const QType& a, const QType& b) { return qtypeEq(a, b, {}); }

// ------------------------------------------------------------------ printing

namespace {

std::string unusedName(const std::string& base, const std::set<std::string>& avoid) {
    if (!avoid.count(base)) return base;
    for (int i = 1;; ++i) {
        std::string n = base + std::to_string(i);
        if (!avoid.count(n)) return n;
    }
}

}  // namespace

std::string printType(const TypeP& t) {
    if (!t) return "?";
    switch (t->kind) {
        case TypeKind::Unit: return "Unit";
        case TypeKind::Nat: return "Nat";
        case TypeKind::Bool: return "Bool";
        case TypeKind::Top: return "Top";
        case TypeKind::Bot: return "Bot";
        case TypeKind::TVar: return t->tparam;
        case TypeKind::Fun:
            return "(" + t->self + "(" + t->param + ": " + printQType(t->a) + ") -> " + printQType(t->b) + ")";
        case TypeKind::All:
            return "forall " + t->self + "(" + t->tparam + "^" + t->param + " <: " + printQType(t->a) + "). " +
                   printQType(t->b);
        case TypeKind::Ref: {
            bool same = alphaEq(t->a, t->b);
            if (t->self.empty() && same) return "Ref[" + printQType(t->a) + "]";
            std::string z = t->self;
            if (z.empty()) {
                auto avoid = freeVars(t->a);
                auto more = freeVars(t->b);
                avoid.insert(more.begin(), more.end());
                z = unusedName("z", avoid);
            }
            if (same) return "mu " + z + ". Ref[" + printQType(t->a) + "]";
            return "mu " + z + ". Ref[" + printQType(t->a) + ", " + printQType(t->b) + "]";
        }
    }
    return "?";
}

std::string printQType(const QType& q) { return printType(q.ty) + "^" + printQual(q.q); }

// ------------------------------------------------------------------ terms

namespace {
std::shared_ptr<Term> node(TermKind k, Span s) {
    auto t = std::make_shared<Term>();
    t->kind = k;
    t->span = s;
    return t;
}
}  // namespace

TermP mkUnit(Span s) { return node(TermKind::Unit, s); }
TermP mkNat(Nat n, Span s) { auto t = node(TermKind::NatLit, s); t->nat = std::move(n); return t; }
TermP mkBool(bool b, Span s) { auto t = node(TermKind::BoolLit, s); t->boolean = b; return t; }
TermP mkVar(std::string x, Span s) { auto t = node(TermKind::Var, s); t->name = std::move(x); return t; }

TermP mkAbs(std::string f, std::string x, std::optional<QType> dom, std::optional<QType> cod, TermP body, Span s) {
    auto t = node(TermKind::Abs, s);
    t->name = std::move(f);
    t->param = std::move(x);
    t->dom = std::move(dom);
    t->cod = std::move(cod);
    t->t1 = std::move(body);
    return t;
}

TermP mkLet(std::string x, std::optional<QType> ann, TermP bound, TermP body, Span s) {
    auto abs = node(TermKind::Abs, s);
    abs->param = std::move(x);
    abs->dom = std::move(ann);
    abs->isLet = true;
    abs->t1 = std::move(body);
    return mkApp(abs, std::move(bound), s);
}

TermP mkApp(TermP f, TermP a, Span s) { auto t = node(TermKind::App, s); t->t1 = std::move(f); t->t2 = std::move(a); return t; }
TermP mkRefNew(TermP x, Span s) { auto t = node(TermKind::RefNew, s); t->t1 = std::move(x); return t; }
TermP mkDeref(TermP x, Span s) { auto t = node(TermKind::Deref, s); t->t1 = std::move(x); return t; }
TermP mkAssign(TermP l, TermP r, Span s) { auto t = node(TermKind::Assign, s); t->t1 = std::move(l); t->t2 = std::move(r); return t; }

TermP mkTAbs(std::string f, std::string X, std::string x, QType bound, TermP body, Span s) {
    auto t = node(TermKind::TAbs, s);
    t->name = std::move(f);
    t->tparam = std::move(X);
    t->param = std::move(x);
    t->dom = std::move(bound);
    t->t1 = std::move(body);
    return t;
}

TermP mkTApp(TermP f, QType arg, Span s) { auto t = node(TermKind::TApp, s); t->t1 = std::move(f); t->dom = std::move(arg); return t; }
TermP mkLoc(std::size_t l, Span s) { auto t = node(TermKind::Loc, s); t->loc = l; return t; }
TermP mkSucc(TermP x, Span s) { auto t = node(TermKind::Succ, s); t->t1 = std::move(x); return t; }
TermP mkPred(TermP x, Span s) { auto t = node(TermKind::Pred, s); t->t1 = std::move(x); return t; }
TermP mkMul(TermP a, TermP b, Span s) { auto t = node(TermKind::Mul, s); t->t1 = std::move(a); t->t2 = std::move(b); return t; }
TermP mkIsZero(TermP x, Span s) { auto t = node(TermKind::IsZero, s); t->t1 = std::move(x); return t; }

TermP mkIf(TermP c, TermP a, TermP b, Span s) {
    auto t = node(TermKind::If, s);
    t->t1 = std::move(c);
    t->t2 = std::move(a);
    t->t3 = std::move(b);
    return t;
}

TermP mkAscribe(TermP x, QType q, Span s) { auto t = node(TermKind::Ascribe, s); t->t1 = std::move(x); t->dom = std::move(q); return t; }

bool isValue(const TermP& t) {
    switch (t->kind) {
        case TermKind::Unit:
        case TermKind::NatLit:
        case TermKind::BoolLit:
        case TermKind::Loc:
        case TermKind::TAbs: return true;
        case TermKind::Abs: return !t->isLet;
        default: return false;
    }
}

bool isLetApp(const TermP& t) { return t->kind == TermKind::App && t->t1->kind == TermKind::Abs && t->t1->isLet; }

namespace {

void annVars(const std::optional<QType>& q, const std::set<std::string>& bound, std::set<std::string>& out) {
    if (!q) return;
    for (const auto& v : freeVars(*q))
        if (!bound.count(v)) out.insert(v);
}

void fvTerm(const TermP& t, std::set<std::string> bound, std::set<std::string>& out) {
    if (!t) return;
    switch (t->kind) {
        case TermKind::Var:
            if (!bound.count(t->name)) out.insert(t->name);
            return;
        case TermKind::Abs:
            annVars(t->dom, bound, out);
            if (!t->name.empty()) bound.insert(t->name);
            bound.insert(t->param);
            annVars(t->cod, bound, out);
            fvTerm(t->t1, bound, out);
            return;
        case TermKind::TAbs:
            annVars(t->dom, bound, out);
            if (!t->name.empty()) bound.insert(t->name);
            bound.insert(t->param);
            fvTerm(t->t1, bound, out);
            return;
        case TermKind::TApp:
        case TermKind::Ascribe:
            annVars(t->dom, bound, out);
            fvTerm(t->t1, bound, out);
            return;
        default:
            fvTerm(t->t1, bound, out);
            fvTerm(t->t2, bound, out);
            fvTerm(t->t3, bound, out);
    }
}

void ftvTerm(const TermP& t, std::set<std::string> bound, std::set<std::string>& out) {
    if (!t) return;
    auto ann = [&](const std::optional<QType>& q) {
        if (!q) return;
        for (const auto& v : freeTypeVars(q->ty))
            if (!bound.count(v)) out.insert(v);
    };
    ann(t->dom);
    if (t->kind == TermKind::TAbs) bound.insert(t->tparam);
    ann(t->cod);
    ftvTerm(t->t1, bound, out);
    ftvTerm(t->t2, bound, out);
    ftvTerm(t->t3, bound, out);
}

void locTerm(const TermP& t, Qual& out) {
    if (!t) return;
    if (t->kind == TermKind::Loc) out.insert(Atom::location(t->loc));
    for (const auto* q : {&t->dom, &t->cod}) {
        if (!*q) continue;
        for (const auto& a : (*q)->q)
            if (a.isLoc()) out.insert(a);
        auto l = freeLocs((*q)->ty);
        out.insert(l.begin(), l.end());
    }
    locTerm(t->t1, out);
    locTerm(t->t2, out);
    locTerm(t->t3, out);
}

}  // namespace

std::set<std::string> freeVars(const TermP& t) {
    std::set<std::string> out;
    fvTerm(t, {}, out);
    return out;
}

std::set<std::string> freeTypeVars(const TermP& t) {
    std::set<std::string> out;
    ftvTerm(t, {}, out);
    return out;
}

Qual freeLocs(const TermP& t) {
    Qual out;
    locTerm(t, out);
    return out;
}

Qual freeAtoms(const TermP& t) {
    Qual out = freeLocs(t);
    for (const auto& v : freeVars(t)) out.insert(Atom::var(v));
    return out;
}

Qual valueQual(const TermP& v) {
    switch (v->kind) {
        case TermKind::Loc: return Qual{Atom::location(v->loc)};
        case TermKind::Var: return Qual{Atom::var(v->name)};
        case TermKind::Abs:
        case TermKind::TAbs: return freeAtoms(v);
        default: return {};
    }
}

// ------------------------------------------------------------- term subst

namespace {

struct TermSubst {
    std::map<std::string, TermP> terms;
    TypeSubst ty;  // qualifier and type-variable parts
    std::set<std::string> rangeVars;

    void computeRange() {
        ty.computeRange();
        rangeVars = ty.rangeVars;
        for (const auto& [k, v] : terms) {
            auto fv = freeVars(v);
            rangeVars.insert(fv.begin(), fv.end());
        }
    }
    bool empty() const { return terms.empty() && ty.empty(); }
};

std::optional<QType> applyAnn(const std::optional<QType>& q, const TermSubst& s) {
    if (!q) return q;
    return applyQType(*q, s.ty);
}

std::string enterTermBinder(const std::string& b, TermSubst& s) {
    if (b.empty()) return b;
    s.terms.erase(b);
    s.ty.quals.erase(b);
    if (s.rangeVars.count(b)) {
        std::string nb = freshName(b);
        s.terms[b] = mkVar(nb);
        s.ty.quals[b] = Qual{Atom::var(nb)};
        return nb;
    }
    return b;
}

TermP applyTerm(const TermP& t, const TermSubst& s) {
    if (!t || s.empty()) return t;
    auto copy = [&]() { return std::make_shared<Term>(*t); };
    switch (t->kind) {
        case TermKind::Unit:
        case TermKind::NatLit:
        case TermKind::BoolLit:
        case TermKind::Loc: return t;
        case TermKind::Var: {
            auto it = s.terms.find(t->name);
            return it == s.terms.end() ? t : it->second;
        }
        case TermKind::Abs: {
            auto n = copy();
            n->dom = applyAnn(t->dom, s);
            TermSubst inner = s;
            n->name = enterTermBinder(t->name, inner);
            n->param = enterTermBinder(t->param, inner);
            inner.computeRange();
            n->cod = applyAnn(t->cod, inner);
            n->t1 = applyTerm(t->t1, inner);
            return n;
        }
        case TermKind::TAbs: {
            auto n = copy();
            n->dom = applyAnn(t->dom, s);
            TermSubst inner = s;
            n->name = enterTermBinder(t->name, inner);
            n->param = enterTermBinder(t->param, inner);
            inner.ty.types.erase(t->tparam);
            if (inner.ty.rangeTVars.count(t->tparam)) {
                n->tparam = freshName(t->tparam);
                inner.ty.types[t->tparam] = tVar(n->tparam);
            }
            inner.computeRange();
            n->t1 = applyTerm(t->t1, inner);
            return n;
        }
        default: {
            auto n = copy();
            n->dom = applyAnn(t->dom, s);
            n->cod = applyAnn(t->cod, s);
            n->t1 = applyTerm(t->t1, s);
            n->t2 = applyTerm(t->t2, s);
            n->t3 = applyTerm(t->t3, s);
            return n;
        }
    }
}

}  // namespace

TermP substTermVarQ(const TermP& t, const std::string& x, const TermP& v, const Qual& vq) {
    TermSubst s;
    s.terms[x] = v;
    s.ty.quals[x] = vq;
    s.computeRange();
    return applyTerm(t, s);
}

TermP substTermVar(const TermP& t, const std::string& x, const TermP& v) {
    return substTermVarQ(t, x, v, valueQual(v));
}

TermP substTypeInTerm(const TermP& t, const std::string& X, const std::string& x, const QType& arg) {
    TermSubst s;
    s.ty.types[X] = arg.ty;
    s.ty.quals[x] = arg.q;
    s.computeRange();
    return applyTerm(t, s);
}

// ------------------------------------------------------------- alpha terms

namespace {

struct TermAlpha {
    std::map<std::string, int> a, b, ta, tb;
    int next = 0;
};

bool annEq(const std::optional<QType>& x, const std::optional<QType>& y, const TermAlpha& e) {
    if (!x || !y) return !x && !y;
    AlphaEnv ae;
    ae.qa = e.a;
    ae.qb = e.b;
    ae.ta = e.ta;
    ae.tb = e.tb;
    ae.next = e.next;
    return qtypeEq(*x, *y, ae);
}

bool termEq(const TermP& x, const TermP& y, TermAlpha e) {
    if (!x || !y) return !x && !y;
    if (x->kind != y->kind) return false;
    switch (x->kind) {
        case TermKind::Unit: return true;
        case TermKind::NatLit: return x->nat == y->nat;
        case TermKind::BoolLit: return x->boolean == y->boolean;
        case TermKind::Loc: return x->loc == y->loc;
        case TermKind::Var: return canon(x->name, e.a) == canon(y->name, e.b);
        case TermKind::Abs:
        case TermKind::TAbs: {
            if (x->isLet != y->isLet) return false;
            if (!annEq(x->dom, y->dom, e)) return false;
            int id = e.next++;
            if (!x->name.empty()) e.a[x->name] = id;
            if (!y->name.empty()) e.b[y->name] = id;
            id = e.next++;
            e.a[x->param] = id;
            e.b[y->param] = id;
            if (x->kind == TermKind::TAbs) {
                id = e.next++;
                e.ta[x->tparam] = id;
                e.tb[y->tparam] = id;
            }
            return annEq(x->cod, y->cod, e) && termEq(x->t1, y->t1, e);
        }
        default:
            return annEq(x->dom, y->dom, e) && annEq(x->cod, y->cod, e) && termEq(x->t1, y->t1, e) &&
                   termEq(x->t2, y->t2, e) && termEq(x->t3, y->t3, e);
    }
}

}  // namespace

bool alphaEqTerm(const TermP& a, const TermP& b) { return termEq(a, b, {}); }

// ------------------------------------------------------------- printing

namespace {

bool atomic(const TermP& t) {
    switch (t->kind) {
        case TermKind::Unit:
        case TermKind::NatLit:
        case TermKind::BoolLit:
        case TermKind::Var:
        case TermKind::Loc:
        case TermKind::Ascribe: return true;
        default: return false;
    }
}

std::string paren(const TermP& t) { return atomic(t) ? printTerm(t) : "(" + printTerm(t) + ")"; }

}  // namespace

std::string printTerm(const TermP& t) {
    switch (t->kind) {
        case TermKind::Unit: return "unit";
        case TermKind::NatLit: return t->nat.str();
        case TermKind::BoolLit: return t->boolean ? "true" : "false";
        case TermKind::Var: return t->name;
        case TermKind::Loc: return "@" + std::to_string(t->loc);
        case TermKind::Abs: {
            std::string s = "fun " + t->name + "(" + t->param;
            if (t->dom) s += ": " + printQType(*t->dom);
            s += ")";
            if (t->cod) s += " : " + printQType(*t->cod);
            return s + " => " + printTerm(t->t1);
        }
        case TermKind::App:
            if (isLetApp(t)) {
                const auto& abs = t->t1;
                std::string s = "let " + abs->param;
                if (abs->dom) s += " : " + printQType(*abs->dom);
                return s + " = " + printTerm(t->t2) + " in " + printTerm(abs->t1);
            }
            return paren(t->t1) + " " + paren(t->t2);
        case TermKind::RefNew: return "ref " + paren(t->t1);
        case TermKind::Deref: return "!" + paren(t->t1);
        case TermKind::Assign: return paren(t->t1) + " := " + paren(t->t2);
        case TermKind::TAbs:
            return "tfun " + t->name + "(" + t->tparam + "^" + t->param + " <: " + printQType(*t->dom) + ") => " +
                   printTerm(t->t1);
        case TermKind::TApp: return paren(t->t1) + "[" + printQType(*t->dom) + "]";
        case TermKind::Succ: return "succ " + paren(t->t1);
        case TermKind::Pred: return "pred " + paren(t->t1);
        case TermKind::IsZero: return "iszero " + paren(t->t1);
        case TermKind::Mul: return paren(t->t1) + " * " + paren(t->t2);
        case TermKind::If:
            return "if " + printTerm(t->t1) + " then " + printTerm(t->t2) + " else " + printTerm(t->t3);
        case TermKind::Ascribe: return "(" + printTerm(t->t1) + " : " + printQType(*t->dom) + ")";
    }
    return "?";
}

}  // namespace reachck
