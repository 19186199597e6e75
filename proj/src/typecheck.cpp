#include "reachck/typecheck.hpp"

namespace reachck {

namespace {

[[noreturn]] void fail(ErrorKind k, Span sp, const std::string& msg, std::optional<Atom> a = std::nullopt) {
    throw TypeErrorEx(k, sp, msg, std::move(a));
}

const Atom kFresh = Atom::fresh();

Qual with(Qual q, std::initializer_list<std::string> names) {
    for (const auto& n : names)
        if (!n.empty()) q.insert(Atom::var(n));
    return q;
}

// Variables and locations occurring as terms (annotations excluded).
void termAtoms(const TermP& t, std::set<std::string> bound, Qual& out) {
    if (!t) return;
    switch (t->kind) {
        case TermKind::Var:
            if (!bound.count(t->name)) out.insert(Atom::var(t->name));
            return;
        case TermKind::Loc: out.insert(Atom::location(t->loc)); return;
        case TermKind::Abs:
        case TermKind::TAbs:
            if (!t->name.empty()) bound.insert(t->name);
            bound.insert(t->param);
            termAtoms(t->t1, bound, out);
            return;
        default:
            termAtoms(t->t1, bound, out);
            termAtoms(t->t2, bound, out);
            termAtoms(t->t3, bound, out);
    }
}

Qual termAtoms(const TermP& t) {
    Qual out;
    termAtoms(t, {}, out);
    return out;
}

std::map<std::string, Qual> renaming(std::initializer_list<std::pair<std::string, std::string>> pairs) {
    std::map<std::string, Qual> m;
    for (const auto& [from, to] : pairs)
        if (!from.empty()) m[from] = Qual{Atom::var(to)};
    return m;
}

void requireNat(const Context& g, const QType& q, Span sp) {
    if (!subType(g, q.ty, tNat())) fail(ErrorKind::SubtypeFailure, sp, "expected Nat, found " + printQType(q));
}

// Separation for fresh-domain application: shared reach of argument and
// function must be covered by the declared observable part of the domain.
Qual separationExcess(const Context& g, const Qual& p, const Qual& q, const Qual& d) {
    ReachEnv env = g.reachEnv();
    Qual ov = qintersect(qtrans(env, p), qtrans(env, q));
    Qual allowed = qtrans(env, qwithout(d, kFresh));
    allowed.insert(kFresh);
    return qminus(ov, allowed);
}

bool nonLocValue(const TermP& t) { return isValue(t) && t->kind != TermKind::Loc; }

}  // namespace

void Checker::checkScoped(const Context& g, const QType& q, const std::set<std::string>& extra, Span sp) const {
    for (const auto& v : freeVars(q))
        if (!extra.count(v) && !g.lookupQualVar(v)) fail(ErrorKind::UnboundVariable, sp, "unbound variable " + v + " in annotation");
    for (const auto& X : freeTypeVars(q.ty))
        if (!g.lookupTypeVar(X)) fail(ErrorKind::UnboundVariable, sp, "unbound type variable " + X);
    Qual locs = freeLocs(q.ty);
    for (const auto& a : q.q)
        if (a.isLoc()) locs.insert(a);
    for (const auto& a : locs)
        if (!st_ || !st_->count(a.loc)) fail(ErrorKind::UnboundVariable, sp, "unknown location " + printAtom(a));
}

QType Checker::synth(const Context& g, const Qual& phi, const TermP& t) {
    const Span sp = t->span;
    switch (t->kind) {
        case TermKind::Unit: return {tUnit(), {}};
        case TermKind::NatLit: return {tNat(), {}};
        case TermKind::BoolLit: return {tBool(), {}};
        case TermKind::Var: {
            QType d = lookupVar(g, phi, t->name, sp);
            return {d.ty, {Atom::var(t->name)}};
        }
        case TermKind::Loc: return synthLoc(g, phi, t);
        case TermKind::Abs: return synthAbs(g, phi, t, std::nullopt);
        case TermKind::TAbs: return synthTAbs(g, phi, t);
        case TermKind::App: return isLetApp(t) ? synthLet(g, phi, t, nullptr) : synthApp(g, phi, t);
        case TermKind::TApp: return synthTApp(g, phi, t);
        case TermKind::RefNew: {
            QType init = synth(g, phi, t->t1);
            if (containsFresh(init.q))
                fail(ErrorKind::FreshReferent, sp, "cannot store a fresh value of type " + printQType(init));
            record(t, StoreEntry{"", init});
            return {tRef(init), {kFresh}};
        }
        case TermKind::Deref: return synthDeref(g, phi, t);
        case TermKind::Assign: return synthAssign(g, phi, t);
        case TermKind::Succ:
        case TermKind::Pred: {
            QType a = synth(g, phi, t->t1);
            requireNat(g, a, t->t1->span);
            return {tNat(), a.q};
        }
        case TermKind::Mul: {
            QType a = synth(g, phi, t->t1);
            requireNat(g, a, t->t1->span);
            QType b = synth(g, phi, t->t2);
            requireNat(g, b, t->t2->span);
            return {tNat(), qunion(a.q, b.q)};
        }
        case TermKind::IsZero: {
            QType a = synth(g, phi, t->t1);
            requireNat(g, a, t->t1->span);
            return {tBool(), {}};
        }
        case TermKind::If: {
            QType c = synth(g, phi, t->t1);
            if (!subType(g, c.ty, tBool()))
                fail(ErrorKind::SubtypeFailure, t->t1->span, "expected Bool, found " + printQType(c));
            QType a = synth(g, phi, t->t2);
            QType b = synth(g, phi, t->t3);
            TypeP j;
            if (subType(g, a.ty, b.ty)) j = b.ty;
            else if (subType(g, b.ty, a.ty)) j = a.ty;
            else fail(ErrorKind::SubtypeFailure, sp, "branches disagree: " + printQType(a) + " and " + printQType(b));
            return {j, qunion(a.q, b.q)};
        }
        case TermKind::Ascribe: {
            const QType& target = *t->dom;
            checkScoped(g, target, {}, sp);
            for (const auto& a : target.q)
                if (!a.isFresh() && !phi.count(a))
                    fail(ErrorKind::ObservationEscape, sp, "ascribed qualifier mentions unobservable " + printAtom(a), a);
            Qual r = synthAgainst(g, phi, t->t1, target.ty);
            if (!subQual(g, r, target.q))
                fail(ErrorKind::SubtypeFailure, sp, "qualifier " + printQual(r) + " is not a subqualifier of " + printQual(target.q));
            return target;
        }
    }
    fail(ErrorKind::SubtypeFailure, sp, "unsupported term");
}

QType Checker::check(const Context& g, const Qual& phi, const TermP& t, const QType& q) {
    Qual r = synthAgainst(g, phi, t, q.ty);
    if (!subQual(g, r, q.q))
        fail(ErrorKind::SubtypeFailure, t->span, "qualifier " + printQual(r) + " does not fit " + printQType(q));
    return q;
}

void Checker::checkAt(const Context& g, const Qual& phi, const TermP& t, const QType& q, ErrorKind qualFail) {
    Qual r = synthAgainst(g, phi, t, q.ty);
    if (!subQual(g, r, q.q))
        fail(qualFail, t->span, "value reaching " + printQual(r) + " does not fit " + printQType(q));
}

Qual Checker::synthAgainst(const Context& g, const Qual& phi, const TermP& t, const TypeP& target) {
    if (isLetApp(t)) return synthLet(g, phi, t, &target).q;
    if (t->kind == TermKind::RefNew && target->kind == TypeKind::Ref)
        if (auto r = refNewChecked(g, phi, t, target)) return *r;
    QType s = synth(g, phi, t);
    auto r = upcast(g, s, target);
    if (!r) fail(ErrorKind::SubtypeFailure, t->span, "expected " + printType(target) + ", found " + printQType(s));
    return *r;
}

// Allocation against a known reference type: the referent is taken from the
// expected write component, so a cyclic binder can be introduced here.
std::optional<Qual> Checker::refNewChecked(const Context& g, const Qual& phi, const TermP& t, const TypeP& target) {
    try {
        std::string z = freshName("z");
        QType w = substQualsInQType(target->a, renaming({{target->self, z}}));
        if (w.ty->kind == TypeKind::Bot) return std::nullopt;
        bool cyc = qhasVar(w.q, z);
        Qual q = qwithout(w.q, Atom::var(z));
        if (containsFresh(q)) return std::nullopt;
        Qual r0 = synthAgainst(g, phi, t->t1, w.ty);
        if (!subQual(g, r0, q)) return std::nullopt;
        Qual wq = cyc ? with(q, {z}) : q;
        TypeP cand = tRef(cyc ? z : "", {w.ty, wq}, {w.ty, wq});
        auto r = upcast(g, {cand, {kFresh}}, target);
        if (!r) return std::nullopt;
        record(t, StoreEntry{cyc ? z : "", {w.ty, wq}});
        return r;
    } catch (const TypeErrorEx&) {
        return std::nullopt;
    }
}

QType Checker::synthLoc(const Context&, const Qual& phi, const TermP& t) {
    if (!st_ || !st_->count(t->loc)) fail(ErrorKind::UnboundVariable, t->span, "unknown location @" + std::to_string(t->loc));
    const StoreEntry& e = st_->at(t->loc);
    Atom self = Atom::location(t->loc);
    if (!phi.count(self)) fail(ErrorKind::Unobservable, t->span, "location " + printAtom(self) + " is not observable", self);
    return {tRef(e.binder, e.referent, e.referent), {self}};
}

QType Checker::synthDeref(const Context& g, const Qual& phi, const TermP& t) {
    QType p = synth(g, phi, t->t1);
    TypeP ty = promote(g, p.ty);
    if (!ty || ty->kind != TypeKind::Ref) fail(ErrorKind::NotAReference, t->span, "cannot dereference " + printQType(p));
    std::string z = freshName("z");
    QType rd = substQualsInQType(ty->b, renaming({{ty->self, z}}));
    for (const auto& a : rd.q) {
        if (a.isVar() && a.name == z) continue;
        if (a.isFresh() || !phi.count(a))
            fail(ErrorKind::Unobservable, t->span, "dereference reaches unobservable " + printAtom(a), a);
    }
    if (freeVars(rd.ty).count(z))
        fail(ErrorKind::DependentReturnEscape, t->span, "referent type depends on the reference itself");
    return {rd.ty, substQual(rd.q, z, p.q)};
}

QType Checker::synthAssign(const Context& g, const Qual& phi, const TermP& t) {
    const TermP& lhs = t->t1;
    const TermP& rhs = t->t2;
    const QType unit{tUnit(), {}};

    if (lhs->kind == TermKind::Loc && st_ && st_->count(lhs->loc)) {
        synth(g, phi, lhs);
        QType target = referentQTypeAt(lhs->loc, st_->at(lhs->loc));
        if (target.ty->kind == TypeKind::Bot) fail(ErrorKind::WriteForbidden, t->span, "reference is not writable");
        checkAt(g, phi, rhs, target, ErrorKind::ReferentMismatch);
        return unit;
    }

    QType p = synth(g, phi, lhs);
    TypeP ty = promote(g, p.ty);
    if (!ty || ty->kind != TypeKind::Ref) fail(ErrorKind::NotAReference, lhs->span, "cannot assign through " + printQType(p));
    std::string z = freshName("z");
    QType w = substQualsInQType(ty->a, renaming({{ty->self, z}}));
    if (w.ty->kind == TypeKind::Bot) fail(ErrorKind::WriteForbidden, t->span, "write component of " + printQType(p) + " is Bot");
    bool cyc = qhasVar(w.q, z);
    Qual base = qwithout(w.q, Atom::var(z));

    auto fits = [&](const Qual& q) {
        Qual r = synthAgainst(g, phi, rhs, w.ty);
        return subQual(g, r, q);
    };
    if (!cyc) {
        checkAt(g, phi, rhs, {w.ty, base}, ErrorKind::ReferentMismatch);
    } else if (lhs->kind == TermKind::Var) {
        if (!fits(with(base, {lhs->name})) && !fits(base))
            fail(ErrorKind::CyclicQualifierNotSingleton, rhs->span,
                 "assigned value must reach exactly " + lhs->name + " (plus " + printQual(base) + ")");
    } else if (!fits(base)) {
        fail(ErrorKind::CyclicAssigneeNotVariable, lhs->span, "cyclic assignment requires a variable on the left");
    }
    return unit;
}

QType Checker::synthAbs(const Context& g, const Qual& phi, const TermP& t, const std::optional<QType>& domOverride) {
    if (!t->dom || !t->cod) fail(ErrorKind::AnnotationRequired, t->span, "function " + t->name + " needs domain and codomain annotations");
    const QType dom = domOverride ? *domOverride : *t->dom;
    const QType& cod = *t->cod;
    checkScoped(g, dom, {}, t->span);
    checkScoped(g, cod, {t->name, t->param}, t->span);

    Qual body = termAtoms(t->t1);
    body.erase(Atom::var(t->param));
    if (!t->name.empty()) body.erase(Atom::var(t->name));
    Qual q = body;
    TypeP fty = tFun(t->name, t->param, dom, cod);

    for (std::size_t attempt = 0;; ++attempt) {
        for (const auto& a : q)
            if (!phi.count(a)) fail(ErrorKind::Unobservable, t->span, "function captures unobservable " + printAtom(a), a);
        Context inner = g;
        if (!t->name.empty()) inner = inner.withTerm(t->name, {fty, q});
        inner = inner.withTerm(t->param, dom);
        Qual phi2 = with(q, {t->name, t->param});
        try {
            checkAt(inner, phi2, t->t1, cod, ErrorKind::SubtypeFailure);
            return {fty, q};
        } catch (const TypeErrorEx& e) {
            bool retry = (e.kind == ErrorKind::Unobservable || e.kind == ErrorKind::ObservationEscape) && e.atom &&
                         !e.atom->isFresh() && phi.count(*e.atom) && !q.count(*e.atom) && attempt <= phi.size();
            if (!retry) throw;
            q.insert(*e.atom);
        }
    }
}

QType Checker::synthTAbs(const Context& g, const Qual& phi, const TermP& t) {
    const QType& bound = *t->dom;
    checkScoped(g, bound, {}, t->span);
    Qual fv = termAtoms(t->t1);
    if (!t->name.empty() && fv.count(Atom::var(t->name)))
        fail(ErrorKind::AnnotationRequired, t->span, "recursive type abstraction " + t->name + " needs an annotated type");
    fv.erase(Atom::var(t->param));
    Qual q = fv;

    for (std::size_t attempt = 0;; ++attempt) {
        for (const auto& a : q)
            if (!phi.count(a)) fail(ErrorKind::Unobservable, t->span, "type abstraction captures unobservable " + printAtom(a), a);
        Context inner = g.withType(t->tparam, t->param, bound);
        try {
            QType body = synth(inner, with(q, {t->param}), t->t1);
            return {tAll(t->name, t->tparam, t->param, bound, body), q};
        } catch (const TypeErrorEx& e) {
            bool retry = (e.kind == ErrorKind::Unobservable || e.kind == ErrorKind::ObservationEscape) && e.atom &&
                         !e.atom->isFresh() && phi.count(*e.atom) && !q.count(*e.atom) && attempt <= phi.size();
            if (!retry) throw;
            q.insert(*e.atom);
        }
    }
}

QType Checker::synthApp(const Context& g, const Qual& phi, const TermP& t) {
    QType fq = synth(g, phi, t->t1);
    TypeP fty = promote(g, fq.ty);
    if (!fty || fty->kind != TypeKind::Fun) fail(ErrorKind::NotAFunction, t->t1->span, "cannot apply " + printQType(fq));

    Qual p;
    bool freshDom = containsFresh(fty->a.q);
    if (!freshDom) {
        checkAt(g, phi, t->t2, fty->a, ErrorKind::SubtypeFailure);
        p = fty->a.q;
    } else {
        p = synthAgainst(g, phi, t->t2, fty->a.ty);
        Qual excess = separationExcess(g, p, fq.q, fty->a.q);
        if (!excess.empty()) {
            const TermP& fn = t->t1;
            if (fn->kind != TermKind::Abs || fn->isLet || !fn->dom)
                fail(ErrorKind::SeparationViolation, t->t2->span,
                     "argument and function share " + printQual(excess) + " outside the declared domain");
            // A literal abstraction can be re-checked at the widened domain.
            ReachEnv env = g.reachEnv();
            QType wide = *fn->dom;
            Qual ov = qintersect(qtrans(env, p), qtrans(env, fq.q));
            wide.q = qunion(wide.q, ov);
            fq = synthAbs(g, phi, fn, wide);
            fty = fq.ty;
        }
    }

    std::string f = freshName(fty->self.empty() ? "f" : fty->self);
    std::string x = freshName(fty->param);
    QType cod = substQualsInQType(fty->b, renaming({{fty->self, f}, {fty->param, x}}));
    Qual allowed = with(phi, {f, x});
    allowed.insert(kFresh);
    for (const auto& a : cod.q)
        if (!allowed.count(a)) fail(ErrorKind::ObservationEscape, t->span, "result reaches unobservable " + printAtom(a), a);
    auto fvU = freeVars(cod.ty);
    if (fvU.count(x)) {
        if (freshDom && containsFresh(p))
            fail(ErrorKind::DependentReturnEscape, t->span, "result type depends on a fresh argument");
        if (!isSingletonOrEmpty(p) && !nonLocValue(t->t2))
            fail(ErrorKind::DependentReturnEscape, t->span, "result type depends on argument reaching " + printQual(p));
    }
    if (fvU.count(f)) {
        if (containsFresh(fq.q))
            fail(ErrorKind::DependentReturnEscape, t->span, "result type depends on a fresh function");
        if (!isSingletonOrEmpty(fq.q) && !nonLocValue(t->t1))
            fail(ErrorKind::DependentReturnEscape, t->span, "result type depends on function reaching " + printQual(fq.q));
    }
    return substQualsInQType(cod, {{x, p}, {f, fq.q}});
}

QType Checker::synthTApp(const Context& g, const Qual& phi, const TermP& t) {
    QType fq = synth(g, phi, t->t1);
    TypeP fty = promote(g, fq.ty);
    if (!fty || fty->kind != TypeKind::All) fail(ErrorKind::NotAFunction, t->t1->span, "cannot instantiate " + printQType(fq));
    const QType& arg = *t->dom;
    checkScoped(g, arg, {}, t->span);
    for (const auto& a : arg.q)
        if (!a.isFresh() && !phi.count(a))
            fail(ErrorKind::Unobservable, t->span, "type argument reaches unobservable " + printAtom(a), a);

    const QType& bound = fty->a;
    bool freshBound = containsFresh(bound.q);
    if (!freshBound) {
        if (containsFresh(arg.q) || !subQType(g, arg, bound))
            fail(ErrorKind::BoundViolation, t->span, printQType(arg) + " does not satisfy bound " + printQType(bound));
    } else {
        if (!subType(g, arg.ty, bound.ty))
            fail(ErrorKind::BoundViolation, t->span, printType(arg.ty) + " does not satisfy bound " + printType(bound.ty));
        Qual excess = separationExcess(g, arg.q, fq.q, bound.q);
        if (!excess.empty())
            fail(ErrorKind::SeparationViolation, t->span, "type argument and abstraction share " + printQual(excess));
    }

    std::string f = freshName(fty->self.empty() ? "f" : fty->self);
    std::string x = freshName(fty->param);
    std::string X = freshName(fty->tparam);
    QType body = substQualsInQType(fty->b, renaming({{fty->self, f}, {fty->param, x}}));
    body.ty = substTypeVar(body.ty, fty->tparam, tVar(X));

    auto fvU = freeVars(body.ty);
    if (fvU.count(f)) fail(ErrorKind::DependentReturnEscape, t->span, "result type depends on the abstraction itself");
    if (freshBound && containsFresh(arg.q) && fvU.count(x))
        fail(ErrorKind::DependentReturnEscape, t->span, "result type depends on a fresh type argument");
    Qual allowed = with(phi, {f, x});
    allowed.insert(kFresh);
    for (const auto& a : body.q)
        if (!allowed.count(a)) fail(ErrorKind::ObservationEscape, t->span, "result reaches unobservable " + printAtom(a), a);

    body.ty = substTypeVar(body.ty, X, arg.ty);
    return substQualsInQType(body, {{x, arg.q}, {f, fq.q}});
}

QType Checker::synthLet(const Context& g, const Qual& phi, const TermP& t, const TypeP* expected) {
    const TermP& abs = t->t1;
    const TermP& bound = t->t2;
    const std::string& x = abs->param;

    QType decl;
    Qual p;
    if (abs->dom) {
        checkScoped(g, *abs->dom, {}, t->span);
        decl = *abs->dom;
        if (!containsFresh(decl.q)) {
            checkAt(g, phi, bound, decl, ErrorKind::SubtypeFailure);
            p = decl.q;
        } else {
            p = synthAgainst(g, phi, bound, decl.ty);
            Qual qlet = qwithout(termAtoms(abs->t1), Atom::var(x));
            Qual excess = separationExcess(g, p, qlet, decl.q);
            if (!excess.empty())
                fail(ErrorKind::SeparationViolation, bound->span, "bound value shares " + printQual(excess) + " with the body");
        }
    } else {
        decl = synth(g, phi, bound);
        p = decl.q;
    }

    if (!lets.count(t.get())) letOrder.push_back(t.get());
    lets[t.get()] = LetRecord{x, decl};

    Context inner = g.withTerm(x, decl);
    Qual phi2 = with(phi, {x});
    QType u;
    if (expected) u = QType{*expected, synthAgainst(inner, phi2, abs->t1, *expected)};
    else u = synth(inner, phi2, abs->t1);

    for (const auto& a : u.q)
        if (!a.isFresh() && !phi2.count(a))
            fail(ErrorKind::ObservationEscape, t->span, "let result reaches unobservable " + printAtom(a), a);
    if (freeVars(u.ty).count(x)) {
        if (containsFresh(p))
            fail(ErrorKind::DependentReturnEscape, t->span, "result type of let depends on fresh " + x);
        if (!isSingletonOrEmpty(p) && !nonLocValue(bound))
            fail(ErrorKind::DependentReturnEscape, t->span, "result type of let depends on " + x);
    }
    return substQualInQType(u, x, p);
}

QType typecheckProgram(const TermP& t) {
    static const StoreTyping empty;
    Checker c(&empty);
    return c.synth(Context().withStore(&empty), {}, t);
}

QType typecheckRuntime(const TermP& t, const StoreTyping& st, const Qual& phi, Checker* out) {
    Checker local(&st);
    Checker& c = out ? *out : local;
    return c.synth(Context().withStore(&st), phi, t);
}

bool wfStore(const StoreTyping& st, const Qual& phi, const Store& s, std::string* why) {
    auto no = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    if (!wfStoreTyping(st)) return no("store typing is not well formed");
    for (const auto& a : phi)
        if (!a.isLoc() || !s.cells.count(a.loc)) return no("observed " + printAtom(a) + " missing from store");
    for (const auto& [l, v] : s.cells)
        if (!st.count(l)) return no("store cell @" + std::to_string(l) + " has no store typing");
    Qual full = storeDomain(st);
    Context g = Context().withStore(&st);
    for (const auto& a : phi) {
        Checker c(&st);
        QType target = referentQTypeAt(a.loc, st.at(a.loc));
        try {
            c.check(g, full, s.cells.at(a.loc), target);
        } catch (const TypeErrorEx& e) {
            return no("cell " + printAtom(a) + " does not fit " + printQType(target) + ": " + e.what());
        }
    }
    return true;
}

}  // namespace reachck
