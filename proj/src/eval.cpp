#include "reachck/eval.hpp"

namespace reachck {

namespace {

StepResult stuck(std::string why) {
    StepResult r;
    r.kind = StepResult::Kind::Stuck;
    r.reason = std::move(why);
    return r;
}

StepResult stepped(TermP t, Store s, std::string rule) {
    StepResult r;
    r.kind = StepResult::Kind::Stepped;
    r.term = std::move(t);
    r.store = std::move(s);
    r.rule = std::move(rule);
    return r;
}

// Rebuild t with one child replaced.
TermP withChild(const TermP& t, int which, TermP c) {
    auto n = std::make_shared<Term>(*t);
    (which == 1 ? n->t1 : which == 2 ? n->t2 : n->t3) = std::move(c);
    return n;
}

// Step inside child `which` and rebuild the parent around the result.
StepResult congruence(const TermP& t, int which, const Store& s) {
    const TermP& c = which == 1 ? t->t1 : which == 2 ? t->t2 : t->t3;
    StepResult r = step(c, s);
    if (r.kind == StepResult::Kind::Stepped) r.term = withChild(t, which, r.term);
    return r;
}

StepResult contract(const TermP& t, const Store& s) {
    switch (t->kind) {
        case TermKind::App: {
            const TermP& fn = t->t1;
            const TermP& v = t->t2;
            if (fn->kind != TermKind::Abs) return stuck("application of a non-function");
            TermP body = fn->t1;
            if (!fn->isLet && !fn->name.empty()) body = substTermVar(body, fn->name, fn);
            body = substTermVar(body, fn->param, v);
            return stepped(body, s, fn->isLet ? "let" : "beta");
        }
        case TermKind::TApp: {
            const TermP& fn = t->t1;
            if (fn->kind != TermKind::TAbs) return stuck("type application of a non-abstraction");
            TermP body = substTypeInTerm(fn->t1, fn->tparam, fn->param, *t->dom);
            if (!fn->name.empty()) body = substTermVar(body, fn->name, fn);
            return stepped(body, s, "tbeta");
        }
        case TermKind::RefNew: {
            Store n = s;
            std::size_t l = n.alloc(t->t1);
            StepResult r = stepped(mkLoc(l, t->span), std::move(n), "ref");
            r.allocated = l;
            r.allocSite = t.get();
            return r;
        }
        case TermKind::Deref: {
            if (t->t1->kind != TermKind::Loc) return stuck("dereference of a non-location");
            auto it = s.cells.find(t->t1->loc);
            if (it == s.cells.end()) return stuck("dangling location");
            return stepped(it->second, s, "deref");
        }
        case TermKind::Assign: {
            if (t->t1->kind != TermKind::Loc) return stuck("assignment to a non-location");
            if (!s.cells.count(t->t1->loc)) return stuck("dangling location");
            Store n = s;
            n.cells[t->t1->loc] = t->t2;
            return stepped(mkUnit(t->span), std::move(n), "assign");
        }
        case TermKind::Succ:
            if (t->t1->kind != TermKind::NatLit) return stuck("succ of a non-number");
            return stepped(mkNat(t->t1->nat + 1, t->span), s, "succ");
        case TermKind::Pred:
            if (t->t1->kind != TermKind::NatLit) return stuck("pred of a non-number");
            return stepped(mkNat(t->t1->nat == 0 ? Nat(0) : Nat(t->t1->nat - 1), t->span), s, "pred");
        case TermKind::Mul:
            if (t->t1->kind != TermKind::NatLit || t->t2->kind != TermKind::NatLit) return stuck("mul of a non-number");
            return stepped(mkNat(t->t1->nat * t->t2->nat, t->span), s, "mul");
        case TermKind::IsZero:
            if (t->t1->kind != TermKind::NatLit) return stuck("iszero of a non-number");
            return stepped(mkBool(t->t1->nat == 0, t->span), s, "iszero");
        case TermKind::If:
            if (t->t1->kind != TermKind::BoolLit) return stuck("if on a non-boolean");
            return t->t1->boolean ? stepped(t->t2, s, "if-true") : stepped(t->t3, s, "if-false");
        case TermKind::Ascribe: return stepped(t->t1, s, "ascribe");
        default: return stuck("no rule applies");
    }
}

}  // namespace

StepResult step(const TermP& t, const Store& s) {
    if (isValue(t)) {
        StepResult r;
        r.kind = StepResult::Kind::AlreadyValue;
        r.term = t;
        r.store = s;
        return r;
    }
    switch (t->kind) {
        case TermKind::Var: return stuck("free variable " + t->name);
        case TermKind::Abs: return stuck("let head in isolation");
        case TermKind::App:
            if (!isLetApp(t) && !isValue(t->t1)) return congruence(t, 1, s);
            if (!isValue(t->t2)) return congruence(t, 2, s);
            return contract(t, s);
        case TermKind::Assign:
        case TermKind::Mul:
            if (!isValue(t->t1)) return congruence(t, 1, s);
            if (!isValue(t->t2)) return congruence(t, 2, s);
            return contract(t, s);
        default:
            if (t->t1 && !isValue(t->t1)) return congruence(t, 1, s);
            return contract(t, s);
    }
}

EvalResult evalFuel(const TermP& t, std::size_t fuel, Store init, const StepHook& hook) {
    EvalResult out;
    out.term = t;
    out.store = std::move(init);
    while (true) {
        if (isValue(out.term)) return out;
        if (out.steps >= fuel) {
            out.exhausted = true;
            return out;
        }
        StepResult r = step(out.term, out.store);
        if (r.kind == StepResult::Kind::Stuck) {
            out.stuck = true;
            out.reason = r.reason;
            return out;
        }
        ++out.steps;
        if (hook) hook(out.steps, r);
        out.term = r.term;
        out.store = std::move(r.store);
    }
}

}  // namespace reachck
