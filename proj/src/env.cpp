#include "reachck/env.hpp"

namespace reachck {

const char* kindName(ErrorKind k) {
    switch (k) {
        case ErrorKind::UnboundVariable: return "UnboundVariable";
        case ErrorKind::Unobservable: return "Unobservable";
        case ErrorKind::FreshReferent: return "FreshReferent";
        case ErrorKind::ReferentMismatch: return "ReferentMismatch";
        case ErrorKind::CyclicAssigneeNotVariable: return "CyclicAssigneeNotVariable";
        case ErrorKind::CyclicQualifierNotSingleton: return "CyclicQualifierNotSingleton";
        case ErrorKind::SeparationViolation: return "SeparationViolation";
        case ErrorKind::DependentReturnEscape: return "DependentReturnEscape";
        case ErrorKind::NotAFunction: return "NotAFunction";
        case ErrorKind::NotAReference: return "NotAReference";
        case ErrorKind::SubtypeFailure: return "SubtypeFailure";
        case ErrorKind::WriteForbidden: return "WriteForbidden";
        case ErrorKind::ObservationEscape: return "ObservationEscape";
        case ErrorKind::AnnotationRequired: return "AnnotationRequired";
        case ErrorKind::BoundViolation: return "BoundViolation";
    }
    return "Unknown";
}

Context Context::withStore(const StoreTyping* st) const {
    Context c = *this;
    c.store_ = st;
    return c;
}

Context Context::withTerm(const std::string& x, QType q) const {
    Context c = *this;
    c.head_ = std::make_shared<const Node>(Node{Binding{Binding::Kind::Term, x, "", std::move(q)}, head_});
    c.size_ = size_ + 1;
    return c;
}

Context Context::withType(const std::string& X, const std::string& x, QType bound) const {
    Context c = *this;
    c.head_ = std::make_shared<const Node>(Node{Binding{Binding::Kind::Type, X, x, std::move(bound)}, head_});
    c.size_ = size_ + 1;
    return c;
}

const Binding* Context::lookupQualVar(const std::string& x) const {
    for (const Node* n = head_.get(); n; n = n->parent.get()) {
        if (n->b.kind == Binding::Kind::Term && n->b.name == x) return &n->b;
        if (n->b.kind == Binding::Kind::Type && n->b.qvar == x) return &n->b;
    }
    return nullptr;
}

const Binding* Context::lookupTerm(const std::string& x) const {
    const Binding* b = lookupQualVar(x);
    return b && b->kind == Binding::Kind::Term ? b : nullptr;
}

const Binding* Context::lookupTypeVar(const std::string& X) const {
    for (const Node* n = head_.get(); n; n = n->parent.get())
        if (n->b.kind == Binding::Kind::Type && n->b.name == X) return &n->b;
    return nullptr;
}

const Qual* Context::declaredQual(const std::string& x) const {
    const Binding* b = lookupQualVar(x);
    return b ? &b->q.q : nullptr;
}

std::vector<Binding> Context::bindings() const {
    std::vector<Binding> out;
    for (const Node* n = head_.get(); n; n = n->parent.get()) out.push_back(n->b);
    return {out.rbegin(), out.rend()};
}

ReachEnv Context::reachEnv() const {
    ReachEnv env;
    for (const auto& b : bindings())
        env.bind(Atom::var(b.kind == Binding::Kind::Term ? b.name : b.qvar), b.q.q);
    return env;
}

std::set<std::string> Context::domain() const {
    std::set<std::string> out;
    for (const Node* n = head_.get(); n; n = n->parent.get())
        out.insert(n->b.kind == Binding::Kind::Term ? n->b.name : n->b.qvar);
    return out;
}

ReachEnv storeReachEnv(const StoreTyping& st) {
    ReachEnv env;
    for (const auto& [l, e] : st) env.bind(Atom::location(l), referentAt(l, e));
    return env;
}

Qual storeDomain(const StoreTyping& st) {
    Qual q;
    for (const auto& [l, e] : st) q.insert(Atom::location(l));
    return q;
}

Qual referentAt(std::size_t loc, const StoreEntry& e) {
    if (e.binder.empty()) return e.referent.q;
    return substQual(e.referent.q, e.binder, Qual{Atom::location(loc)});
}

QType referentQTypeAt(std::size_t loc, const StoreEntry& e) {
    if (e.binder.empty()) return e.referent;
    return substQualInQType(e.referent, e.binder, Qual{Atom::location(loc)});
}

std::size_t Store::alloc(TermP v) {
    std::size_t l = next;
    while (cells.count(l)) ++l;
    cells[l] = std::move(v);
    next = l + 1;
    return l;
}

Qual Store::domain() const {
    Qual q;
    for (const auto& [l, v] : cells) q.insert(Atom::location(l));
    return q;
}

Store Store::restrict(const Qual& phi) const {
    Store s;
    s.next = next;
    for (const auto& [l, v] : cells)
        if (phi.count(Atom::location(l))) s.cells[l] = v;
    return s;
}

QType lookupVar(const Context& g, const Qual& phi, const std::string& x, Span sp) {
    const Binding* b = g.lookupTerm(x);
    if (!b) throw TypeErrorEx(ErrorKind::UnboundVariable, sp, "unbound variable " + x);
    if (!phi.count(Atom::var(x)))
        throw TypeErrorEx(ErrorKind::Unobservable, sp, "variable " + x + " is not observable here", Atom::var(x));
    return b->q;
}

bool wfStoreTyping(const StoreTyping& st) {
    for (const auto& [l, e] : st) {
        if (!e.referent.ty) return false;
        auto fv = freeVars(e.referent);
        fv.erase(e.binder);
        if (!fv.empty()) return false;
        if (!freeTypeVars(e.referent.ty).empty()) return false;
        if (containsFresh(e.referent.q)) return false;
        Qual locs = freeLocs(e.referent.ty);
        for (const auto& a : e.referent.q)
            if (a.isLoc()) locs.insert(a);
        for (const auto& a : locs)
            if (a.loc >= l || !st.count(a.loc)) return false;
    }
    return true;
}

}  // namespace reachck
