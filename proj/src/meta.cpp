#include "reachck/meta.hpp"

#include "reachck/parse.hpp"

#include <sstream>

namespace reachck {

StoreTyping extendStoreTyping(const StoreTyping& st, const StepResult& r, const Checker& c) {
    StoreTyping out = st;
    if (!r.allocated) return out;
    auto it = c.refDecisions.find(r.allocSite);
    if (it != c.refDecisions.end()) {
        out[*r.allocated] = it->second;
        return out;
    }
    const TermP& v = r.store.cells.at(*r.allocated);
    QType q = typecheckRuntime(v, st, storeDomain(st));
    q.q.erase(Atom::fresh());
    out[*r.allocated] = StoreEntry{"", q};
    return out;
}

namespace {

Qual newLocations(const StoreTyping& before, const StoreTyping& after) {
    return qminus(storeDomain(after), storeDomain(before));
}

// Atoms of q2 that q1 does not already cover under the store typing.
Qual uncovered(const StoreTyping& st, const Qual& q2, const Qual& q1) {
    Context g = Context().withStore(&st);
    Qual out;
    for (const auto& a : q2)
        if (!subQual(g, Qual{a}, q1)) out.insert(a);
    return out;
}

// Synthesis first; when the contractum lost an annotation that performed a
// subsumption, fall back to checking against the preserved type.
QType typeAt(const TermP& t, const StoreTyping& st, const Qual& phi, const std::optional<QType>& expect, Checker* c) {
    Checker local(&st);
    try {
        QType q = typecheckRuntime(t, st, phi, &local);
        if (c) *c = std::move(local);
        return q;
    } catch (const TypeErrorEx&) {
        if (!expect) throw;
        std::exception_ptr synthFailure = std::current_exception();
        Checker chk(&st);
        try {
            chk.check(Context().withStore(&st), phi, t, *expect);
        } catch (const TypeErrorEx&) {
            std::rethrow_exception(synthFailure);
        }
        if (c) *c = std::move(chk);
        return *expect;
    }
}

}  // namespace

OracleReport preservationCheck(const TermP& t, const StoreTyping& st0, const Store& s0, std::size_t fuel) {
    OracleReport rep;
    rep.program = printTerm(t);
    TermP cur = t;
    StoreTyping st = st0;
    Store s = s0;

    auto failAt = [&](const std::string& msg) {
        rep.ok = false;
        rep.failure = msg;
        rep.witnessTerm = cur;
        rep.witnessStore = s;
        rep.witnessSigma = st;
        rep.witnessPhi = storeDomain(st);
        return rep;
    };

    std::string why;
    if (!wfStore(st, storeDomain(st), s, &why)) return failAt("initial store: " + why);

    std::optional<QType> expected;
    for (std::size_t i = 0;; ++i) {
        Checker c(&st);
        QType q;
        try {
            q = typeAt(cur, st, storeDomain(st), expected, &c);
        } catch (const TypeErrorEx& e) {
            return failAt(std::string(i == 0 ? "initial term" : "contractum") + " is ill-typed: " + kindName(e.kind) +
                          ": " + e.what());
        }
        if (i == fuel) break;

        StepResult r = step(cur, s);
        if (r.kind == StepResult::Kind::AlreadyValue) {
            rep.reachedValue = true;
            return rep;
        }
        if (r.kind == StepResult::Kind::Stuck) return failAt("progress: stuck (" + r.reason + ")");

        StoreTyping st2;
        try {
            st2 = extendStoreTyping(st, r, c);
        } catch (const TypeErrorEx& e) {
            return failAt(std::string("allocated value is ill-typed: ") + e.what());
        }
        StepVerdict v;
        v.step = i + 1;
        v.rule = r.rule;
        v.newLocs = newLocations(st, st2);

        cur = r.term;
        s = std::move(r.store);
        st = std::move(st2);

        if (!wfStoreTyping(st)) return failAt("store typing ill-formed after " + v.rule);
        if (!wfStore(st, storeDomain(st), s, &why)) return failAt("store ill-typed after " + v.rule + ": " + why);

        QType target{q.ty, substFreshQual(q.q, v.newLocs)};
        QType q2;
        try {
            q2 = typeAt(cur, st, storeDomain(st), target, nullptr);
        } catch (const TypeErrorEx& e) {
            return failAt("contractum ill-typed after " + v.rule + ": " + kindName(e.kind) + ": " + e.what());
        }
        Context g = Context().withStore(&st);
        if (!subQType(g, q2, target))
            return failAt("type not preserved by " + v.rule + ": " + printQType(q2) + " vs " + printQType(target));
        v.growth = uncovered(st, qwithout(q2.q, Atom::fresh()), q.q);
        if (!qsubset(v.growth, v.newLocs)) {
            v.ok = false;
            rep.verdicts.push_back(v);
            return failAt("qualifier grew by " + printQual(v.growth) + " beyond new locations");
        }
        rep.verdicts.push_back(v);
        ++rep.steps;
        expected = q2;
    }
    rep.reachedValue = isValue(cur);
    rep.exhausted = !rep.reachedValue;
    return rep;
}

OracleReport preservationCheck(const TermP& t, std::size_t fuel) { return preservationCheck(t, {}, {}, fuel); }

bool progressCheck(const TermP& t, const StoreTyping& st, const Qual& phi, const Store& s, std::string* why) {
    try {
        typecheckRuntime(t, st, phi);
    } catch (const TypeErrorEx& e) {
        if (why) *why = std::string("precondition: ill-typed: ") + e.what();
        return false;
    }
    StepResult r = step(t, s);
    if (r.kind == StepResult::Kind::Stuck) {
        if (why) *why = "stuck: " + r.reason;
        return false;
    }
    return true;
}

namespace {

struct Advanced {
    TermP term;
    Store store;
    StoreTyping st;
    Qual newLocs;
    bool ok = true;
    std::string detail;
};

// One step of t under (st, s), followed by re-typing the contractum under
// the observation phi extended with the new locations.
Advanced advance(const TermP& t, const StoreTyping& st, const Store& s, const Qual& phi, Qual& outQual) {
    Advanced a;
    a.term = t;
    a.store = s;
    a.st = st;
    Checker c(&st);
    QType before;
    try {
        before = typecheckRuntime(t, st, phi, &c);
    } catch (const TypeErrorEx& e) {
        a.ok = false;
        a.detail = std::string("ill-typed before step: ") + e.what();
        return a;
    }
    StepResult r = step(t, s);
    if (r.kind == StepResult::Kind::Stuck) {
        a.ok = false;
        a.detail = "stuck: " + r.reason;
        return a;
    }
    if (r.kind == StepResult::Kind::AlreadyValue) {
        outQual = before.q;
        return a;
    }
    try {
        a.st = extendStoreTyping(st, r, c);
    } catch (const TypeErrorEx& e) {
        a.ok = false;
        a.detail = std::string("allocation ill-typed: ") + e.what();
        return a;
    }
    a.newLocs = newLocations(st, a.st);
    a.term = r.term;
    a.store = r.store;
    QType after;
    Qual phi2 = qunion(phi, a.newLocs);
    QType target{before.ty, substFreshQual(before.q, a.newLocs)};
    try {
        after = typeAt(a.term, a.st, phi2, target, nullptr);
    } catch (const TypeErrorEx&) {
        try {
            after = typeAt(a.term, a.st, storeDomain(a.st), target, nullptr);
        } catch (const TypeErrorEx& e) {
            a.ok = false;
            a.detail = std::string("contractum ill-typed: ") + e.what();
            return a;
        }
    }
    Context g = Context().withStore(&a.st);
    if (!subQType(g, after, target)) {
        a.ok = false;
        a.detail = "type not preserved: " + printQType(after) + " vs " + printQType(target);
        return a;
    }
    outQual = after.q;
    return a;
}

bool disjoint(const Qual& p1, const Qual& p2) {
    // Overlap under the empty context: the plain intersection plus the marker.
    Qual ov = overlap(ReachEnv{}, p1, p2);
    return qsubset(ov, Qual{Atom::fresh()});
}

}  // namespace

PairVerdict separationCheck(const TermP& t1, const TermP& t2, const StoreTyping& st, const Store& s) {
    PairVerdict v;
    Qual phi = storeDomain(st);
    QType q1, q2;
    try {
        q1 = typecheckRuntime(t1, st, phi);
        q2 = typecheckRuntime(t2, st, phi);
    } catch (const TypeErrorEx& e) {
        v.detail = std::string("precondition: ill-typed: ") + e.what();
        return v;
    }
    if (!disjoint(q1.q, q2.q)) {
        v.detail = "precondition: qualifiers overlap";
        return v;
    }
    v.precondition = true;
    Advanced a1 = advance(t1, st, s, phi, v.p1);
    if (!a1.ok) {
        v.detail = "first term: " + a1.detail;
        return v;
    }
    Advanced a2 = advance(t2, a1.st, a1.store, storeDomain(a1.st), v.p2);
    if (!a2.ok) {
        v.detail = "second term: " + a2.detail;
        return v;
    }
    try {
        v.p1 = typecheckRuntime(a1.term, a2.st, storeDomain(a2.st)).q;
    } catch (const TypeErrorEx& e) {
        v.detail = std::string("first contractum ill-typed after second step: ") + e.what();
        return v;
    }
    v.ok = disjoint(v.p1, v.p2);
    if (!v.ok) v.detail = "contracta overlap: " + printQual(qintersect(v.p1, v.p2));
    return v;
}

PairVerdict parallelCheck(const TermP& t1, const TermP& t2, const StoreTyping& st, const Store& s, const Qual& phi1,
                          const Qual& phi2) {
    PairVerdict v;
    if (!qintersect(phi1, phi2).empty()) {
        v.detail = "precondition: observations overlap";
        return v;
    }
    if (isValue(t1) || isValue(t2)) {
        v.detail = "precondition: both terms must be reducible";
        return v;
    }
    Store s1 = s.restrict(phi1);
    Store s2 = s.restrict(phi2);
    s2.next = s.next + kParallelOffset;
    std::string why;
    try {
        typecheckRuntime(t1, st, phi1);
        typecheckRuntime(t2, st, phi2);
    } catch (const TypeErrorEx& e) {
        v.detail = std::string("precondition: ill-typed: ") + e.what();
        return v;
    }
    if (!wfStore(st, phi1, s1, &why) || !wfStore(st, phi2, s2, &why)) {
        v.detail = "precondition: " + why;
        return v;
    }
    v.precondition = true;
    Advanced a1 = advance(t1, st, s1, phi1, v.p1);
    if (!a1.ok) {
        v.detail = "first term: " + a1.detail;
        return v;
    }
    Advanced a2 = advance(t2, st, s2, phi2, v.p2);
    if (!a2.ok) {
        v.detail = "second term: " + a2.detail;
        return v;
    }
    if (!qintersect(a1.newLocs, a2.newLocs).empty()) {
        v.detail = "allocations collided";
        return v;
    }
    v.ok = disjoint(v.p1, v.p2);
    if (!v.ok) v.detail = "contracta overlap: " + printQual(qintersect(v.p1, v.p2));
    return v;
}

// ---------------------------------------------------------------- generator

namespace {

struct GenVar {
    enum class Kind { NatRef, RefRef, Fun, Nat, Cyclic, Unit };
    Kind kind;
    std::string name;
    std::string inner;  // referenced variable for RefRef, captured for Fun
};

class ProgramGen {
public:
    ProgramGen(std::mt19937_64& rng, std::size_t size) : rng_(rng), size_(size) {}

    std::string build() {
        if (size_ == 0) return std::to_string(pick(0, 5));
        std::ostringstream out;
        std::size_t n = pick(1, std::max<std::size_t>(1, size_));
        for (std::size_t i = 0; i < n; ++i) {
            out << binding();
            vars_.insert(vars_.end(), pending_.begin(), pending_.end());
            pending_.clear();
        }
        out << finalExpr();
        return out.str();
    }

private:
    std::mt19937_64& rng_;
    std::size_t size_;
    std::vector<GenVar> vars_;
    std::vector<GenVar> pending_;  // bound by the current let, visible after it
    int counter_ = 0;
    bool looped_ = false;

    std::size_t pick(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_); }
    bool coin(int percent) { return pick(0, 99) < static_cast<std::size_t>(percent); }

    std::string fresh() { return "v" + std::to_string(counter_++); }

    std::optional<GenVar> any(GenVar::Kind k) {
        std::vector<GenVar> c;
        for (const auto& v : vars_)
            if (v.kind == k) c.push_back(v);
        if (c.empty()) return std::nullopt;
        return c[pick(0, c.size() - 1)];
    }

    std::string natExpr(int depth = 0) {
        std::size_t choice = pick(0, depth > 2 ? 1 : 5);
        switch (choice) {
            case 0: return std::to_string(pick(0, 5));
            case 1:
                if (auto v = any(GenVar::Kind::Nat)) return v->name;
                return std::to_string(pick(0, 3));
            case 2:
                if (auto v = any(GenVar::Kind::NatRef)) return "(!" + v->name + ")";
                return "3";
            case 3: return "(succ " + natExpr(depth + 1) + ")";
            case 4: return "(pred " + natExpr(depth + 1) + ")";
            default:
                return "(if iszero " + natExpr(depth + 1) + " then " + natExpr(depth + 1) + " else " + natExpr(depth + 1) +
                       " * " + natExpr(depth + 1) + ")";
        }
    }

    std::string let(const std::string& x, const std::string& rhs, const std::string& ann = "") {
        return "let " + x + (ann.empty() ? "" : " : " + ann) + " = " + rhs + " in\n";
    }

    std::string binding() {
        switch (pick(0, 12)) {
            case 0:
            case 1: {
                std::string x = fresh();
                pending_.push_back({GenVar::Kind::NatRef, x, ""});
                return let(x, "ref " + natExpr());
            }
            case 2: {
                auto r = any(GenVar::Kind::NatRef);
                if (!r) return binding0();
                std::string x = fresh();
                pending_.push_back({GenVar::Kind::RefRef, x, r->name});
                return let(x, "ref " + r->name);
            }
            case 3: {
                auto r = any(GenVar::Kind::NatRef);
                if (!r) return binding0();
                return let(fresh(), r->name + " := " + natExpr());
            }
            case 4: {
                auto r = any(GenVar::Kind::RefRef);
                if (!r) return binding0();
                std::string x = fresh();
                pending_.push_back({GenVar::Kind::Nat, x, ""});
                return let(x, "!(!" + r->name + ")");
            }
            case 5: {
                std::string c = fresh();
                pending_.push_back({GenVar::Kind::Cyclic, c, ""});
                return let(c, "ref (fun id(x: Unit^{}) : Unit^{} => x)",
                           "mu z. Ref[(f(x: Unit^{}) -> Unit^{})^{z}]^{fresh}") +
                       let(fresh(), c + " := (fun g(x: Unit^{}) : Unit^{} => (!" + c + ") x)");
            }
            case 6: {
                auto r = any(GenVar::Kind::NatRef);
                if (!r) return binding0();
                std::string x = fresh();
                pending_.push_back({GenVar::Kind::Fun, x, r->name});
                return let(x, "fun h(u: Unit^{}) : Nat^{} => let w = " + r->name + " := succ (!" + r->name + ") in !" + r->name);
            }
            case 7: {
                std::string x = fresh();
                pending_.push_back({GenVar::Kind::Nat, x, ""});
                if (auto r = any(GenVar::Kind::NatRef); r && coin(50))
                    return let(x, "(fun k(r: Ref[Nat^{}]^{fresh}) : Nat^{} => !r) " + r->name);
                return let(x, "(fun k(r: Ref[Nat^{}]^{fresh}) : Nat^{} => succ (!r)) (ref " + natExpr() + ")");
            }
            case 8: {
                auto r = any(GenVar::Kind::RefRef);
                if (!r) return binding0();
                std::string x = fresh();
                pending_.push_back({GenVar::Kind::Nat, x, ""});
                return let(x, "!(!(" + r->name + " : mu z. Ref[Bot^{}, Ref[Nat^{}]^{z}]^{" + r->name + ", " + r->inner + "}))");
            }
            case 9: {
                std::string x = fresh();
                pending_.push_back({GenVar::Kind::Nat, x, ""});
                return let(x, "(tfun pid(X^xq <: Top^{}) => fun ii(a: X^{}) : X^{} => a)[Nat^{}] " + natExpr());
            }
            case 10: {
                auto f = any(GenVar::Kind::Fun);
                if (!f) return binding0();
                std::string x = fresh();
                pending_.push_back({GenVar::Kind::Nat, x, ""});
                return let(x, f->name + " unit");
            }
            case 11: {
                std::string x = fresh();
                pending_.push_back({GenVar::Kind::Nat, x, ""});
                return let(x, fixFactorial(pick(0, 4)));
            }
            default: return binding0();
        }
    }

    std::string binding0() {
        std::string x = fresh();
        pending_.push_back({GenVar::Kind::Nat, x, ""});
        return let(x, natExpr());
    }

    std::string fixFactorial(std::size_t n) {
        return "(let fix = tfun fx(T^t <: Top^{}) => fun fy(f: (f1(g: (f2(n: T^{}) -> T^{})^{fresh}) -> "
               "(f3(n: T^{}) -> T^{})^{g})^{}) : (f4(n: T^{}) -> T^{})^{fresh} => "
               "let c : mu z. Ref[(f5(n: T^{}) -> T^{})^{z}]^{fresh} = ref (fun id(x: T^{}) : T^{} => x) in "
               "let u = c := f (fun h(n: T^{}) : T^{} => (!c) n) in !c in "
               "let factf = fun ff(g: (f2(n: Nat^{}) -> Nat^{})^{fresh}) : (f3(n: Nat^{}) -> Nat^{})^{g} => "
               "fun fact(x: Nat^{}) : Nat^{} => if iszero x then 1 else x * g (pred x) in "
               "fix[Nat^{}] factf " +
               std::to_string(n) + ")";
    }

    std::string finalExpr() {
        if (auto c = any(GenVar::Kind::Cyclic); c && coin(20)) return "(!" + c->name + ") unit";
        if (!vars_.empty() && coin(70)) {
            const GenVar& v = vars_[pick(0, vars_.size() - 1)];
            switch (v.kind) {
                case GenVar::Kind::NatRef: return "!" + v.name;
                case GenVar::Kind::Fun: return v.name + " unit";
                case GenVar::Kind::Nat: return v.name;
                default: return natExpr();
            }
        }
        return natExpr();
    }
};

}  // namespace

std::string genProgramText(std::mt19937_64& rng, std::size_t size) { return ProgramGen(rng, size).build(); }

TermP genWellTyped(std::mt19937_64& rng, std::size_t size) {
    for (int attempt = 0; attempt < 20; ++attempt) {
        std::string text = genProgramText(rng, size);
        try {
            TermP t = parseProgram(text);
            typecheckProgram(t);
            return t;
        } catch (const std::exception&) {
            continue;
        }
    }
    return mkUnit();
}

PairInstance parallelCaseStudy() {
    PairInstance p;
    QType nat{tNat(), {}};
    QType unit{tUnit(), {}};
    Qual inners{Atom::location(0), Atom::location(1)};
    QType closure{tFun("f", "u", unit, nat), inners};
    p.st[0] = StoreEntry{"", nat};
    p.st[1] = StoreEntry{"", nat};
    p.st[2] = StoreEntry{"", closure};
    p.st[3] = StoreEntry{"", QType{tRef(closure), {Atom::location(2)}}};
    p.s.cells[0] = mkNat(1);
    p.s.cells[1] = mkNat(2);
    p.s.cells[2] = parseProgram("fun sum(u: Unit^{}) : Nat^{} => (!@0) * (!@1)");
    p.s.cells[3] = mkLoc(2);
    p.s.next = 4;
    p.t1 = parseProgram("@0 := succ (!@0)");
    p.t2 = parseProgram("@3 := !@3");
    p.phi1 = Qual{Atom::location(0)};
    p.phi2 = Qual{Atom::location(2), Atom::location(3)};
    return p;
}

PairInstance genDisjointPair(std::mt19937_64& rng) {
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    PairInstance p;
    QType nat{tNat(), {}};
    QType unitFun{tFun("f", "x", {tUnit(), {}}, {tUnit(), {}}), {Atom::var("z")}};
    std::size_t n = pick(2, 6);
    std::vector<int> group(n);
    std::vector<char> kind(n);  // 'n' nat ref, 'r' ref to an earlier nat ref, 'c' cyclic function
    for (std::size_t l = 0; l < n; ++l) {
        std::size_t k = pick(0, 9);
        std::vector<std::size_t> natRefs;
        for (std::size_t j = 0; j < l; ++j)
            if (kind[j] == 'n') natRefs.push_back(j);
        if (k < 5 || (k < 8 && natRefs.empty())) {
            kind[l] = 'n';
            group[l] = static_cast<int>(pick(1, 2));
            p.st[l] = StoreEntry{"", nat};
            p.s.cells[l] = mkNat(pick(0, 5));
        } else if (k < 8) {
            std::size_t target = natRefs[pick(0, natRefs.size() - 1)];
            kind[l] = 'r';
            group[l] = group[target];
            p.st[l] = StoreEntry{"", QType{tRef(nat), {Atom::location(target)}}};
            p.s.cells[l] = mkLoc(target);
        } else {
            kind[l] = 'c';
            group[l] = static_cast<int>(pick(1, 2));
            p.st[l] = StoreEntry{"z", unitFun};
            p.s.cells[l] = parseProgram("fun g(x: Unit^{}) : Unit^{} => (!@" + std::to_string(l) + ") x");
        }
    }
    p.s.next = n;
    for (std::size_t l = 0; l < n; ++l) (group[l] == 1 ? p.phi1 : p.phi2).insert(Atom::location(l));

    auto termFor = [&](int g) -> TermP {
        std::vector<std::size_t> mine;
        for (std::size_t l = 0; l < n; ++l)
            if (group[l] == g) mine.push_back(l);
        if (mine.empty()) return parseProgram("succ " + std::to_string(pick(0, 9)) + " * 2");
        std::size_t l = mine[pick(0, mine.size() - 1)];
        std::string L = "@" + std::to_string(l);
        switch (kind[l]) {
            case 'n':
                switch (pick(0, 4)) {
                    case 0: return parseProgram(L + " := succ (!" + L + ")");
                    case 1: return parseProgram("ref (!" + L + ")");
                    case 2: return parseProgram("(fun h(u: Unit^{}) : Nat^{} => !" + L + ") unit");
                    case 3: return parseProgram("(fun h(u: Unit^{}) : Ref[Nat^{}]^{h} => " + L + ") unit");
                    default: return parseProgram("!" + L);
                }
            case 'r': {
                std::string inner = "@" + std::to_string(p.s.cells[l]->loc);
                switch (pick(0, 3)) {
                    case 0: return parseProgram("!(!" + L + ")");
                    case 1: return parseProgram(L + " := " + inner);
                    case 2: return parseProgram("!" + L);
                    default: return parseProgram("ref " + L);
                }
            }
            default:
                switch (pick(0, 2)) {
                    case 0: return parseProgram("(!" + L + ") unit");
                    case 1: return parseProgram("!" + L);
                    default: return parseProgram(L + " := (fun k(x: Unit^{}) : Unit^{} => x)");
                }
        }
    };
    p.t1 = termFor(1);
    p.t2 = termFor(2);
    return p;
}

}  // namespace reachck
