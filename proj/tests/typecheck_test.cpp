#include "reachck/meta.hpp"
#include "reachck/typecheck.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace reachck;

namespace {

QType qt(const std::string& s) { return parseQType(s); }
Atom v(const std::string& x) { return Atom::var(x); }

std::string kindOf(const std::string& program) {
    try {
        typecheckProgram(parseProgram(program));
    } catch (const TypeErrorEx& e) {
        return kindName(e.kind);
    }
    return "";
}

std::string kindIn(const Context& g, const Qual& phi, const std::string& term) {
    try {
        Checker c;
        c.synth(g, phi, parseProgram(term));
    } catch (const TypeErrorEx& e) {
        return kindName(e.kind);
    }
    return "";
}

const std::string kFunTy = "(h(x: Unit^{}) -> Unit^{})";

}  // namespace

TEST_SUITE("typecheck") {
    TEST_CASE("corpus verdicts") {
        for (const auto& c : testing::corpusCases()) {
            CAPTURE(c.file);
            CHECK(kindOf(testing::readText(testing::corpusDir() + "/" + c.file)) == c.kind);
        }
    }

    TEST_CASE("every corpus file has a recorded verdict") {
        std::set<std::string> known;
        for (const auto& c : testing::corpusCases()) known.insert(c.file);
        for (const auto& f : testing::corpusFiles()) {
            CAPTURE(f);
            CHECK(known.count(f));
        }
    }

    TEST_CASE("minimal types of constants and allocation") {
        CHECK(alphaEq(typecheckProgram(parseProgram("unit")), qt("Unit^{}")));
        CHECK(alphaEq(typecheckProgram(parseProgram("ref unit")), qt("Ref[Unit^{}]^{fresh}")));
        CHECK(alphaEq(typecheckProgram(parseProgram("iszero 0")), qt("Bool^{}")));
    }

    TEST_CASE("cyclic assignment of a self-capturing closure") {
        Context g = Context()
                        .withTerm("c", qt("mu z. Ref[" + kFunTy + "^{z}]^{fresh}"))
                        .withTerm("f", qt(kFunTy + "^{c}"));
        Checker chk;
        QType r = chk.synth(g, {v("c"), v("f")}, parseProgram("c := f"));
        CHECK(alphaEq(r, qt("Unit^{}")));
    }

    TEST_CASE("plain reference rejects the self-capturing closure") {
        Context g = Context()
                        .withTerm("c", qt("Ref[" + kFunTy + "^{}]^{fresh}"))
                        .withTerm("f", qt(kFunTy + "^{c}"));
        CHECK(kindIn(g, {v("c"), v("f")}, "c := f") == "ReferentMismatch");
    }

    TEST_CASE("cyclic assignment requires exactly the reference") {
        Context g = Context()
                        .withTerm("a", qt("Ref[Nat^{}]^{fresh}"))
                        .withTerm("e1", qt("mu x. Ref[" + kFunTy + "^{x}]^{fresh}"))
                        .withTerm("e2", qt(kFunTy + "^{e1, a}"));
        CHECK(kindIn(g, {v("a"), v("e1"), v("e2")}, "e1 := e2") == "CyclicQualifierNotSingleton");
        CHECK(kindIn(g, {v("a"), v("e1"), v("e2")}, "(e1 : mu x. Ref[" + kFunTy + "^{x}]^{e1}) := e2") ==
              "CyclicAssigneeNotVariable");
    }

    TEST_CASE("shallow nesting keeps sibling references disjoint") {
        TermP t = parseProgram("let inner = ref 0 in let c1 = ref inner in let c2 = ref inner in unit");
        Checker c;
        typecheckRuntime(t, {}, {}, &c);
        Context g;
        for (const Term* let : c.letOrder) g = g.withTerm(c.lets.at(let).name, c.lets.at(let).declared);
        CHECK(overlap(g.reachEnv(), {v("c1")}, {v("c2")}) == Qual{Atom::fresh()});
    }

    TEST_CASE("checking an alias against its own name") {
        CHECK(kindOf("let counter = ref 0 in let counter2 = counter in (counter2 : Ref[Nat^{}]^{counter2})") == "");
        CHECK(kindOf("let counter = ref 0 in let counter2 = counter in (counter2 : Ref[Nat^{}]^{counter})") == "");
        CHECK(kindOf("let a = ref 0 in let b = ref 0 in (b : Ref[Nat^{}]^{a})") == "SubtypeFailure");
    }

    TEST_CASE("the fixpoint body assigns through its cyclic cell") {
        Context g = Context()
                        .withType("T", "t", qt("Top^{}"))
                        .withTerm("f", qt("(f1(g: (f2(n: T^{}) -> T^{})^{fresh}) -> (f3(n: T^{}) -> T^{})^{g})^{}"))
                        .withTerm("c", qt("mu z. Ref[(f5(n: T^{}) -> T^{})^{z}]^{fresh}"));
        Checker chk;
        QType r = chk.synth(g, {v("f"), v("c"), v("t")}, parseProgram("c := f (fun h(n: T^{}) : T^{} => (!c) n)"));
        CHECK(alphaEq(r, qt("Unit^{}")));
    }

    TEST_CASE("error kinds") {
        CHECK(kindOf("unit unit") == "NotAFunction");
        CHECK(kindOf("!unit") == "NotAReference");
        CHECK(kindOf("ref (ref 1)") == "FreshReferent");
        CHECK(kindOf("fun f(x) => x") == "AnnotationRequired");
        CHECK(kindOf("y") == "UnboundVariable");
        CHECK(kindOf("let x = ref 1 in ref x") == "DependentReturnEscape");
        CHECK(kindOf("(tfun f(X^x <: Nat^{}) => unit)[Bool^{}]") == "BoundViolation");
        CHECK(kindOf("(fun f(x: Nat^{}) : Nat^{} => x) true") == "SubtypeFailure");
        CHECK(kindOf("let r = ref 1 in (r : mu z. Ref[Bot^{}, Nat^{}]^{r}) := 2") == "WriteForbidden");
    }

    TEST_CASE("location typing respects the observation") {
        StoreTyping st;
        st[0] = StoreEntry{"", qt("Nat^{}")};
        try {
            typecheckRuntime(parseProgram("!@0"), st, {});
            FAIL("expected an error");
        } catch (const TypeErrorEx& e) {
            CHECK(e.kind == ErrorKind::Unobservable);
        }
        CHECK(alphaEq(typecheckRuntime(parseProgram("@0"), st, {Atom::location(0)}), qt("Ref[Nat^{}]^{@0}")));
        try {
            typecheckRuntime(parseProgram("(unit : Unit^{@0})"), st, {});
            FAIL("expected an error");
        } catch (const TypeErrorEx& e) {
            CHECK(e.kind == ErrorKind::ObservationEscape);
        }
    }

    TEST_CASE("cyclic store entries type at their own location") {
        StoreTyping st;
        st[0] = StoreEntry{"z", qt(kFunTy + "^{z}")};
        QType q = typecheckRuntime(parseProgram("!@0"), st, {Atom::location(0)});
        CHECK(alphaEq(q, qt(kFunTy + "^{@0}")));
    }

    TEST_CASE("checking against the synthesized type succeeds on generated programs") {
        std::mt19937_64 rng(301);
        for (int i = 0; i < 1000; ++i) {
            TermP t = genWellTyped(rng, 5);
            QType q = typecheckProgram(t);
            Checker c;
            static const StoreTyping empty;
            CHECK_NOTHROW(c.check(Context().withStore(&empty), {}, t, q));
        }
    }

    TEST_CASE("synthesis is deterministic") {
        for (const auto& c : testing::corpusCases()) {
            if (!c.kind.empty()) continue;
            TermP t = testing::loadCorpus(c.file);
            CHECK(printQType(typecheckProgram(t)) == printQType(typecheckProgram(t)));
        }
    }
}
