#include "reachck/meta.hpp"
#include "reachck/parse.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace reachck;

namespace {

QType qt(const std::string& s) { return parseQType(s); }
Qual vars(std::initializer_list<const char*> xs) {
    Qual q;
    for (auto x : xs) q.insert(Atom::var(x));
    return q;
}

}  // namespace

TEST_SUITE("syntax") {
    TEST_CASE("term substitution hits, skips unrelated binders, and respects shadowing") {
        CHECK(alphaEqTerm(substTermVar(mkVar("x"), "x", mkUnit()), mkUnit()));

        TermP lam = parseProgram("fun f(y: Unit^{}) : Unit^{} => x");
        TermP got = substTermVar(lam, "x", mkLoc(0));
        CHECK(alphaEqTerm(got, parseProgram("fun f(y: Unit^{}) : Unit^{} => @0")));

        TermP shadow = parseProgram("fun f(x: Unit^{}) : Unit^{} => x");
        CHECK(alphaEqTerm(substTermVar(shadow, "x", mkUnit()), shadow));
    }

    TEST_CASE("term substitution renames a binder that would capture") {
        // [y/x] under a binder named y must not capture the incoming y.
        TermP lam = parseProgram("fun f(y: Unit^{}) : Unit^{} => x");
        TermP got = substTermVar(lam, "x", mkVar("y"));
        CHECK(freeVars(got) == std::set<std::string>{"y"});
        CHECK(got->param != "y");
    }

    TEST_CASE("qualifier substitution on types") {
        CHECK(alphaEq(substQualInQType(qt("Unit^{x}"), "x", vars({"a", "b"})), qt("Unit^{a, b}")));

        QType cyc = qt("mu z. Ref[Nat^{z}]^{x}");
        CHECK(alphaEq(substQualInQType(cyc, "x", vars({"c"})), qt("mu z. Ref[Nat^{z}]^{c}")));

        // Hand-unrolled expectation for the dependent function case.
        QType fn = qt("(f(y: Nat^{x}) -> Nat^{x, y})^{}");
        CHECK(alphaEq(substQualInQType(fn, "x", vars({"p1", "p2"})), qt("(f(y: Nat^{p1, p2}) -> Nat^{p1, p2, y})^{}")));
    }

    TEST_CASE("qualifier substitution avoids capture by function binders") {
        QType fn = qt("(f(y: Nat^{}) -> Nat^{x})^{}");
        QType got = substQualInQType(fn, "x", vars({"y"}));
        CHECK(freeVars(got) == std::set<std::string>{"y"});
        CHECK(alphaEq(got, qt("(g(w: Nat^{}) -> Nat^{y})^{}")));
        CHECK_FALSE(alphaEq(got, qt("(g(w: Nat^{}) -> Nat^{w})^{}")));
    }

    TEST_CASE("free variables of types") {
        CHECK(freeVars(qt("(f(x: Nat^{a}) -> Nat^{x})^{}")) == std::set<std::string>{"a"});
        CHECK(freeVars(qt("mu z. Ref[Nat^{z}]^{}")).empty());
        CHECK(freeTypeVars(qt("forall f(X^x <: Top^{}). X^{x}^{}").ty).empty());
        CHECK(freeTypeVars(qt("forall f(X^x <: Top^{}). Y^{x}^{}").ty) == std::set<std::string>{"Y"});
    }

    TEST_CASE("alpha-equivalence ignores binder names only") {
        CHECK(alphaEq(qt("(f(x: Nat^{}) -> Nat^{x})^{}"), qt("(g(y: Nat^{}) -> Nat^{y})^{}")));
        CHECK_FALSE(alphaEq(qt("(f(x: Nat^{}) -> Nat^{x})^{}"), qt("(g(y: Nat^{}) -> Nat^{x})^{}")));
        CHECK(alphaEq(qt("mu z. Ref[Nat^{z}]^{}"), qt("mu w. Ref[Nat^{w}]^{}")));
        CHECK_FALSE(alphaEq(qt("Ref[Nat^{}]^{a}"), qt("Ref[Nat^{}]^{b}")));
    }

    TEST_CASE("type substitution") {
        QType body = qt("(f(x: X^{}) -> X^{x})^{}");
        TypeP got = substTypeVar(body.ty, "X", tNat());
        CHECK(alphaEq(got, qt("(f(x: Nat^{}) -> Nat^{x})^{}").ty));
    }
}

TEST_SUITE("parser") {
    TEST_CASE("constants and the knot shape") {
        TermP u = parseProgram("unit");
        CHECK(u->kind == TermKind::Unit);

        TermP knot = parseProgram(
            "let c = ref (fun f(x: Unit^{}) : Unit^{} => x) in c := (fun f(x: Unit^{}) : Unit^{} => (!c) x)");
        REQUIRE(isLetApp(knot));
        CHECK(knot->t2->kind == TermKind::RefNew);
        CHECK(knot->t1->t1->kind == TermKind::Assign);
    }

    TEST_CASE("ascription with an escape target and the ampersand synonym") {
        TermP t = parseProgram("(c : mu z. Ref[Bot^{}, T^{z}]^{c, x})");
        REQUIRE(t->kind == TermKind::Ascribe);
        const Type& r = *t->dom->ty;
        CHECK(r.kind == TypeKind::Ref);
        CHECK(r.a.ty->kind == TypeKind::Bot);
        CHECK(t->dom->q == vars({"c", "x"}));
        TermP amp = parseProgram("(c : mu z. Ref[Bot^{}, T^{&z}]^{c, x})");
        CHECK(alphaEqTerm(t, amp));
    }

    TEST_CASE("precedence: application binds tighter than assignment and multiplication") {
        TermP t = parseProgram("c := f x * g y");
        REQUIRE(t->kind == TermKind::Assign);
        REQUIRE(t->t2->kind == TermKind::Mul);
        CHECK(t->t2->t1->kind == TermKind::App);
        CHECK(t->t2->t2->kind == TermKind::App);
    }

    TEST_CASE("comments and spans") {
        TermP t = parseProgram("// leading\n  unit // trailing\n");
        CHECK(t->span == Span{2, 3, 2, 7});
    }

    TEST_CASE("parse errors carry a span and the expected tokens") {
        try {
            parseProgram("let x = in unit");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.span.startLine == 1);
            CHECK(e.span.startCol == 9);
            CHECK(e.expected == std::vector<std::string>{"term"});
        }
        CHECK_THROWS_AS(parseProgram("unit unit )"), ParseError);
        CHECK_THROWS_AS(parseProgram("fun f(x: Nat) => x"), ParseError);
        CHECK_THROWS_AS(parseProgram("$"), ParseError);
    }

    TEST_CASE("print then parse is the identity up to alpha on the corpus") {
        for (const auto& f : testing::corpusFiles()) {
            CAPTURE(f);
            TermP t = testing::loadCorpus(f);
            TermP back = parseProgram(printTerm(t));
            CHECK(alphaEqTerm(t, back));
        }
    }

    TEST_CASE("print then parse round-trips generated programs") {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 1000; ++i) {
            TermP t = parseProgram(genProgramText(rng, 5));
            CHECK(alphaEqTerm(t, parseProgram(printTerm(t))));
        }
    }

    TEST_CASE("qualified types print back to an equivalent type") {
        for (const char* s : {"Unit^{}", "mu z. Ref[Bot^{}, Ref[Nat^{}]^{z}]^{c, x}", "Ref[Nat^{}]^{fresh}",
                              "forall f(X^x <: Top^{}). (g(y: X^{x}) -> X^{y})^{x}^{}", "Ref[Nat^{}]^{a, @3, fresh}"}) {
            CAPTURE(s);
            CHECK(alphaEq(qt(s), qt(printQType(qt(s)))));
        }
    }
}
