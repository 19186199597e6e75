#include "reachck/meta.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace reachck;

namespace {

const Atom kFresh = Atom::fresh();
Atom l(std::size_t n) { return Atom::location(n); }

QType qt(const std::string& s) { return parseQType(s); }

}  // namespace

TEST_SUITE("meta-harness") {
    TEST_CASE("preservation along the knot") {
        OracleReport rep = preservationCheck(testing::loadCorpus("landin_ok.rt"), 50);
        CHECK(rep.ok);
        CHECK(rep.reachedValue);
        CHECK(rep.steps > 0);
        for (const auto& v : rep.verdicts) CHECK(v.ok);
    }

    TEST_CASE("one allocation replaces the fresh marker by the new location") {
        OracleReport rep = preservationCheck(parseProgram("ref unit"), 5);
        REQUIRE(rep.ok);
        REQUIRE(rep.verdicts.size() == 1);
        CHECK(rep.verdicts[0].rule == "ref");
        CHECK(rep.verdicts[0].newLocs == Qual{l(0)});
        CHECK(rep.verdicts[0].growth == Qual{l(0)});
    }

    TEST_CASE("values are vacuously preserved") {
        OracleReport rep = preservationCheck(parseProgram("fun f(x: Unit^{}) : Unit^{} => x"), 10);
        CHECK(rep.ok);
        CHECK(rep.steps == 0);
        CHECK(rep.reachedValue);
    }

    TEST_CASE("a broken configuration produces a replayable witness") {
        StoreTyping st;
        st[0] = StoreEntry{"", qt("Nat^{}")};
        Store s;
        s.cells[0] = mkUnit();
        s.next = 1;
        OracleReport rep = preservationCheck(parseProgram("!@0"), st, s, 10);
        CHECK_FALSE(rep.ok);
        REQUIRE(rep.witnessTerm);
        CHECK(rep.witnessSigma.size() == 1);
        CHECK(rep.witnessPhi == Qual{l(0)});
        CHECK_FALSE(rep.failure.empty());
    }

    TEST_CASE("progress on values and redexes") {
        CHECK(progressCheck(parseProgram("unit"), {}, {}, {}));
        CHECK(progressCheck(parseProgram("(fun f(x: Unit^{}) : Unit^{} => x) unit"), {}, {}, {}));
        std::string why;
        CHECK_FALSE(progressCheck(parseProgram("!unit"), {}, {}, {}, &why));
        CHECK(why.find("precondition") != std::string::npos);
    }

    TEST_CASE("corpus traces: progress and preservation at fuel 200") {
        for (const auto& c : testing::corpusCases()) {
            if (!c.kind.empty()) continue;
            CAPTURE(c.file);
            TermP t = testing::loadCorpus(c.file);
            OracleReport rep = preservationCheck(t, 200);
            CHECK_MESSAGE(rep.ok, rep.failure);
            EvalResult r = evalFuel(t, 200);
            CHECK_FALSE(r.stuck);
        }
    }

    TEST_CASE("generated programs: progress and preservation") {
        std::mt19937_64 rng(20240601);
        std::size_t cyclic = 0, failures = 0, allocating = 0;
        for (int i = 0; i < 10000; ++i) {
            std::string text = genProgramText(rng, 6);
            TermP t = parseProgram(text);
            REQUIRE_NOTHROW(typecheckProgram(t));
            cyclic += text.find("mu z. Ref[(f(x: Unit^{}) -> Unit^{})^{z}]") != std::string::npos;
            OracleReport rep = preservationCheck(t, 200);
            if (!rep.ok) {
                ++failures;
                MESSAGE(rep.failure << "\n" << rep.program);
            }
            for (const auto& v : rep.verdicts) {
                REQUIRE(qsubset(v.growth, v.newLocs));
                allocating += !v.newLocs.empty();
            }
        }
        CHECK(failures == 0);
        CHECK(cyclic > 100);
        CHECK(allocating > 1000);
    }

    TEST_CASE("generator corner cases") {
        std::mt19937_64 rng(5);
        TermP t = parseProgram(genProgramText(rng, 0));
        CHECK(t->kind == TermKind::NatLit);
        for (int i = 0; i < 200; ++i) CHECK_NOTHROW(typecheckProgram(genWellTyped(rng, 8)));
    }

    TEST_CASE("separation of independent allocations") {
        PairVerdict v = separationCheck(parseProgram("ref unit"), parseProgram("ref unit"), {}, {});
        CHECK(v.precondition);
        CHECK(v.ok);
        CHECK(v.p1 == Qual{l(0)});
        CHECK(v.p2 == Qual{l(1)});
        CHECK(overlap(ReachEnv{}, v.p1, v.p2) == Qual{kFresh});
    }

    TEST_CASE("separation of pure arithmetic") {
        PairVerdict v = separationCheck(parseProgram("succ 1"), parseProgram("2 * 3"), {}, {});
        CHECK(v.ok);
        CHECK(v.p1.empty());
        CHECK(v.p2.empty());
    }

    TEST_CASE("four-reference case study") {
        PairInstance p = parallelCaseStudy();
        REQUIRE(wfStoreTyping(p.st));
        REQUIRE(wfStore(p.st, storeDomain(p.st), p.s));
        PairVerdict s = separationCheck(p.t1, p.t2, p.st, p.s);
        CHECK(s.precondition);
        CHECK_MESSAGE(s.ok, s.detail);
        PairVerdict v = parallelCheck(p.t1, p.t2, p.st, p.s, p.phi1, p.phi2);
        CHECK(v.precondition);
        CHECK_MESSAGE(v.ok, v.detail);
    }

    TEST_CASE("parallel counters") {
        StoreTyping st;
        st[0] = StoreEntry{"", qt("Nat^{}")};
        st[1] = StoreEntry{"", qt("Nat^{}")};
        Store s;
        s.cells[0] = mkNat(0);
        s.cells[1] = mkNat(10);
        s.next = 2;
        TermP a = parseProgram("@0 := succ (!@0)"), b = parseProgram("@1 := succ (!@1)");
        PairVerdict v = parallelCheck(a, b, st, s, {l(0)}, {l(1)});
        CHECK(v.precondition);
        CHECK(v.ok);
        PairVerdict shared = parallelCheck(a, b, st, s, {l(0), l(1)}, {l(1)});
        CHECK_FALSE(shared.precondition);
        CHECK_FALSE(shared.ok);
    }

    TEST_CASE("parallel allocations land in disjoint ranges") {
        PairVerdict v = parallelCheck(parseProgram("ref 1"), parseProgram("ref 2"), {}, {}, {}, {});
        CHECK(v.ok);
        CHECK(v.p1 == Qual{l(0)});
        CHECK(v.p2 == Qual{l(kParallelOffset)});
    }

    TEST_CASE("generated disjoint pairs") {
        std::mt19937_64 rng(77);
        int tracked = 0;
        for (int i = 0; i < 1000; ++i) {
            PairInstance p = genDisjointPair(rng);
            CAPTURE(printTerm(p.t1));
            CAPTURE(printTerm(p.t2));
            PairVerdict s = separationCheck(p.t1, p.t2, p.st, p.s);
            REQUIRE(s.precondition);
            REQUIRE_MESSAGE(s.ok, s.detail);
            REQUIRE(qsubset(qintersect(s.p1, s.p2), {kFresh}));
            PairVerdict v = parallelCheck(p.t1, p.t2, p.st, p.s, p.phi1, p.phi2);
            REQUIRE(v.precondition);
            REQUIRE_MESSAGE(v.ok, v.detail);
            tracked += !qwithout(s.p1, kFresh).empty() && !qwithout(s.p2, kFresh).empty();
        }
        CHECK(tracked > 25);
    }
}
