#include "reachck/qualifier.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace reachck;
using testing::closureOracle;

namespace {

constexpr int kInstances = 1000;

Atom v(const std::string& x) { return Atom::var(x); }
Atom l(std::size_t n) { return Atom::location(n); }
const Atom kFresh = Atom::fresh();

struct Instance {
    ReachEnv env;
    std::vector<Atom> universe;  // every atom that may appear
};

// Random environment over variables x0..x{n-1} and locations @0..@{m-1}.
// Declared qualifiers may mention any atom, including later keys, so cycles
// are common.
Instance randomEnv(std::mt19937_64& rng, bool withLocs = true) {
    std::uniform_int_distribution<int> size(0, 7);
    int n = size(rng), m = withLocs ? size(rng) % 4 : 0;
    Instance in;
    for (int i = 0; i < n; ++i) in.universe.push_back(v("x" + std::to_string(i)));
    for (int i = 0; i < m; ++i) in.universe.push_back(l(i));
    in.universe.push_back(kFresh);
    std::bernoulli_distribution pick(0.25);
    auto subset = [&]() {
        Qual q;
        for (const auto& a : in.universe)
            if (pick(rng)) q.insert(a);
        return q;
    };
    for (int i = 0; i < n; ++i) in.env.bind(v("x" + std::to_string(i)), subset());
    for (int i = 0; i < m; ++i) in.env.bind(l(i), subset());
    return in;
}

Qual randomQual(std::mt19937_64& rng, const Instance& in, double p = 0.3) {
    std::bernoulli_distribution pick(p);
    Qual q;
    for (const auto& a : in.universe)
        if (pick(rng)) q.insert(a);
    // Occasionally include an atom with no binding.
    if (pick(rng)) q.insert(v("unbound"));
    return q;
}

// Cardinality by its recursive definition over the environment.
std::size_t cardinalityOracle(const ReachEnv& env, const Qual& q, std::size_t upto) {
    if (upto == 0) return 0;
    const Atom& k = env.entries[upto - 1].first;
    return (q.count(k) ? 1 : 0) + cardinalityOracle(env, q, upto - 1);
}

}  // namespace

TEST_SUITE("qualifier-algebra") {
    TEST_CASE("one-step reachability") {
        ReachEnv empty;
        CHECK(varReach(empty, "x").empty());

        ReachEnv alias;
        alias.bind(v("a"), {});
        alias.bind(v("c2"), {v("a")});
        CHECK(varReach(alias, "c2") == Qual{v("a")});

        ReachEnv cyc;
        cyc.bind(v("x"), {v("y")});
        cyc.bind(v("y"), {v("x")});
        CHECK(varReach(cyc, "x") == Qual{v("y")});
    }

    TEST_CASE("bounded and full transitive lookup on fixed environments") {
        ReachEnv alias;
        alias.bind(v("a"), {});
        alias.bind(v("c2"), {v("a")});
        CHECK(qtransN(alias, {v("c2"), kFresh}, 0) == Qual{v("c2"), kFresh});
        CHECK(qtransN(alias, {v("c2")}, 1) == closureOracle(alias, {v("c2")}));
        CHECK(qtransN(alias, {v("c2")}, 1) == Qual{v("a"), v("c2")});

        ReachEnv cyc;
        cyc.bind(v("x"), {v("y")});
        cyc.bind(v("y"), {v("x")});
        CHECK(qtransN(cyc, {v("x")}, 5) == closureOracle(cyc, {v("x")}));

        ReachEnv chain;
        chain.bind(v("a"), {});
        chain.bind(v("b"), {v("a")});
        chain.bind(v("c"), {v("b")});
        CHECK(qtrans(chain, {v("c")}) == closureOracle(chain, {v("c")}));
        CHECK(qtrans(chain, {v("c")}) == Qual{v("a"), v("b"), v("c")});

        ReachEnv self;
        self.bind(v("x"), {v("x")});
        CHECK(qtrans(self, {v("x")}) == Qual{v("x")});
        CHECK(qtrans(ReachEnv{}, {v("q"), kFresh}) == Qual{v("q"), kFresh});
    }

    TEST_CASE("saturation and overlap on fixed environments") {
        CHECK(saturatedProp(ReachEnv{}, {v("q")}));
        CHECK(saturatedDet(ReachEnv{}, {v("q")}));

        ReachEnv alias;
        alias.bind(v("a"), {});
        alias.bind(v("c2"), {v("a")});
        CHECK_FALSE(saturatedProp(alias, {v("c2")}));
        CHECK_FALSE(saturatedDet(alias, {v("c2")}));
        CHECK(saturatedProp(alias, {v("c2"), v("a")}));
        CHECK(saturatedDet(alias, {v("c2"), v("a")}));

        CHECK(overlap(alias, {v("a")}, {v("z")}) == Qual{kFresh});

        ReachEnv shared;
        shared.bind(v("i"), {});
        shared.bind(v("c1"), {v("i")});
        shared.bind(v("c2"), {v("i")});
        CHECK(overlap(shared, {v("c1")}, {v("c2")}) == Qual{v("i"), kFresh});
    }

    TEST_CASE("cardinality and singletons on fixed environments") {
        CHECK(cardinality(ReachEnv{}, {v("a")}) == 0);
        ReachEnv ab;
        ab.bind(v("a"), {});
        ab.bind(v("b"), {});
        CHECK(cardinality(ab, {v("a")}) == 1);
        ab.bind(v("c"), {});
        CHECK(cardinality(ab, {v("a"), v("c"), v("zunbound")}) == 2);

        CHECK(isSingletonOrEmpty({v("x")}));
        CHECK(isSingletonOrEmpty({l(3)}));
        CHECK(isSingletonOrEmpty({}));
        CHECK_FALSE(isSingletonOrEmpty({v("x"), v("y")}));
        CHECK_FALSE(isSingletonOrEmpty({kFresh}));
    }

    TEST_CASE("lemma suite: full lookup matches the closure oracle") {
        std::mt19937_64 rng(101);
        for (int i = 0; i < kInstances; ++i) {
            Instance in = randomEnv(rng);
            Qual q = randomQual(rng, in);
            REQUIRE(qtrans(in.env, q) == closureOracle(in.env, q));
        }
    }

    TEST_CASE("lemma suite: propositional and deterministic saturation agree") {
        std::mt19937_64 rng(102);
        int saturated = 0;
        for (int i = 0; i < kInstances; ++i) {
            Instance in = randomEnv(rng);
            // Bias towards saturated sets by closing some of them.
            Qual q = randomQual(rng, in);
            if (i % 2) q = closureOracle(in.env, q);
            bool prop = saturatedProp(in.env, q), det = saturatedDet(in.env, q);
            REQUIRE(prop == det);
            REQUIRE(det == (closureOracle(in.env, q) == q));
            saturated += det;
        }
        CHECK(saturated >= kInstances / 2);
        CHECK(saturated < kInstances);
    }

    TEST_CASE("lemma suite: lookup is stable once fuel reaches the environment size") {
        std::mt19937_64 rng(103);
        for (int i = 0; i < kInstances; ++i) {
            Instance in = randomEnv(rng);
            Qual q = randomQual(rng, in);
            Qual full = closureOracle(in.env, q);
            std::size_t n = in.env.size();
            for (std::size_t extra : {0u, 1u, 3u, 17u}) REQUIRE(qtransN(in.env, q, n + extra) == full);
            // Fewer steps never overshoot.
            for (std::size_t k = 0; k < n; ++k) REQUIRE(qsubset(qtransN(in.env, q, k), full));
        }
    }

    TEST_CASE("lemma suite: lookup is extensive, monotone and idempotent") {
        std::mt19937_64 rng(104);
        for (int i = 0; i < kInstances; ++i) {
            Instance in = randomEnv(rng);
            Qual p = randomQual(rng, in, 0.2);
            Qual q = qunion(p, randomQual(rng, in, 0.2));
            Qual tp = qtrans(in.env, p), tq = qtrans(in.env, q);
            REQUIRE(qsubset(p, tp));
            REQUIRE(qsubset(tp, tq));
            REQUIRE(qtrans(in.env, tq) == tq);
            for (std::size_t k = 0; k < 4; ++k) REQUIRE(qsubset(p, qtransN(in.env, p, k)));
        }
    }

    TEST_CASE("lemma suite: cardinality monotone, bounded, and zero implies saturated") {
        std::mt19937_64 rng(105);
        int zeros = 0;
        for (int i = 0; i < kInstances; ++i) {
            Instance in = randomEnv(rng);
            Qual p = randomQual(rng, in, 0.2);
            Qual q = qunion(p, randomQual(rng, in, 0.2));
            std::size_t cp = cardinality(in.env, p), cq = cardinality(in.env, q);
            REQUIRE(cp == cardinalityOracle(in.env, p, in.env.size()));
            REQUIRE(cp <= cq);
            REQUIRE(cq <= in.env.size());
            if (cp == 0) {
                ++zeros;
                REQUIRE(saturatedDet(in.env, p));
            }
        }
        CHECK(zeros > 0);
    }

    TEST_CASE("lemma suite: lookup after substitution stays within the substituted lookup") {
        // Environment G, x : T^q with x fresh for G. The argument qualifier is
        // either q itself, a single location, or q grown by locations.
        std::mt19937_64 rng(106);
        int nontrivial = 0;
        for (int i = 0; i < kInstances; ++i) {
            Instance in = randomEnv(rng, false);
            std::vector<Atom> earlier(in.universe.begin(), in.universe.end() - 1);
            std::bernoulli_distribution pick(0.35);
            Qual q;
            for (const auto& a : earlier)
                if (pick(rng)) q.insert(a);
            ReachEnv ext = in.env;
            ext.bind(v("xs"), q);

            Qual p;
            switch (i % 3) {
                case 0: p = q; break;
                case 1: p = {l(i % 5)}; break;
                default: p = qunion(q, {l(1), l(2)}); break;
            }
            Qual r;
            for (const auto& a : earlier)
                if (pick(rng)) r.insert(a);
            if (i % 4 != 0) r.insert(v("xs"));

            Qual lhs = qtrans(in.env, substQual(r, "xs", p));
            Qual rhs = substQual(qtrans(ext, r), "xs", p);
            REQUIRE(qsubset(lhs, rhs));
            // Same statement with the independent closure.
            REQUIRE(qsubset(closureOracle(in.env, substQual(r, "xs", p)), substQual(closureOracle(ext, r), "xs", p)));
            nontrivial += lhs != substQual(r, "xs", p);
        }
        CHECK(nontrivial > kInstances / 10);
    }

    TEST_CASE("overlap is symmetric and always contains the fresh marker") {
        std::mt19937_64 rng(107);
        for (int i = 0; i < kInstances; ++i) {
            Instance in = randomEnv(rng);
            Qual p = randomQual(rng, in), q = randomQual(rng, in);
            Qual o = overlap(in.env, p, q);
            REQUIRE(o == overlap(in.env, q, p));
            REQUIRE(o.count(kFresh));
            Qual expect = qintersect(closureOracle(in.env, p), closureOracle(in.env, q));
            expect.insert(kFresh);
            REQUIRE(o == expect);
        }
    }
}
