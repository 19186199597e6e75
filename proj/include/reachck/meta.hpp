#pragma once

#include "reachck/eval.hpp"
#include "reachck/typecheck.hpp"

#include <random>

namespace reachck {

struct StepVerdict {
    std::size_t step = 0;
    std::string rule;
    bool ok = true;
    Qual newLocs;   // locations allocated by this step
    Qual growth;    // atoms of the new qualifier not covered by the old one
    std::string detail;
};

struct OracleReport {
    std::string program;
    std::size_t steps = 0;
    bool ok = true;
    bool reachedValue = false;
    bool exhausted = false;
    std::vector<StepVerdict> verdicts;
    std::string failure;
    // Replay snapshot of the configuration where the failure occurred.
    TermP witnessTerm;
    Store witnessStore;
    StoreTyping witnessSigma;
    Qual witnessPhi;
};

// Preservation and progress along one trace. The starting configuration is
// typed under the full store domain.
OracleReport preservationCheck(const TermP& t, const StoreTyping& st, const Store& s, std::size_t fuel);
OracleReport preservationCheck(const TermP& t, std::size_t fuel);

bool progressCheck(const TermP& t, const StoreTyping& st, const Qual& phi, const Store& s, std::string* why = nullptr);

struct PairVerdict {
    bool precondition = false;
    bool ok = false;
    Qual p1, p2;
    std::string detail;
};

PairVerdict separationCheck(const TermP& t1, const TermP& t2, const StoreTyping& st, const Store& s);
PairVerdict parallelCheck(const TermP& t1, const TermP& t2, const StoreTyping& st, const Store& s, const Qual& phi1,
                          const Qual& phi2);

// Store typing after a step: the allocation site's recorded referent, or the
// stored value's synthesized type when the site was not recorded.
StoreTyping extendStoreTyping(const StoreTyping& st, const StepResult& r, const Checker& c);

// Offset added to the second reducer's allocation counter in parallelCheck.
constexpr std::size_t kParallelOffset = std::size_t{1} << 20;

// Random closed programs that pass the checker.
std::string genProgramText(std::mt19937_64& rng, std::size_t size);
TermP genWellTyped(std::mt19937_64& rng, std::size_t size);

struct PairInstance {
    TermP t1, t2;
    StoreTyping st;
    Store s;
    Qual phi1, phi2;
};

PairInstance genDisjointPair(std::mt19937_64& rng);
// Two-block parallel scenario over four references.
PairInstance parallelCaseStudy();

}  // namespace reachck
