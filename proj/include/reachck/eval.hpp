#pragma once

#include "reachck/env.hpp"

#include <functional>
#include <optional>

namespace reachck {

struct StepResult {
    enum class Kind { Stepped, AlreadyValue, Stuck };
    Kind kind = Kind::Stuck;
    TermP term;
    Store store;
    std::string rule;                       // name of the contraction fired
    std::optional<std::size_t> allocated;   // location created by this step
    const Term* allocSite = nullptr;        // the ref node that allocated
    std::string reason;                     // why evaluation is stuck
};

StepResult step(const TermP& t, const Store& s);

struct EvalResult {
    TermP term;
    Store store;
    std::size_t steps = 0;
    bool exhausted = false;
    bool stuck = false;
    std::string reason;
};

using StepHook = std::function<void(std::size_t, const StepResult&)>;

EvalResult evalFuel(const TermP& t, std::size_t fuel, Store init = {}, const StepHook& hook = {});

}  // namespace reachck
