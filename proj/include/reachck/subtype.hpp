#pragma once

#include "reachck/env.hpp"

#include <optional>

namespace reachck {

// Closure of q under the self-absorption rule: a variable in q whose declared
// qualifier is free of the fresh marker brings that qualifier along.
Qual expandTarget(const Context& g, const Qual& q);

bool subQual(const Context& g, const Qual& p, const Qual& q);
bool subType(const Context& g, const TypeP& s, const TypeP& t);
bool subQType(const Context& g, const QType& p, const QType& q);

// Smallest outer qualifier r such that P can be viewed at type T^r, allowing
// read components of references to escape into r. nullopt when no r exists.
std::optional<Qual> upcast(const Context& g, const QType& p, const TypeP& t);

// Resolve a type variable to its upper bound until a non-variable appears.
TypeP promote(const Context& g, const TypeP& t);

}  // namespace reachck
