#pragma once

#include "reachck/syntax.hpp"

#include <utility>
#include <vector>

namespace reachck {

// Ordered view of declared qualifiers. Keys are Var atoms for context
// bindings and Loc atoms for store-typing entries. Later entries shadow.
struct ReachEnv {
    std::vector<std::pair<Atom, Qual>> entries;

    void bind(Atom key, Qual declared) { entries.emplace_back(std::move(key), std::move(declared)); }
    std::size_t size() const { return entries.size(); }
    const Qual* lookup(const Atom& key) const;
};

// One-step reachability: atoms of the declared qualifier of the same sort as
// the key (variables reach variables, locations reach locations).
Qual varReach(const ReachEnv& env, const Atom& x);
Qual varReach(const ReachEnv& env, const std::string& x);

Qual qtransN(const ReachEnv& env, const Qual& q, std::size_t n);
Qual qtrans(const ReachEnv& env, const Qual& q);

bool saturatedProp(const ReachEnv& env, const Qual& q);
bool saturatedDet(const ReachEnv& env, const Qual& q);

Qual overlap(const ReachEnv& env, const Qual& p, const Qual& q);

std::size_t cardinality(const ReachEnv& env, const Qual& q);

bool isSingletonOrEmpty(const Qual& q);
bool containsFresh(const Qual& q);

}  // namespace reachck
