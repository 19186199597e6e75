#include "reachck/qualifier.hpp"

namespace reachck {

const Qual* ReachEnv::lookup(const Atom& key) const {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
        if (it->first == key) return &it->second;
    return nullptr;
}

Qual varReach(const ReachEnv& env, const Atom& x) {
    const Qual* d = env.lookup(x);
    if (!d) return {};
    Qual out;
    for (const auto& a : *d)
        if (a.kind == x.kind) out.insert(a);
    return out;
}

Qual varReach(const ReachEnv& env, const std::string& x) { return varReach(env, Atom::var(x)); }

Qual qtransN(const ReachEnv& env, const Qual& q, std::size_t n) {
    Qual cur = q;
    for (std::size_t i = 0; i < n; ++i) {
        Qual next = cur;
        for (const auto& a : cur)
            if (!a.isFresh()) {
                Qual r = varReach(env, a);
                next.insert(r.begin(), r.end());
            }
        if (next == cur) break;
        cur = std::move(next);
    }
    return cur;
}

Qual qtrans(const ReachEnv& env, const Qual& q) { return qtransN(env, q, env.size()); }

bool saturatedProp(const ReachEnv& env, const Qual& q) {
    for (const auto& a : q) {
        if (a.isFresh()) continue;
        if (!qsubset(qtrans(env, Qual{a}), q)) return false;
    }
    return true;
}

bool saturatedDet(const ReachEnv& env, const Qual& q) { return qtrans(env, q) == q; }

Qual overlap(const ReachEnv& env, const Qual& p, const Qual& q) {
    Qual r = qintersect(qtrans(env, p), qtrans(env, q));
    r.insert(Atom::fresh());
    return r;
}

std::size_t cardinality(const ReachEnv& env, const Qual& q) {
    std::size_t n = 0;
    for (const auto& [k, d] : env.entries)
        if (q.count(k)) ++n;
    return n;
}

bool isSingletonOrEmpty(const Qual& q) {
    if (q.empty()) return true;
    return q.size() == 1 && !q.begin()->isFresh();
}

bool containsFresh(const Qual& q) { return q.count(Atom::fresh()) > 0; }

}  // namespace reachck
