#pragma once

#include "reachck/env.hpp"
#include "reachck/subtype.hpp"

#include <map>
#include <vector>

namespace reachck {

// Bidirectional checker. Holds the store typing used for location typing and
// records side information gathered while checking.
class Checker {
public:
    explicit Checker(const StoreTyping* st = nullptr) : st_(st) {}

    QType synth(const Context& g, const Qual& phi, const TermP& t);
    // Checking mode: synthesize, then view at Q.ty and compare qualifiers.
    QType check(const Context& g, const Qual& phi, const TermP& t, const QType& q);

    // Referent chosen for each allocation site (keyed by node identity).
    std::map<const Term*, StoreEntry> refDecisions;

    struct LetRecord {
        std::string name;
        QType declared;
    };
    // Let bindings in source order, keyed by the let node.
    std::vector<const Term*> letOrder;
    std::map<const Term*, LetRecord> lets;

private:
    const StoreTyping* st_;

    QType synthLet(const Context& g, const Qual& phi, const TermP& t, const TypeP* expected);
    QType synthAbs(const Context& g, const Qual& phi, const TermP& t, const std::optional<QType>& domOverride);
    QType synthTAbs(const Context& g, const Qual& phi, const TermP& t);
    QType synthApp(const Context& g, const Qual& phi, const TermP& t);
    QType synthTApp(const Context& g, const Qual& phi, const TermP& t);
    QType synthAssign(const Context& g, const Qual& phi, const TermP& t);
    QType synthDeref(const Context& g, const Qual& phi, const TermP& t);
    QType synthLoc(const Context& g, const Qual& phi, const TermP& t);

    Qual synthAgainst(const Context& g, const Qual& phi, const TermP& t, const TypeP& target);
    std::optional<Qual> refNewChecked(const Context& g, const Qual& phi, const TermP& t, const TypeP& target);
    void checkAt(const Context& g, const Qual& phi, const TermP& t, const QType& q, ErrorKind qualFail);

    void checkScoped(const Context& g, const QType& q, const std::set<std::string>& extra, Span sp) const;
    void record(const TermP& t, StoreEntry e) { refDecisions[t.get()] = std::move(e); }
};

// Closed program under empty contexts and store typing.
QType typecheckProgram(const TermP& t);

// Runtime typing: empty context, observation phi, store typing st.
QType typecheckRuntime(const TermP& t, const StoreTyping& st, const Qual& phi, Checker* out = nullptr);

// Per-location value typing of a runtime store against its store typing.
bool wfStore(const StoreTyping& st, const Qual& phi, const Store& s, std::string* why = nullptr);

}  // namespace reachck
