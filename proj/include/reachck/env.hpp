#pragma once

#include "reachck/diag.hpp"
#include "reachck/qualifier.hpp"
#include "reachck/syntax.hpp"

#include <map>
#include <memory>

namespace reachck {

struct StoreEntry {
    std::string binder;  // cycle binder, "" when absent
    QType referent;

    bool cyclic() const { return !binder.empty() && qhasVar(referent.q, binder); }
};

using StoreTyping = std::map<std::size_t, StoreEntry>;

struct Binding {
    enum class Kind { Term, Type };
    Kind kind = Kind::Term;
    std::string name;   // term variable, or type variable for Type
    std::string qvar;   // qualifier variable of a type binding
    QType q;            // declared type, or the bound for Type
};

// Persistent, append-only typing context. Copies share structure.
class Context {
public:
    Context() = default;

    // Store typing consulted for location atoms; may be null.
    Context withStore(const StoreTyping* st) const;
    const StoreTyping* store() const { return store_; }

    Context withTerm(const std::string& x, QType q) const;
    Context withType(const std::string& X, const std::string& x, QType bound) const;

    // Rightmost binding whose term name (or qualifier variable) is x.
    const Binding* lookupQualVar(const std::string& x) const;
    const Binding* lookupTerm(const std::string& x) const;
    const Binding* lookupTypeVar(const std::string& X) const;
    // Declared qualifier of a qualifier variable (term binding or type bound).
    const Qual* declaredQual(const std::string& x) const;

    std::vector<Binding> bindings() const;  // oldest first
    std::size_t size() const { return size_; }
    ReachEnv reachEnv() const;
    std::set<std::string> domain() const;

private:
    struct Node {
        Binding b;
        std::shared_ptr<const Node> parent;
    };
    std::shared_ptr<const Node> head_;
    std::size_t size_ = 0;
    const std::map<std::size_t, StoreEntry>* store_ = nullptr;
};

// Store typing viewed as a reach environment over location keys.
ReachEnv storeReachEnv(const StoreTyping& st);
Qual storeDomain(const StoreTyping& st);

// Referent qualifier of an entry with the cycle binder replaced by its own
// location.
Qual referentAt(std::size_t loc, const StoreEntry& e);
QType referentQTypeAt(std::size_t loc, const StoreEntry& e);

struct Store {
    std::map<std::size_t, TermP> cells;
    std::size_t next = 0;

    std::size_t alloc(TermP v);
    Qual domain() const;
    Store restrict(const Qual& phi) const;
};

// Term-variable lookup filtered by the observation.
QType lookupVar(const Context& g, const Qual& phi, const std::string& x, Span sp = {});

bool wfStoreTyping(const StoreTyping& st);

}  // namespace reachck
