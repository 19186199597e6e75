#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace reachck {

using Nat = boost::multiprecision::cpp_int;

// Qualifier atoms. Ordering puts variables first, then locations, then the
// freshness marker, which is also the printing order.
struct Atom {
    enum class Kind : unsigned char { Var, Loc, Fresh };
    Kind kind = Kind::Fresh;
    std::string name;
    std::size_t loc = 0;

    static Atom var(std::string n) { return Atom{Kind::Var, std::move(n), 0}; }
    static Atom location(std::size_t l) { return Atom{Kind::Loc, {}, l}; }
    static Atom fresh() { return Atom{Kind::Fresh, {}, 0}; }

    bool isVar() const { return kind == Kind::Var; }
    bool isLoc() const { return kind == Kind::Loc; }
    bool isFresh() const { return kind == Kind::Fresh; }

    auto operator<=>(const Atom&) const = default;
    bool operator==(const Atom&) const = default;
};

using Qual = std::set<Atom>;

Qual qualOf(std::initializer_list<Atom> atoms);
Qual qunion(const Qual& a, const Qual& b);
Qual qintersect(const Qual& a, const Qual& b);
Qual qminus(const Qual& a, const Qual& b);
Qual qwithout(const Qual& a, const Atom& x);
bool qsubset(const Qual& a, const Qual& b);
bool qhas(const Qual& q, const Atom& a);
bool qhasVar(const Qual& q, const std::string& x);
std::string printAtom(const Atom& a);
std::string printQual(const Qual& q);

struct Span {
    int startLine = 0, startCol = 0, endLine = 0, endCol = 0;
    bool operator==(const Span&) const = default;
};

struct Type;
using TypeP = std::shared_ptr<const Type>;

struct QType {
    TypeP ty;
    Qual q;
};

enum class TypeKind { Unit, Nat, Bool, Top, Bot, TVar, Fun, All, Ref };

// Fun: self f, param x, a = domain, b = codomain (f and x scope over b only).
// All: self f, tparam X, param x (qualifier variable of X), a = bound, b = body.
// Ref: self = cycle binder ("" when anonymous), a = write, b = read; both
// components are in the binder's scope.
struct Type {
    TypeKind kind = TypeKind::Unit;
    std::string self;
    std::string param;
    std::string tparam;  // TVar name or All's type parameter
    QType a, b;
};


TypeP tUnit();
TypeP tNat();
TypeP tBool();
TypeP tTop();
TypeP tBot();
TypeP tVar(std::string name);
TypeP tFun(std::string f, std::string x, QType dom, QType cod);
TypeP tAll(std::string f, std::string X, std::string x, QType bound, QType body);
TypeP tRef(std::string z, QType write, QType read);
TypeP tRef(QType both);  // non-cyclic plain reference

bool isBase(const Type& t);

// Free qualifier variables (Var atoms not captured by a binder).
std::set<std::string> freeVars(const TypeP& t);
std::set<std::string> freeVars(const QType& q);
std::set<std::string> freeTypeVars(const TypeP& t);
Qual freeLocs(const TypeP& t);

// Fresh identifier derived from a base name; never collides with parsed names
// because the suffix uses a counter shared by the process.
std::string freshName(const std::string& base);

// [p/x] on every qualifier position; binders named x shield their scope and
// binders that would capture an atom of p are renamed.
TypeP substQualInType(const TypeP& t, const std::string& x, const Qual& p);
QType substQualInQType(const QType& q, const std::string& x, const Qual& p);
Qual substQual(const Qual& q, const std::string& x, const Qual& p);
// Simultaneous substitution of several qualifier variables.
TypeP substQualsInType(const TypeP& t, const std::map<std::string, Qual>& s);
QType substQualsInQType(const QType& q, const std::map<std::string, Qual>& s);
Qual substQuals(const Qual& q, const std::map<std::string, Qual>& s);
// [T/X] on type variables.
TypeP substTypeVar(const TypeP& t, const std::string& X, const TypeP& by);
// Location substitution used when a binder stands for its own location.
Qual substFreshQual(const Qual& q, const Qual& p);

bool alphaEq(const TypeP& a, const TypeP& b);
bool alphaEq(const QType& a, const QType& b);

std::string printType(const TypeP& t);
std::string printQType(const QType& q);

// ---------------------------------------------------------------- terms

struct Term;
using TermP = std::shared_ptr<const Term>;

enum class TermKind {
    Unit, NatLit, BoolLit, Var, Abs, App, RefNew, Deref, Assign,
    TAbs, TApp, Loc, Succ, Pred, Mul, IsZero, If, Ascribe
};

// Abs: name = self, param = x, dom/cod annotations, t1 = body. A let is an
// App whose head is an Abs with isLet set (empty self, cod absent).
// TAbs: name = self, tparam = X, param = x, dom = bound, t1 = body.
// TApp / Ascribe: dom holds the qualified type argument.
struct Term {
    TermKind kind = TermKind::Unit;
    Span span;
    std::string name;
    std::string param;
    std::string tparam;
    std::optional<QType> dom, cod;
    bool isLet = false;
    Nat nat = 0;
    bool boolean = false;
    std::size_t loc = 0;
    TermP t1, t2, t3;
};

TermP mkUnit(Span s = {});
TermP mkNat(Nat n, Span s = {});
TermP mkBool(bool b, Span s = {});
TermP mkVar(std::string x, Span s = {});
TermP mkAbs(std::string f, std::string x, std::optional<QType> dom, std::optional<QType> cod, TermP body, Span s = {});
TermP mkLet(std::string x, std::optional<QType> ann, TermP bound, TermP body, Span s = {});
TermP mkApp(TermP f, TermP a, Span s = {});
TermP mkRefNew(TermP t, Span s = {});
TermP mkDeref(TermP t, Span s = {});
TermP mkAssign(TermP l, TermP r, Span s = {});
TermP mkTAbs(std::string f, std::string X, std::string x, QType bound, TermP body, Span s = {});
TermP mkTApp(TermP t, QType arg, Span s = {});
TermP mkLoc(std::size_t l, Span s = {});
TermP mkSucc(TermP t, Span s = {});
TermP mkPred(TermP t, Span s = {});
TermP mkMul(TermP a, TermP b, Span s = {});
TermP mkIsZero(TermP t, Span s = {});
TermP mkIf(TermP c, TermP a, TermP b, Span s = {});
TermP mkAscribe(TermP t, QType q, Span s = {});

bool isValue(const TermP& t);
bool isLetApp(const TermP& t);

// Free term variables plus free qualifier variables of annotations.
std::set<std::string> freeVars(const TermP& t);
std::set<std::string> freeTypeVars(const TermP& t);
Qual freeLocs(const TermP& t);
// Free Var atoms and Loc atoms together, as a qualifier.
Qual freeAtoms(const TermP& t);

// Qualifier a value contributes when substituted for a variable: {l} for a
// location, its free atoms for abstractions, nothing for constants.
Qual valueQual(const TermP& v);

// t[v/x]; qualifier occurrences of x in annotations become valueQual(v).
TermP substTermVar(const TermP& t, const std::string& x, const TermP& v);
TermP substTermVarQ(const TermP& t, const std::string& x, const TermP& v, const Qual& vq);
// Type application: t[T^p / X^x].
TermP substTypeInTerm(const TermP& t, const std::string& X, const std::string& x, const QType& arg);

bool alphaEqTerm(const TermP& a, const TermP& b);

std::string printTerm(const TermP& t);

}  // namespace reachck
