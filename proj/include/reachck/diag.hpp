#pragma once

#include "reachck/syntax.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace reachck {

enum class ErrorKind {
    UnboundVariable,
    Unobservable,
    FreshReferent,
    ReferentMismatch,
    CyclicAssigneeNotVariable,
    CyclicQualifierNotSingleton,
    SeparationViolation,
    DependentReturnEscape,
    NotAFunction,
    NotAReference,
    SubtypeFailure,
    WriteForbidden,
    ObservationEscape,
    AnnotationRequired,
    BoundViolation,
};

const char* kindName(ErrorKind k);

struct TypeErrorEx : std::runtime_error {
    ErrorKind kind;
    Span span;
    // The atom responsible for an observability failure, when there is one.
    std::optional<Atom> atom;

    TypeErrorEx(ErrorKind k, Span s, const std::string& msg, std::optional<Atom> a = std::nullopt)
        : std::runtime_error(msg), kind(k), span(s), atom(std::move(a)) {}
};

}  // namespace reachck
