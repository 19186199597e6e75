#pragma once

#include "reachck/syntax.hpp"

#include <stdexcept>
#include <vector>

namespace reachck {

struct ParseError : std::runtime_error {
    Span span;
    std::vector<std::string> expected;

    ParseError(Span s, std::vector<std::string> exp, const std::string& msg)
        : std::runtime_error(msg), span(s), expected(std::move(exp)) {}
};

TermP parseProgram(const std::string& text);
QType parseQType(const std::string& text);

}  // namespace reachck
