#pragma once

#include <stdexcept>
#include <string>

#include "dcx/expr.hpp"

namespace dcx {

struct ParseError : std::runtime_error {
  size_t offset;
  ParseError(size_t off, const std::string& msg)
      : std::runtime_error(msg + " (at byte " + std::to_string(off) + ")"),
        offset(off) {}
};

// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ['^' factor]
//   atom   := number | identifier | function '(' args ')' | '(' expr ')' | '-' atom
// Identifiers t, x, u, r, w, xi are variables; all others are parameters.
// quad takes (dummy, integrand, lower [, upper]); the 3-argument form uses
// the dummy name itself as the upper limit variable.
ExprPtr parse(const std::string& source);

bool is_variable_name(const std::string& name);

}  // namespace dcx
