#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "noether/expr.hpp"

namespace noether {

struct ParseOptions {
    bool allow_costate = false;      // psi0, psi1..psin
    bool allow_control_dot = false;  // du1..dur
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& message() const { return message_; }

private:
    std::string message_;
    int line_;
    int column_;
};

// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          exponent must fold to an integer
//   primary := number | symbol | fn '(' expr ')' | '(' expr ')'
// Symbols: t, x<i>, u<j>, p<j>, dp<j>, ddp<j>, p<j>^(q), psi0, psi<i>, du<j>.
Expr parse(std::string_view text, const Dimensions& dims, const ParseOptions& options = {});

}  // namespace noether
