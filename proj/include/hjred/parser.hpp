#pragma once

#include <string>

#include "hjred/expr.hpp"

namespace hjred {

/// Syntax or lookup failure with the byte offset into the input.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
          position(pos) {}
    std::size_t position;
};

/// Parses the expression grammar
///   expr     := ["-"] term (("+"|"-") term)*
///   term     := factor (("*"|"/") factor)*
///   factor   := atom ("^" exponent)?
///   atom     := NUMBER | IDENT | "(" expr ")" | "sqrt" "(" expr ")"
///   exponent := NUMBER | "(" SIGNED_RATIONAL ")"
/// where NUMBER is a decimal literal (read exactly as a rational), IDENT is
/// [A-Za-z][A-Za-z0-9_]* and must be registered in the table, and
/// SIGNED_RATIONAL looks like 3/2 or -1/2. The result is normalized;
/// parse . print . parse is a fixed point.
Expr parse(const std::string& text, const SymbolTable& table);

} // namespace hjred
