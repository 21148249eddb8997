#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tutor/model/expression.hpp"

namespace tutor::codec {

/// Raised by parse_expression; `offset` is the byte position of the problem.
class ExpressionSyntaxError : public std::runtime_error {
 public:
  ExpressionSyntaxError(std::size_t offset, const std::string& message)
      : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Recursive-descent parser for the embedded expression language.
///
/// Precedence, loosest first: assignment (= += -= *= /= %=, right
/// associative), ||, &&, comparisons (< <= > >= == !=), + -, * / %, prefix
/// unary (- ! * & ++ --), postfix (call, [], ., ->, ++ --). All binary levels
/// associate to the left. Trees deeper than model::kMaxExprDepth are rejected.
model::Expr parse_expression(std::string_view source);

/// Canonical spelling with the minimum parentheses needed to reparse into
/// an equal tree.
std::string print_expression(const model::Expr& expr);

/// C escape handling shared with the printer.
std::string escape_c_string(std::string_view raw);

}  // namespace tutor::codec
