#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tutor::model {

enum class ExprKind {
  IntLit,
  FloatLit,
  CharLit,
  StringLit,
  Var,
  Unary,      // text: "-" or "!"
  Binary,     // text: operator spelling
  Assign,     // text: "=", "+=", "-=", "*=", "/=", "%="; operands: target, value
  IncDec,     // text: "++" or "--"; prefix flag
  Call,       // text: callee; operands: arguments
  AddressOf,
  Deref,
  Index,      // operands: base, index
  Member,     // text: field name; operands: base; arrow flag for "->"
};

std::string_view expr_kind_name(ExprKind kind);

/// Expression tree node. `offset` is the byte position of the node in the
/// source text it was parsed from; it identifies the node in diagnostics and
/// is ignored by equality.
struct Expr {
  ExprKind kind = ExprKind::IntLit;
  std::string text;
  std::int64_t int_value = 0;
  double float_value = 0.0;
  bool flag = false;  // Member: arrow access; IncDec: prefix form
  std::vector<Expr> operands;
  std::size_t offset = 0;

  static Expr int_lit(std::int64_t v, std::size_t at = 0);
  static Expr float_lit(double v, std::size_t at = 0);
  static Expr char_lit(char c, std::size_t at = 0);
  static Expr string_lit(std::string s, std::size_t at = 0);
  static Expr var(std::string name, std::size_t at = 0);
  static Expr unary(std::string op, Expr operand, std::size_t at = 0);
  static Expr binary(std::string op, Expr lhs, Expr rhs, std::size_t at = 0);
  static Expr assign(std::string op, Expr target, Expr value, std::size_t at = 0);
  static Expr inc_dec(std::string op, bool prefix, Expr target, std::size_t at = 0);
  static Expr call(std::string callee, std::vector<Expr> args, std::size_t at = 0);
  static Expr address_of(Expr operand, std::size_t at = 0);
  static Expr deref(Expr operand, std::size_t at = 0);
  static Expr index(Expr base, Expr idx, std::size_t at = 0);
  static Expr member(Expr base, std::string field, bool arrow, std::size_t at = 0);

  /// Height of the tree; a lone literal has depth 1.
  std::size_t depth() const;
  bool is_lvalue() const;

  friend bool operator==(const Expr& a, const Expr& b);
};

/// Visits every node in pre-order.
template <typename F>
void for_each_node(const Expr& e, F&& f) {
  f(e);
  for (const Expr& child : e.operands) for_each_node(child, f);
}

bool is_identifier(std::string_view text);

}  // namespace tutor::model
