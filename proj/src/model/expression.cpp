#include "tutor/model/expression.hpp"

#include <algorithm>
#include <cctype>

namespace tutor::model {

std::string_view expr_kind_name(ExprKind kind) {
  switch (kind) {
    case ExprKind::IntLit: return "int_literal";
    case ExprKind::FloatLit: return "float_literal";
    case ExprKind::CharLit: return "char_literal";
    case ExprKind::StringLit: return "string_literal";
    case ExprKind::Var: return "variable";
    case ExprKind::Unary: return "unary";
    case ExprKind::Binary: return "binary";
    case ExprKind::Assign: return "assign";
    case ExprKind::IncDec: return "incdec";
    case ExprKind::Call: return "call";
    case ExprKind::AddressOf: return "address_of";
    case ExprKind::Deref: return "deref";
    case ExprKind::Index: return "index";
    case ExprKind::Member: return "member";
  }
  return "?";
}

namespace {

Expr make(ExprKind kind, std::size_t at) {
  Expr e;
  e.kind = kind;
  e.offset = at;
  return e;
}

}  // namespace

Expr Expr::int_lit(std::int64_t v, std::size_t at) {
  Expr e = make(ExprKind::IntLit, at);
  e.int_value = v;
  return e;
}

Expr Expr::float_lit(double v, std::size_t at) {
  Expr e = make(ExprKind::FloatLit, at);
  e.float_value = v;
  return e;
}

Expr Expr::char_lit(char c, std::size_t at) {
  Expr e = make(ExprKind::CharLit, at);
  e.int_value = c;
  return e;
}

Expr Expr::string_lit(std::string s, std::size_t at) {
  Expr e = make(ExprKind::StringLit, at);
  e.text = std::move(s);
  return e;
}

Expr Expr::var(std::string name, std::size_t at) {
  Expr e = make(ExprKind::Var, at);
  e.text = std::move(name);
  return e;
}

Expr Expr::unary(std::string op, Expr operand, std::size_t at) {
  Expr e = make(ExprKind::Unary, at);
  e.text = std::move(op);
  e.operands.push_back(std::move(operand));
  return e;
}

Expr Expr::binary(std::string op, Expr lhs, Expr rhs, std::size_t at) {
  Expr e = make(ExprKind::Binary, at);
  e.text = std::move(op);
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

Expr Expr::assign(std::string op, Expr target, Expr value, std::size_t at) {
  Expr e = make(ExprKind::Assign, at);
  e.text = std::move(op);
  e.operands.push_back(std::move(target));
  e.operands.push_back(std::move(value));
  return e;
}

Expr Expr::inc_dec(std::string op, bool prefix, Expr target, std::size_t at) {
  Expr e = make(ExprKind::IncDec, at);
  e.text = std::move(op);
  e.flag = prefix;
  e.operands.push_back(std::move(target));
  return e;
}

Expr Expr::call(std::string callee, std::vector<Expr> args, std::size_t at) {
  Expr e = make(ExprKind::Call, at);
  e.text = std::move(callee);
  e.operands = std::move(args);
  return e;
}

Expr Expr::address_of(Expr operand, std::size_t at) {
  Expr e = make(ExprKind::AddressOf, at);
  e.operands.push_back(std::move(operand));
  return e;
}

Expr Expr::deref(Expr operand, std::size_t at) {
  Expr e = make(ExprKind::Deref, at);
  e.operands.push_back(std::move(operand));
  return e;
}

Expr Expr::index(Expr base, Expr idx, std::size_t at) {
  Expr e = make(ExprKind::Index, at);
  e.operands.push_back(std::move(base));
  e.operands.push_back(std::move(idx));
  return e;
}

Expr Expr::member(Expr base, std::string field, bool arrow, std::size_t at) {
  Expr e = make(ExprKind::Member, at);
  e.text = std::move(field);
  e.flag = arrow;
  e.operands.push_back(std::move(base));
  return e;
}

std::size_t Expr::depth() const {
  std::size_t deepest = 0;
  for (const Expr& child : operands) deepest = std::max(deepest, child.depth());
  return deepest + 1;
}

bool Expr::is_lvalue() const {
  switch (kind) {
    case ExprKind::Var:
    case ExprKind::Deref:
    case ExprKind::Index:
      return true;
    case ExprKind::Member:
      return flag || operands.front().is_lvalue();
    default:
      return false;
  }
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.text != b.text || a.flag != b.flag) return false;
  if (a.kind == ExprKind::FloatLit) {
    if (a.float_value != b.float_value) return false;
  } else if (a.int_value != b.int_value) {
    return false;
  }
  return a.operands == b.operands;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(text.front())) || text.front() == '_')) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

}  // namespace tutor::model
