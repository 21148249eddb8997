#include "tutor/model/typing.hpp"

#include <span>

namespace tutor::model {

namespace {

DataType decay(const DataType& t) { return t.is_array() ? DataType::pointer_to(t.element()) : t; }

bool is_void_pointer(const DataType& t) {
  return t.is_pointer() && t.element().kind() == DataType::Kind::Void;
}

std::string kind_text(const Expr& e) { return std::string(expr_kind_name(e.kind)); }

bool is_comparison(const std::string& op) {
  return op == "<" || op == "<=" || op == ">" || op == ">=" || op == "==" || op == "!=";
}

DataType arithmetic_result(const DataType& a, const DataType& b) {
  if (a.kind() == DataType::Kind::Float || b.kind() == DataType::Kind::Float) return DataType::floating();
  return DataType::integer();
}

class Inferrer {
 public:
  explicit Inferrer(const Scope& scope) : scope_(scope) {}

  DataType infer(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return DataType::integer();
      case ExprKind::FloatLit: return DataType::floating();
      case ExprKind::CharLit: return DataType::character();
      case ExprKind::StringLit: return DataType::pointer_to(DataType::character());
      case ExprKind::Var: {
        const DataType* t = scope_.lookup(e.text);
        if (t == nullptr) throw TypeError::unbound(e.text, e.offset, e.kind);
        return *t;
      }
      case ExprKind::Unary: return unary(e);
      case ExprKind::Binary: return binary(e);
      case ExprKind::Assign: return assign(e);
      case ExprKind::IncDec: {
        const Expr& target = e.operands[0];
        if (!target.is_lvalue()) throw TypeError::mismatch("assignable operand", kind_text(target), e.offset, e.kind);
        DataType t = infer(target);
        if (!t.is_arithmetic() && !t.is_pointer()) {
          throw TypeError::mismatch("arithmetic or pointer operand", t.to_string(), e.offset, e.kind);
        }
        return t;
      }
      case ExprKind::Call: return call(e);
      case ExprKind::AddressOf: {
        const Expr& target = e.operands[0];
        if (!target.is_lvalue()) throw TypeError::mismatch("addressable operand", kind_text(target), e.offset, e.kind);
        DataType result = DataType::pointer_to(infer(target));
        if (result.pointer_depth() > DataType::kMaxPointerDepth) {
          throw TypeError::mismatch("pointer depth <= 4", result.to_string(), e.offset, e.kind);
        }
        return result;
      }
      case ExprKind::Deref: {
        DataType t = infer(e.operands[0]);
        if ((t.is_pointer() || t.is_array()) && t.element().kind() != DataType::Kind::Void) return t.element();
        throw TypeError::mismatch("pointer", t.to_string(), e.offset, e.kind);
      }
      case ExprKind::Index: {
        DataType base = infer(e.operands[0]);
        if (!(base.is_pointer() || base.is_array()) || base.element().kind() == DataType::Kind::Void) {
          throw TypeError::mismatch("array or pointer", base.to_string(), e.offset, e.kind);
        }
        DataType idx = infer(e.operands[1]);
        if (!idx.is_integral()) throw TypeError::mismatch("int", idx.to_string(), e.offset, e.kind);
        return base.element();
      }
      case ExprKind::Member: return member(e);
    }
    throw TypeError::mismatch("expression", "unknown node", e.offset, e.kind);
  }

 private:
  DataType unary(const Expr& e) {
    DataType t = decay(infer(e.operands[0]));
    if (e.text == "!") {
      if (!t.is_scalar()) throw TypeError::mismatch("scalar operand", t.to_string(), e.offset, e.kind);
      return DataType::integer();
    }
    if (!t.is_arithmetic()) throw TypeError::mismatch("arithmetic operand", t.to_string(), e.offset, e.kind);
    return t.kind() == DataType::Kind::Float ? t : DataType::integer();
  }

  DataType binary(const Expr& e) {
    DataType l = decay(infer(e.operands[0]));
    DataType r = decay(infer(e.operands[1]));
    const std::string& op = e.text;
    auto fail = [&](const std::string& expected) -> DataType {
      throw TypeError::mismatch(expected, l.to_string() + " " + op + " " + r.to_string(), e.offset, e.kind);
    };
    if (op == "&&" || op == "||") {
      if (l.is_scalar() && r.is_scalar()) return DataType::integer();
      return fail("scalar operands");
    }
    if (is_comparison(op)) {
      if (l.is_arithmetic() && r.is_arithmetic()) return DataType::integer();
      if (l.is_pointer() && r.is_pointer() && types_match(l, r)) return DataType::integer();
      bool equality = op == "==" || op == "!=";
      bool file_vs_null = (l.kind() == DataType::Kind::FileHandle && (is_void_pointer(r) || r == l)) ||
                          (r.kind() == DataType::Kind::FileHandle && is_void_pointer(l));
      if (equality && file_vs_null) return DataType::integer();
      return fail("comparable operands");
    }
    if (op == "%") {
      if (l.is_integral() && r.is_integral()) return DataType::integer();
      return fail("integer operands");
    }
    if (l.is_arithmetic() && r.is_arithmetic()) return arithmetic_result(l, r);
    if (op == "+") {
      if (l.is_pointer() && r.is_integral() && !is_void_pointer(l)) return l;
      if (l.is_integral() && r.is_pointer() && !is_void_pointer(r)) return r;
    }
    if (op == "-") {
      if (l.is_pointer() && r.is_integral() && !is_void_pointer(l)) return l;
      if (l.is_pointer() && r.is_pointer() && l == r) return DataType::integer();
    }
    return fail("arithmetic operands");
  }

  DataType assign(const Expr& e) {
    const Expr& target = e.operands[0];
    if (!target.is_lvalue()) throw TypeError::mismatch("assignable target", kind_text(target), e.offset, e.kind);
    DataType t = infer(target);
    DataType v = infer(e.operands[1]);
    if (t.is_array()) throw TypeError::mismatch("assignable target", t.to_string(), e.offset, e.kind);
    const std::string& op = e.text;
    bool ok = false;
    if (op == "=") {
      ok = assignable(t, v);
    } else if (op == "+=" || op == "-=") {
      ok = (t.is_arithmetic() && v.is_arithmetic()) || (t.is_pointer() && v.is_integral());
    } else if (op == "*=" || op == "/=") {
      ok = t.is_arithmetic() && v.is_arithmetic();
    } else if (op == "%=") {
      ok = t.is_integral() && v.is_integral();
    }
    if (!ok) throw TypeError::mismatch(t.to_string(), v.to_string(), e.offset, e.kind);
    return t;
  }

  DataType call(const Expr& e) {
    const FunctionSig* sig = scope_.function(e.text);
    if (sig == nullptr) throw TypeError::unbound(e.text, e.offset, e.kind);
    if (sig->params.size() != e.operands.size()) {
      throw TypeError::mismatch(std::to_string(sig->params.size()) + " argument(s)",
                                std::to_string(e.operands.size()), e.offset, e.kind);
    }
    for (std::size_t i = 0; i < e.operands.size(); ++i) {
      DataType arg = infer(e.operands[i]);
      if (!assignable(sig->params[i], arg)) {
        throw TypeError::mismatch(sig->params[i].to_string(), arg.to_string(), e.offset, e.kind);
      }
    }
    return sig->return_type;
  }

  DataType member(const Expr& e) {
    DataType base = infer(e.operands[0]);
    if (e.flag) {
      if (!base.is_pointer()) throw TypeError::mismatch("pointer to struct", base.to_string(), e.offset, e.kind);
      base = base.element();
    }
    if (base.kind() != DataType::Kind::StructRef) {
      throw TypeError::mismatch("struct", base.to_string(), e.offset, e.kind);
    }
    const std::vector<Param>* fields = scope_.struct_fields(base.struct_name());
    if (fields == nullptr) throw TypeError::mismatch("defined struct", base.to_string(), e.offset, e.kind);
    for (const Param& f : *fields) {
      if (f.name == e.text) return f.type;
    }
    throw TypeError::mismatch("member of " + base.to_string(), e.text, e.offset, e.kind);
  }

  const Scope& scope_;
};

}  // namespace

TypeError TypeError::unbound(const std::string& name, std::size_t offset, ExprKind node) {
  TypeError err(Code::UnboundVariable, "'" + name + "' is not declared");
  err.name_ = name;
  err.offset_ = offset;
  err.node_kind_ = node;
  return err;
}

TypeError TypeError::mismatch(const std::string& expected, const std::string& found, std::size_t offset,
                              ExprKind node) {
  TypeError err(Code::TypeMismatch, "type mismatch: expected " + expected + ", found " + found);
  err.expected_ = expected;
  err.found_ = found;
  err.offset_ = offset;
  err.node_kind_ = node;
  return err;
}

std::shared_ptr<const Symbols> Symbols::of(const Program& program) {
  auto symbols = std::make_shared<Symbols>();
  walk_blocks(program.blocks, [&](const Block& b, std::size_t) {
    if (b.kind == BlockKind::StructDef) {
      symbols->structs.emplace(b.text("name"), b.params("fields"));
    } else if (b.kind == BlockKind::FunctionDef) {
      FunctionSig sig;
      if (const DataType* r = b.type("return_type")) sig.return_type = *r;
      for (const Param& p : b.params("params")) sig.params.push_back(p.type);
      symbols->functions.emplace(b.text("name"), std::move(sig));
    }
  });
  return symbols;
}

const std::map<std::string, FunctionSig, std::less<>>& library_functions() {
  static const std::map<std::string, FunctionSig, std::less<>> table = [] {
    const DataType f = DataType::floating();
    const DataType i = DataType::integer();
    const DataType c = DataType::character();
    const DataType str = DataType::pointer_to(c);
    std::map<std::string, FunctionSig, std::less<>> t;
    t["sqrt"] = {f, {f}, "math.h"};
    t["pow"] = {f, {f, f}, "math.h"};
    t["fabs"] = {f, {f}, "math.h"};
    t["abs"] = {i, {i}, "stdlib.h"};
    t["strlen"] = {i, {str}, "string.h"};
    t["strcmp"] = {i, {str, str}, "string.h"};
    t["toupper"] = {c, {c}, "ctype.h"};
    t["tolower"] = {c, {c}, "ctype.h"};
    return t;
  }();
  return table;
}

const FunctionSig* library_function(std::string_view name) {
  const auto& table = library_functions();
  auto it = table.find(name);
  return it == table.end() ? nullptr : &it->second;
}

Scope::Scope() : symbols_(std::make_shared<const Symbols>()) {}

Scope::Scope(std::shared_ptr<const Symbols> symbols) : symbols_(std::move(symbols)) {}

void Scope::declare(const std::string& name, DataType type) { vars_.insert_or_assign(name, std::move(type)); }

const DataType* Scope::lookup(std::string_view name) const {
  auto it = vars_.find(name);
  if (it != vars_.end()) return &it->second;
  if (name == "NULL") {
    static const DataType null_type = DataType::pointer_to(DataType::void_type());
    return &null_type;
  }
  return nullptr;
}

const FunctionSig* Scope::function(std::string_view name) const {
  auto it = symbols_->functions.find(name);
  if (it != symbols_->functions.end()) return &it->second;
  return library_function(name);
}

const std::vector<Param>* Scope::struct_fields(std::string_view name) const {
  auto it = symbols_->structs.find(name);
  return it == symbols_->structs.end() ? nullptr : &it->second;
}

DataType infer_type(const Expr& expr, const Scope& scope) { return Inferrer(scope).infer(expr); }

bool assignable(const DataType& to, const DataType& from) {
  if (to.is_arithmetic() && from.is_arithmetic()) return true;
  if (to.is_pointer()) {
    if (from.is_pointer() || from.is_array()) {
      return is_void_pointer(to) || is_void_pointer(from) || to.element() == from.element();
    }
    return false;
  }
  if (to.kind() == DataType::Kind::FileHandle) {
    return from.kind() == DataType::Kind::FileHandle || is_void_pointer(from);
  }
  if (to.is_array()) return false;
  return to == from;
}

bool types_match(const DataType& a, const DataType& b) {
  if (a == b) return true;
  bool a_ptr = a.is_pointer() || a.is_array();
  bool b_ptr = b.is_pointer() || b.is_array();
  if (a_ptr && b_ptr) {
    if (a.is_array() && b.is_array()) return false;
    return is_void_pointer(a) || is_void_pointer(b) || a.element() == b.element();
  }
  if (a.kind() == DataType::Kind::FileHandle) return is_void_pointer(b);
  if (b.kind() == DataType::Kind::FileHandle) return is_void_pointer(a);
  return false;
}

namespace {

class ScopeBuilder {
 public:
  ScopeBuilder(std::shared_ptr<const Symbols> symbols, std::map<std::string, Scope, std::less<>>& scopes,
               std::map<std::string, const Block*, std::less<>>& functions)
      : symbols_(std::move(symbols)), scopes_(scopes), functions_(functions) {}

  void walk(std::span<const Block> list, Scope scope, const Block* fn) {
    for (const Block& b : list) {
      scopes_.insert_or_assign(b.id, scope);
      if (fn != nullptr) functions_.insert_or_assign(b.id, fn);
      switch (b.kind) {
        case BlockKind::Declaration:
          if (const DataType* t = b.type("type")) scope.declare(b.text("name"), *t);
          break;
        case BlockKind::FunctionDef: {
          Scope inner = scope;
          for (const Param& p : b.params("params")) inner.declare(p.name, p.type);
          walk(b.children, std::move(inner), &b);
          break;
        }
        case BlockKind::If: {
          std::size_t split = b.children.size();
          if (auto e = b.index("else_from"); e && *e >= 0 && static_cast<std::size_t>(*e) <= split) {
            split = static_cast<std::size_t>(*e);
          }
          std::span<const Block> all(b.children);
          walk(all.subspan(0, split), scope, fn);
          walk(all.subspan(split), scope, fn);
          break;
        }
        default:
          if (!b.children.empty()) walk(b.children, scope, fn);
          break;
      }
    }
  }

 private:
  std::shared_ptr<const Symbols> symbols_;
  std::map<std::string, Scope, std::less<>>& scopes_;
  std::map<std::string, const Block*, std::less<>>& functions_;
};

}  // namespace

ScopeTable ScopeTable::build(const Program& program) {
  ScopeTable table;
  table.symbols_ = Symbols::of(program);
  ScopeBuilder builder(table.symbols_, table.scopes_, table.functions_);
  builder.walk(program.blocks, Scope(table.symbols_), nullptr);
  return table;
}

const Scope* ScopeTable::at(std::string_view block_id) const {
  auto it = scopes_.find(block_id);
  return it == scopes_.end() ? nullptr : &it->second;
}

const Block* ScopeTable::function_of(std::string_view block_id) const {
  auto it = functions_.find(block_id);
  return it == functions_.end() ? nullptr : it->second;
}

namespace {

class TypeChecker {
 public:
  explicit TypeChecker(const Program& program) : table_(ScopeTable::build(program)) {}

  std::vector<TypeDiagnostic> run(const Program& program) {
    for (const Block& b : program.blocks) {
      if (!(b.kind == BlockKind::Declaration || b.kind == BlockKind::FunctionDef ||
            b.kind == BlockKind::StructDef || b.kind == BlockKind::Preprocessor)) {
        diag(b, "", "statement outside of a function");
      }
    }
    check_list(program.blocks);
    return std::move(out_);
  }

 private:
  void diag(const Block& b, const std::string& field, const std::string& message) {
    out_.push_back(TypeDiagnostic{b.id, field, message});
  }

  std::optional<DataType> infer(const Block& b, const std::string& field, const Expr& e) {
    const Scope* scope = table_.at(b.id);
    if (scope == nullptr) return std::nullopt;
    try {
      return infer_type(e, *scope);
    } catch (const TypeError& err) {
      diag(b, field, err.what());
      return std::nullopt;
    }
  }

  std::optional<DataType> infer_field(const Block& b, const std::string& field, bool required) {
    const Expr* e = b.expr(field);
    if (e == nullptr) {
      if (required) diag(b, field, "missing expression");
      return std::nullopt;
    }
    return infer(b, field, *e);
  }

  void require_lvalue(const Block& b, const std::string& field, const Expr& e) {
    if (!e.is_lvalue()) diag(b, field, "expected an assignable location");
  }

  void check_condition(const Block& b, const std::string& field, bool required) {
    if (auto t = infer_field(b, field, required); t && !decay(*t).is_scalar()) {
      diag(b, field, "condition must be a scalar value, found " + t->to_string());
    }
  }

  void check_list(const std::vector<Block>& blocks) {
    for (const Block& b : blocks) {
      check_block(b);
      if (b.kind == BlockKind::Switch) ++switch_depth_;
      if (is_loop_kind(b.kind)) ++loop_depth_;
      check_list(b.children);
      if (b.kind == BlockKind::Switch) --switch_depth_;
      if (is_loop_kind(b.kind)) --loop_depth_;
    }
  }

  void check_block(const Block& b) {
    switch (b.kind) {
      case BlockKind::Declaration: {
        const DataType* t = b.type("type");
        if (t == nullptr) break;
        if (t->kind() == DataType::Kind::Void) diag(b, "type", "variables cannot have type void");
        if (const Expr* init = b.expr("init")) {
          if (t->is_array()) {
            diag(b, "init", "array initialisers are not supported");
          } else if (auto v = infer(b, "init", *init); v && !assignable(*t, *v)) {
            diag(b, "init", "cannot initialise " + t->to_string() + " from " + v->to_string());
          }
        }
        break;
      }
      case BlockKind::Assignment: {
        const Expr* target = b.expr("target");
        if (target == nullptr) {
          diag(b, "target", "missing expression");
          break;
        }
        require_lvalue(b, "target", *target);
        auto t = infer(b, "target", *target);
        auto v = infer_field(b, "value", true);
        if (t && t->is_array()) diag(b, "target", "arrays cannot be assigned");
        if (t && v && !assignable(*t, *v)) {
          diag(b, "value", "cannot assign " + v->to_string() + " to " + t->to_string());
        }
        break;
      }
      case BlockKind::If:
      case BlockKind::WhileLoop:
      case BlockKind::DoWhileLoop:
        check_condition(b, "cond", true);
        break;
      case BlockKind::ForLoop:
        infer_field(b, "init", false);
        check_condition(b, "cond", false);
        infer_field(b, "step", false);
        break;
      case BlockKind::Switch:
        if (auto t = infer_field(b, "subject", true); t && !t->is_integral()) {
          diag(b, "subject", "switch subject must be an integer");
        }
        break;
      case BlockKind::FunctionDef:
        for (const Param& p : b.params("params")) {
          if (p.type.kind() == DataType::Kind::Void) diag(b, "params", "parameter " + p.name + " has type void");
        }
        break;
      case BlockKind::FunctionCall: {
        const Expr* call = b.expr("call");
        if (call == nullptr || call->kind != ExprKind::Call) {
          diag(b, "call", "expected a function call");
        } else {
          infer(b, "call", *call);
        }
        break;
      }
      case BlockKind::Return: {
        const Block* fn = table_.function_of(b.id);
        if (fn == nullptr) {
          diag(b, "", "return outside of a function");
          break;
        }
        const DataType* r = fn->type("return_type");
        auto v = infer_field(b, "value", false);
        if (r == nullptr) break;
        bool void_fn = r->kind() == DataType::Kind::Void;
        if (void_fn && b.expr("value") != nullptr) diag(b, "value", "void function cannot return a value");
        if (!void_fn && b.expr("value") == nullptr) diag(b, "value", "missing return value");
        if (!void_fn && v && !assignable(*r, *v)) {
          diag(b, "value", "cannot return " + v->to_string() + " from function returning " + r->to_string());
        }
        break;
      }
      case BlockKind::MemAlloc: {
        const Expr* target = b.expr("target");
        const DataType* elem = b.type("elem_type");
        if (target == nullptr) {
          diag(b, "target", "missing expression");
        } else {
          require_lvalue(b, "target", *target);
          auto t = infer(b, "target", *target);
          if (t && elem && !(t->is_pointer() && assignable(*t, DataType::pointer_to(*elem)))) {
            diag(b, "target", "cannot store " + elem->to_string() + "* in " + t->to_string());
          }
        }
        if (auto n = infer_field(b, "count", true); n && !n->is_integral()) {
          diag(b, "count", "element count must be an integer");
        }
        break;
      }
      case BlockKind::MemFree:
        if (auto t = infer_field(b, "target", true); t && !t->is_pointer()) {
          diag(b, "target", "free needs a pointer, found " + t->to_string());
        }
        break;
      case BlockKind::FileOp: {
        auto h = infer_field(b, "handle", true);
        if (h && h->kind() != DataType::Kind::FileHandle) diag(b, "handle", "expected FILE*, found " + h->to_string());
        if (const Expr* handle = b.expr("handle"); handle && b.text("op") == "open") require_lvalue(b, "handle", *handle);
        for (const Expr& e : b.exprs("args")) infer(b, "args", e);
        for (const Expr& e : b.exprs("targets")) check_input_target(b, "targets", e);
        break;
      }
      case BlockKind::Output:
        for (const Expr& e : b.exprs("args")) infer(b, "args", e);
        break;
      case BlockKind::Input:
        for (const Expr& e : b.exprs("targets")) check_input_target(b, "targets", e);
        break;
      case BlockKind::Break:
        if (loop_depth_ == 0 && switch_depth_ == 0) diag(b, "", "break outside of a loop or switch");
        break;
      case BlockKind::Continue:
        if (loop_depth_ == 0) diag(b, "", "continue outside of a loop");
        break;
      default:
        break;
    }
  }

  void check_input_target(const Block& b, const std::string& field, const Expr& e) {
    require_lvalue(b, field, e);
    auto t = infer(b, field, e);
    if (!t) return;
    bool char_array = t->is_array() && t->element().kind() == DataType::Kind::Char;
    if (!(t->is_arithmetic() || char_array)) diag(b, field, "cannot read a value of type " + t->to_string());
  }

  ScopeTable table_;
  std::vector<TypeDiagnostic> out_;
  int loop_depth_ = 0;
  int switch_depth_ = 0;
};

}  // namespace

std::vector<TypeDiagnostic> check_types(const Program& program) { return TypeChecker(program).run(program); }

}  // namespace tutor::model
