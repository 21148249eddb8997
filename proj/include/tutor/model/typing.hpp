#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/model/data_type.hpp"
#include "tutor/model/expression.hpp"
#include "tutor/model/program.hpp"

namespace tutor::model {

struct FunctionSig {
  DataType return_type;
  std::vector<DataType> params;
  /// Header that declares a library function; empty for user functions.
  std::string header;
};

/// Program-wide names: struct layouts and callable functions.
struct Symbols {
  std::map<std::string, std::vector<Param>, std::less<>> structs;
  std::map<std::string, FunctionSig, std::less<>> functions;

  /// Collects struct and function definitions of `program`. Library
  /// functions are not included; see library_function().
  static std::shared_ptr<const Symbols> of(const Program& program);
};

/// Library functions the teaching language understands (math.h, string.h,
/// ctype.h, stdlib.h subsets).
const FunctionSig* library_function(std::string_view name);
const std::map<std::string, FunctionSig, std::less<>>& library_functions();

/// Variables visible at a program point.
class Scope {
 public:
  Scope();
  explicit Scope(std::shared_ptr<const Symbols> symbols);

  void declare(const std::string& name, DataType type);
  /// Variable type; falls back to the built-in NULL constant.
  const DataType* lookup(std::string_view name) const;
  /// User function first, then library function.
  const FunctionSig* function(std::string_view name) const;
  const std::vector<Param>* struct_fields(std::string_view name) const;

  const std::map<std::string, DataType, std::less<>>& variables() const { return vars_; }
  const Symbols& symbols() const { return *symbols_; }

 private:
  std::shared_ptr<const Symbols> symbols_;
  std::map<std::string, DataType, std::less<>> vars_;
};

class TypeError : public std::runtime_error {
 public:
  enum class Code { UnboundVariable, TypeMismatch };

  static TypeError unbound(const std::string& name, std::size_t offset, ExprKind node);
  static TypeError mismatch(const std::string& expected, const std::string& found, std::size_t offset,
                            ExprKind node);

  Code code() const { return code_; }
  /// Unbound name, or empty for mismatches.
  const std::string& name() const { return name_; }
  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }
  /// Source offset of the offending node and its kind.
  std::size_t node_offset() const { return offset_; }
  ExprKind node_kind() const { return node_kind_; }

 private:
  TypeError(Code code, std::string message) : std::runtime_error(std::move(message)), code_(code) {}

  Code code_;
  std::string name_;
  std::string expected_;
  std::string found_;
  std::size_t offset_ = 0;
  ExprKind node_kind_ = ExprKind::IntLit;
};

/// Static type of `expr`. Throws TypeError.
DataType infer_type(const Expr& expr, const Scope& scope);

/// C-style implicit conversion check used for initialisation, assignment,
/// argument passing and return.
bool assignable(const DataType& to, const DataType& from);

/// Assignment-compatibility for rule checks: equal types, except that void*
/// matches any pointer and T[n] matches T*.
bool types_match(const DataType& a, const DataType& b);

/// Scope in effect at every block, keyed by block id. A block's own
/// declaration is not part of its scope.
class ScopeTable {
 public:
  static ScopeTable build(const Program& program);

  const Scope* at(std::string_view block_id) const;
  /// Enclosing function definition for a block, or nullptr at top level.
  const Block* function_of(std::string_view block_id) const;
  const Symbols& symbols() const { return *symbols_; }

 private:
  std::shared_ptr<const Symbols> symbols_;
  std::map<std::string, Scope, std::less<>> scopes_;
  std::map<std::string, const Block*, std::less<>> functions_;
};

struct TypeDiagnostic {
  std::string block_id;
  std::string field;
  std::string message;
};

/// Statement-level static checks (the "compile" step). Empty when the
/// program type-checks. Assumes validate_program passed.
std::vector<TypeDiagnostic> check_types(const Program& program);

}  // namespace tutor::model
