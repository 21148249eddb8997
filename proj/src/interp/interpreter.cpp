#include "tutor/interp/interpreter.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>

#include "memory.hpp"
#include "tutor/model/analysis.hpp"
#include "tutor/model/typing.hpp"

namespace tutor::interp {

using model::Block;
using model::BlockKind;
using model::DataType;
using model::Expr;
using model::ExprKind;

namespace {

constexpr int kMaxCallDepth = 256;
constexpr std::size_t kMaxFileBytes = std::size_t{1} << 20;

using Kind = DataType::Kind;

struct StepLimitReached {};

/// A value together with its (decayed) static type.
struct Typed {
  DataType type;
  Cell value;
};

/// An addressable location.
struct Place {
  Pointer ptr;
  DataType type;
};

enum class Flow { Normal, Break, Continue, Return };

struct ScopeFrame {
  std::map<std::string, Place, std::less<>> vars;
  std::vector<std::size_t> owned;
};

struct CallFrame {
  const Block* function = nullptr;
  std::vector<ScopeFrame> scopes;
};

struct OpenFile {
  std::string path;
  std::string mode;
  std::size_t read_pos = 0;
  bool open = true;
};

std::int64_t wrap_int(std::int64_t v) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(static_cast<std::uint64_t>(v)));
}

std::int64_t wrap_char(std::int64_t v) {
  return static_cast<std::int8_t>(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v)));
}

bool is_float(const DataType& t) { return t.kind() == Kind::Float; }

DataType decay(const DataType& t) { return t.is_array() ? DataType::pointer_to(t.element()) : t; }

std::string format_float(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("?");
}

class Machine {
 public:
  Machine(const model::Program& program, const RunLimits& limits)
      : program_(program),
        limits_(limits),
        symbols_(model::Symbols::of(program)),
        memory_(symbols_->structs) {
    for (const Block& b : program.blocks) {
      if (b.kind == BlockKind::FunctionDef) functions_.emplace(b.text("name"), &b);
    }
  }

  RuntimeOutcome execute() {
    RuntimeOutcome outcome;
    try {
      for (const Block& b : program_.blocks) {
        if (b.kind == BlockKind::Declaration) exec(b);
      }
      const Block& entry = *functions_.at(program_.entry_function);
      std::vector<Typed> args;
      for (const model::Param& p : entry.params("params")) args.push_back(Typed{p.type, zero_cell(p.type)});
      call_user(entry, args);
      outcome.status = RunStatus::Completed;
    } catch (const StepLimitReached&) {
      outcome.status = RunStatus::StepLimitExceeded;
    } catch (const Fault& f) {
      outcome.status = RunStatus::RuntimeError;
      outcome.error_message = f.message;
      outcome.error_block_id = current_block_ ? current_block_->id : std::string();
    }
    outcome.stdout_text = std::move(stdout_);
    outcome.steps_used = steps_;
    outcome.virtual_files = std::move(files_);
    return outcome;
  }

 private:
  void tick(const Block& b) {
    current_block_ = &b;
    if (steps_ >= limits_.max_steps) throw StepLimitReached{};
    ++steps_;
  }

  // ---- scopes -------------------------------------------------------------

  ScopeFrame& innermost() { return frames_.empty() ? globals_ : frames_.back().scopes.back(); }

  void push_scope() {
    if (!frames_.empty()) frames_.back().scopes.emplace_back();
  }

  void pop_scope() {
    if (frames_.empty()) return;
    for (std::size_t object : frames_.back().scopes.back().owned) memory_.release(object);
    frames_.back().scopes.pop_back();
  }

  const Place* lookup(std::string_view name) const {
    if (!frames_.empty()) {
      const auto& scopes = frames_.back().scopes;
      for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
        if (auto v = it->vars.find(name); v != it->vars.end()) return &v->second;
      }
    }
    if (auto v = globals_.vars.find(name); v != globals_.vars.end()) return &v->second;
    return nullptr;
  }

  void declare(const std::string& name, const DataType& type, const std::optional<Typed>& init) {
    Storage storage = frames_.empty() ? Storage::Global : Storage::Stack;
    Pointer ptr = memory_.allocate(type, storage);
    ScopeFrame& scope = innermost();
    scope.owned.push_back(ptr.object);
    Place place{ptr, type};
    if (init) store(place, *init);
    scope.vars[name] = place;
  }

  // ---- conversions --------------------------------------------------------

  static std::int64_t as_int(const Typed& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v.value)) return *i;
    if (const auto* d = std::get_if<double>(&v.value)) {
      if (!std::isfinite(*d) || *d >= 2147483648.0 || *d <= -2147483649.0) {
        throw Fault{"float value " + format_float(*d) + " does not fit in an int"};
      }
      return static_cast<std::int64_t>(*d);
    }
    throw Fault{"expected a number but found a " + v.type.to_string()};
  }

  static double as_double(const Typed& v) {
    if (const auto* d = std::get_if<double>(&v.value)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v.value)) return static_cast<double>(*i);
    throw Fault{"expected a number but found a " + v.type.to_string()};
  }

  static bool truthy(const Typed& v) {
    return std::visit(
        [](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Pointer>) {
            return !x.is_null();
          } else if constexpr (std::is_same_v<T, FileRef>) {
            return x.id != 0;
          } else {
            return x != 0;
          }
        },
        v.value);
  }

  static Cell convert(const Typed& v, const DataType& to) {
    switch (to.kind()) {
      case Kind::Int:
        return wrap_int(as_int(v));
      case Kind::Char:
        return wrap_char(as_int(v));
      case Kind::Float:
        return as_double(v);
      case Kind::PointerTo:
        if (std::holds_alternative<Pointer>(v.value)) return v.value;
        if (const auto* i = std::get_if<std::int64_t>(&v.value); i && *i == 0) return Pointer{};
        throw Fault{"cannot store a " + v.type.to_string() + " in a " + to.to_string()};
      case Kind::FileHandle:
        if (std::holds_alternative<FileRef>(v.value)) return v.value;
        if (const auto* p = std::get_if<Pointer>(&v.value); p && p->is_null()) return FileRef{};
        if (const auto* i = std::get_if<std::int64_t>(&v.value); i && *i == 0) return FileRef{};
        throw Fault{"cannot store a " + v.type.to_string() + " in a FILE*"};
      default:
        return v.value;
    }
  }

  // ---- memory access ------------------------------------------------------

  Typed load(const Place& place) {
    if (place.type.is_array()) return Typed{decay(place.type), place.ptr};
    if (place.type.kind() == Kind::StructRef) {
      std::size_t cells = memory_.cells_of(place.type);
      Pointer temp = memory_.allocate(place.type, Storage::Temporary);
      memory_.copy(temp, place.ptr, cells);
      return Typed{place.type, temp};
    }
    return Typed{place.type, memory_.read(place.ptr)};
  }

  void store(const Place& place, const Typed& value) {
    if (place.type.kind() == Kind::StructRef) {
      memory_.copy(place.ptr, std::get<Pointer>(value.value), memory_.cells_of(place.type));
      return;
    }
    if (place.type.is_array()) {
      // Only a string literal can initialise a char array.
      memory_.write_string(place.ptr, memory_.read_string(std::get<Pointer>(value.value)));
      return;
    }
    memory_.write(place.ptr, convert(value, place.type));
  }

  Pointer offset_pointer(const Typed& base, std::int64_t count) const {
    const auto* p = std::get_if<Pointer>(&base.value);
    if (p == nullptr) throw Fault{"pointer arithmetic on a " + base.type.to_string()};
    if (p->is_null()) throw Fault{"pointer arithmetic on NULL"};
    Pointer out = *p;
    out.offset += count * static_cast<std::int64_t>(memory_.cells_of(base.type.element()));
    return out;
  }

  Place place_of(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Var: {
        const Place* p = lookup(e.text);
        if (p == nullptr) throw Fault{"unknown variable '" + e.text + "'"};
        return *p;
      }
      case ExprKind::Deref: {
        Typed v = eval(e.operands[0]);
        const auto* p = std::get_if<Pointer>(&v.value);
        if (p == nullptr || !v.type.is_pointer()) throw Fault{"dereference of a " + v.type.to_string()};
        if (p->is_null()) throw Fault{"NULL pointer dereference"};
        return Place{*p, v.type.element()};
      }
      case ExprKind::Index: {
        Typed base = eval(e.operands[0]);
        std::int64_t idx = as_int(eval(e.operands[1]));
        if (!base.type.is_pointer()) throw Fault{"indexing a " + base.type.to_string()};
        return Place{offset_pointer(base, idx), base.type.element()};
      }
      case ExprKind::Member: {
        Place base;
        if (e.flag) {
          Typed v = eval(e.operands[0]);
          const auto* p = std::get_if<Pointer>(&v.value);
          if (p == nullptr || !v.type.is_pointer()) throw Fault{"'->' applied to a " + v.type.to_string()};
          if (p->is_null()) throw Fault{"NULL pointer dereference"};
          base = Place{*p, v.type.element()};
        } else if (e.operands[0].is_lvalue()) {
          base = place_of(e.operands[0]);
        } else {
          Typed v = eval(e.operands[0]);
          base = Place{std::get<Pointer>(v.value), v.type};
        }
        if (base.type.kind() != Kind::StructRef) throw Fault{"field access on a " + base.type.to_string()};
        DataType field_type;
        std::int64_t off = memory_.field_offset(base.type.struct_name(), e.text, field_type);
        Pointer at = base.ptr;
        at.offset += off;
        return Place{at, field_type};
      }
      default:
        throw Fault{"expression is not assignable"};
    }
  }

  // ---- expressions --------------------------------------------------------

  Typed eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit:
        return Typed{DataType::integer(), wrap_int(e.int_value)};
      case ExprKind::FloatLit:
        return Typed{DataType::floating(), e.float_value};
      case ExprKind::CharLit:
        return Typed{DataType::character(), wrap_char(e.int_value)};
      case ExprKind::StringLit: {
        auto it = literals_.find(&e);
        if (it == literals_.end()) it = literals_.emplace(&e, memory_.allocate_string(e.text)).first;
        return Typed{DataType::pointer_to(DataType::character()), it->second};
      }
      case ExprKind::Var:
        if (lookup(e.text) == nullptr && e.text == "NULL") {
          return Typed{DataType::pointer_to(DataType::void_type()), Pointer{}};
        }
        return load(place_of(e));
      case ExprKind::Unary: {
        Typed v = eval(e.operands[0]);
        if (e.text == "!") return Typed{DataType::integer(), std::int64_t{truthy(v) ? 0 : 1}};
        if (is_float(v.type)) return Typed{DataType::floating(), -as_double(v)};
        return Typed{DataType::integer(), wrap_int(-as_int(v))};
      }
      case ExprKind::Binary:
        if (e.text == "&&") {
          bool r = truthy(eval(e.operands[0])) && truthy(eval(e.operands[1]));
          return Typed{DataType::integer(), std::int64_t{r}};
        }
        if (e.text == "||") {
          bool r = truthy(eval(e.operands[0])) || truthy(eval(e.operands[1]));
          return Typed{DataType::integer(), std::int64_t{r}};
        }
        {
          Typed lhs = eval(e.operands[0]);
          Typed rhs = eval(e.operands[1]);
          return binary(e.text, lhs, rhs);
        }
      case ExprKind::Assign: {
        Place target = place_of(e.operands[0]);
        Typed value = eval(e.operands[1]);
        if (e.text != "=") value = binary(e.text.substr(0, e.text.size() - 1), load(target), value);
        store(target, value);
        return load(target);
      }
      case ExprKind::IncDec: {
        Place target = place_of(e.operands[0]);
        Typed old = load(target);
        Typed updated = binary(e.text == "++" ? "+" : "-", old, Typed{DataType::integer(), std::int64_t{1}});
        store(target, updated);
        return e.flag ? load(target) : old;
      }
      case ExprKind::Call:
        return call(e);
      case ExprKind::AddressOf: {
        Place p = place_of(e.operands[0]);
        return Typed{DataType::pointer_to(p.type), p.ptr};
      }
      case ExprKind::Deref:
      case ExprKind::Index:
      case ExprKind::Member:
        return load(place_of(e));
    }
    throw Fault{"unsupported expression"};
  }

  int compare_pointers(const Pointer& a, const Pointer& b, bool ordering) const {
    if (a == b) return 0;
    if (a.object != b.object) {
      if (ordering) throw Fault{"comparison of pointers into different objects"};
      return 1;
    }
    return a.offset < b.offset ? -1 : 1;
  }

  static bool comparison_holds(const std::string& op, int c) {
    if (op == "==") return c == 0;
    if (op == "!=") return c != 0;
    if (op == "<") return c < 0;
    if (op == "<=") return c <= 0;
    if (op == ">") return c > 0;
    return c >= 0;
  }

  static bool is_comparison(const std::string& op) {
    return op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=";
  }

  Typed binary(const std::string& op, const Typed& lhs, const Typed& rhs) {
    bool lptr = std::holds_alternative<Pointer>(lhs.value) || std::holds_alternative<FileRef>(lhs.value);
    bool rptr = std::holds_alternative<Pointer>(rhs.value) || std::holds_alternative<FileRef>(rhs.value);
    if (is_comparison(op)) {
      int c = 0;
      if (lptr || rptr) {
        c = compare_handles(lhs, rhs, op != "==" && op != "!=");
      } else if (is_float(lhs.type) || is_float(rhs.type)) {
        double a = as_double(lhs), b = as_double(rhs);
        c = a < b ? -1 : (a > b ? 1 : 0);
        if (std::isnan(a) || std::isnan(b)) return Typed{DataType::integer(), std::int64_t{op == "!=" ? 1 : 0}};
      } else {
        std::int64_t a = as_int(lhs), b = as_int(rhs);
        c = a < b ? -1 : (a > b ? 1 : 0);
      }
      return Typed{DataType::integer(), std::int64_t{comparison_holds(op, c) ? 1 : 0}};
    }
    if (lptr && rptr) {
      if (op != "-") throw Fault{"operator '" + op + "' applied to two pointers"};
      const Pointer& a = std::get<Pointer>(lhs.value);
      const Pointer& b = std::get<Pointer>(rhs.value);
      if (a.object != b.object) throw Fault{"subtraction of pointers into different objects"};
      auto size = static_cast<std::int64_t>(memory_.cells_of(lhs.type.element()));
      return Typed{DataType::integer(), wrap_int((a.offset - b.offset) / size)};
    }
    if (lptr || rptr) {
      const Typed& base = lptr ? lhs : rhs;
      const Typed& count = lptr ? rhs : lhs;
      if (!base.type.is_pointer() || !(op == "+" || (op == "-" && lptr))) {
        throw Fault{"operator '" + op + "' applied to a " + base.type.to_string()};
      }
      std::int64_t n = as_int(count);
      return Typed{base.type, offset_pointer(base, op == "-" ? -n : n)};
    }
    if (op == "%") {
      std::int64_t b = as_int(rhs);
      if (b == 0) throw Fault{"modulo by zero"};
      return Typed{DataType::integer(), wrap_int(as_int(lhs) % b)};
    }
    if (is_float(lhs.type) || is_float(rhs.type)) {
      double a = as_double(lhs), b = as_double(rhs);
      double r = op == "+" ? a + b : op == "-" ? a - b : op == "*" ? a * b : a / b;
      return Typed{DataType::floating(), r};
    }
    std::int64_t a = as_int(lhs), b = as_int(rhs);
    std::int64_t r = 0;
    if (op == "+") {
      r = a + b;
    } else if (op == "-") {
      r = a - b;
    } else if (op == "*") {
      r = a * b;
    } else if (op == "/") {
      if (b == 0) throw Fault{"division by zero"};
      r = a / b;
    } else {
      throw Fault{"unsupported operator '" + op + "'"};
    }
    return Typed{DataType::integer(), wrap_int(r)};
  }

  int compare_handles(const Typed& lhs, const Typed& rhs, bool ordering) const {
    auto as_pointer = [](const Typed& v) -> Pointer {
      if (const auto* p = std::get_if<Pointer>(&v.value)) return *p;
      if (const auto* f = std::get_if<FileRef>(&v.value)) return Pointer{f->id, -1};
      if (const auto* i = std::get_if<std::int64_t>(&v.value); i && *i == 0) return Pointer{};
      throw Fault{"comparison of a pointer with a " + v.type.to_string()};
    };
    Pointer a = as_pointer(lhs), b = as_pointer(rhs);
    if (a.is_null() || b.is_null()) {
      if (ordering) throw Fault{"ordering comparison with NULL"};
      return a.is_null() && b.is_null() ? 0 : 1;
    }
    return compare_pointers(a, b, ordering);
  }

  // ---- calls --------------------------------------------------------------

  Typed call(const Expr& e) {
    std::vector<Typed> args;
    args.reserve(e.operands.size());
    for (const Expr& a : e.operands) args.push_back(eval(a));
    if (auto it = functions_.find(e.text); it != functions_.end()) return call_user(*it->second, args);
    return call_library(e.text, args);
  }

  Typed call_user(const Block& fn, const std::vector<Typed>& args) {
    if (static_cast<int>(frames_.size()) >= kMaxCallDepth) {
      throw Fault{"call depth limit of " + std::to_string(kMaxCallDepth) + " exceeded in '" + fn.text("name") +
                  "' (unbounded recursion?)"};
    }
    const Block* caller_block = current_block_;
    const auto& params = fn.params("params");
    if (params.size() != args.size()) throw Fault{"wrong number of arguments to '" + fn.text("name") + "'"};
    frames_.push_back(CallFrame{&fn, {}});
    frames_.back().scopes.emplace_back();
    for (std::size_t i = 0; i < params.size(); ++i) declare(params[i].name, params[i].type, args[i]);
    return_value_.reset();
    Flow flow = exec_list(fn.children, 0, fn.children.size());
    std::optional<Typed> result = std::move(return_value_);
    return_value_.reset();
    pop_scope();
    frames_.pop_back();
    const DataType* ret = fn.type("return_type");
    if (ret == nullptr || ret->kind() == Kind::Void) {
      current_block_ = caller_block;
      return Typed{DataType::void_type(), std::int64_t{0}};
    }
    if (flow != Flow::Return || !result) {
      if (&fn != entry()) throw Fault{"function '" + fn.text("name") + "' finished without returning a value"};
      result = Typed{DataType::integer(), std::int64_t{0}};
    }
    current_block_ = caller_block;
    return *result;
  }

  const Block* entry() const {
    auto it = functions_.find(program_.entry_function);
    return it == functions_.end() ? nullptr : it->second;
  }

  Typed call_library(const std::string& name, const std::vector<Typed>& args) {
    auto arg = [&](std::size_t i) -> const Typed& {
      if (i >= args.size()) throw Fault{"too few arguments to '" + name + "'"};
      return args[i];
    };
    if (name == "sqrt") {
      double x = as_double(arg(0));
      if (x < 0) throw Fault{"sqrt of a negative number"};
      return Typed{DataType::floating(), std::sqrt(x)};
    }
    if (name == "pow") return Typed{DataType::floating(), std::pow(as_double(arg(0)), as_double(arg(1)))};
    if (name == "fabs") return Typed{DataType::floating(), std::fabs(as_double(arg(0)))};
    if (name == "abs") return Typed{DataType::integer(), wrap_int(std::llabs(as_int(arg(0))))};
    if (name == "strlen") {
      return Typed{DataType::integer(), static_cast<std::int64_t>(read_c_string(arg(0)).size())};
    }
    if (name == "strcmp") {
      int c = read_c_string(arg(0)).compare(read_c_string(arg(1)));
      return Typed{DataType::integer(), std::int64_t{c < 0 ? -1 : (c > 0 ? 1 : 0)}};
    }
    if (name == "toupper" || name == "tolower") {
      std::int64_t c = as_int(arg(0));
      if (name == "toupper" && c >= 'a' && c <= 'z') c -= 'a' - 'A';
      if (name == "tolower" && c >= 'A' && c <= 'Z') c += 'a' - 'A';
      return Typed{DataType::character(), wrap_char(c)};
    }
    throw Fault{"call to unknown function '" + name + "'"};
  }

  std::string read_c_string(const Typed& v) const {
    const auto* p = std::get_if<Pointer>(&v.value);
    if (p == nullptr) throw Fault{"expected a string but found a " + v.type.to_string()};
    if (p->is_null()) throw Fault{"NULL passed where a string was expected"};
    return memory_.read_string(*p);
  }

  // ---- formatted output and input -----------------------------------------

  std::string format(const std::string& fmt, const std::vector<Expr>& arg_exprs) {
    std::vector<Typed> args;
    args.reserve(arg_exprs.size());
    for (const Expr& a : arg_exprs) args.push_back(eval(a));
    std::string out;
    std::size_t next = 0;
    for (std::size_t i = 0; i < fmt.size(); ++i) {
      if (fmt[i] != '%') {
        out += fmt[i];
        continue;
      }
      if (i + 1 >= fmt.size()) throw Fault{"format ends with a lone '%'"};
      char spec = fmt[++i];
      if (spec == '%') {
        out += '%';
        continue;
      }
      if (next >= args.size()) throw Fault{std::string("no argument for %") + spec};
      const Typed& v = args[next++];
      switch (spec) {
        case 'd':
        case 'i':
          if (!v.type.is_integral()) throw Fault{std::string("%") + spec + " expects an int but got a " + v.type.to_string()};
          out += std::to_string(as_int(v));
          break;
        case 'c':
          if (!v.type.is_integral()) throw Fault{"%c expects a char but got a " + v.type.to_string()};
          out += static_cast<char>(as_int(v));
          break;
        case 'f':
          if (!is_float(v.type)) throw Fault{"%f expects a float but got a " + v.type.to_string()};
          out += format_float(as_double(v));
          break;
        case 's':
          if (!v.type.is_pointer() || v.type.element().kind() != Kind::Char) {
            throw Fault{"%s expects a string but got a " + v.type.to_string()};
          }
          out += read_c_string(v);
          break;
        default:
          throw Fault{std::string("unsupported conversion %") + spec};
      }
    }
    if (next < args.size()) throw Fault{"more arguments than conversions in \"" + fmt + "\""};
    return out;
  }

  void emit(const std::string& text) {
    auto limit = static_cast<std::size_t>(limits_.max_output_bytes);
    if (stdout_.size() + text.size() > limit) {
      stdout_.append(text, 0, limit - stdout_.size());
      throw Fault{"output limit of " + std::to_string(limit) + " bytes exceeded"};
    }
    stdout_ += text;
  }

  /// Stores one token into `place`; false when the token does not parse.
  bool read_into(const Place& place, const std::string& token) {
    const DataType& t = place.type;
    const char* first = token.data();
    const char* last = first + token.size();
    if (t.kind() == Kind::Char) {
      memory_.write(place.ptr, wrap_char(static_cast<unsigned char>(token[0])));
      return true;
    }
    if (t.kind() == Kind::Int) {
      std::int64_t v = 0;
      auto [end, ec] = std::from_chars(first + (token[0] == '+' ? 1 : 0), last, v);
      if (ec != std::errc() || end == first) return false;
      memory_.write(place.ptr, wrap_int(v));
      return true;
    }
    if (t.kind() == Kind::Float) {
      double v = 0;
      auto [end, ec] = std::from_chars(first + (token[0] == '+' ? 1 : 0), last, v);
      if (ec != std::errc() || end == first) return false;
      memory_.write(place.ptr, v);
      return true;
    }
    if (t.is_array() && t.element().kind() == Kind::Char) {
      memory_.write_string(place.ptr, token);
      return true;
    }
    throw Fault{"cannot read input into a " + t.to_string()};
  }

  void read_targets(const std::vector<Expr>& targets, const std::function<std::optional<std::string>()>& next) {
    for (const Expr& target : targets) {
      Place place = place_of(target);
      std::optional<std::string> token = next();
      if (!token || !read_into(place, *token)) return;
    }
  }

  std::optional<std::string> next_stdin_token() {
    if (stdin_pos_ >= limits_.stdin_script.size()) return std::nullopt;
    const std::string& token = limits_.stdin_script[stdin_pos_++];
    if (token.empty()) return next_stdin_token();
    return token;
  }

  // ---- files --------------------------------------------------------------

  OpenFile& file_of(const Block& b) {
    Typed handle = eval(*b.expr("handle"));
    const auto* ref = std::get_if<FileRef>(&handle.value);
    if (ref == nullptr) throw Fault{"file operation on a " + handle.type.to_string()};
    if (ref->id == 0) throw Fault{"file handle is NULL"};
    OpenFile& f = open_files_[ref->id - 1];
    if (!f.open) throw Fault{"file '" + f.path + "' used after it was closed"};
    return f;
  }

  void file_op(const Block& b) {
    const std::string& op = b.text("op");
    if (op == "open") {
      Place handle = place_of(*b.expr("handle"));
      const std::string& path = b.text("path");
      std::string mode = b.text("mode").empty() ? "r" : b.text("mode");
      if (mode != "r" && mode != "w" && mode != "a" && mode != "r+" && mode != "w+" && mode != "a+") {
        throw Fault{"unknown file mode \"" + mode + "\""};
      }
      if (mode[0] == 'r' && files_.find(path) == files_.end()) {
        memory_.write(handle.ptr, FileRef{});
        return;
      }
      if (mode[0] == 'w') files_[path].clear();
      files_[path];
      open_files_.push_back(OpenFile{path, mode, 0, true});
      memory_.write(handle.ptr, FileRef{open_files_.size()});
      return;
    }
    OpenFile& f = file_of(b);
    if (op == "close") {
      f.open = false;
    } else if (op == "write") {
      if (f.mode == "r") throw Fault{"file '" + f.path + "' is open for reading only"};
      std::string text = format(b.text("format"), b.exprs("args"));
      std::string& content = files_[f.path];
      if (content.size() + text.size() > kMaxFileBytes) throw Fault{"virtual file '" + f.path + "' is too large"};
      content += text;
    } else if (op == "read") {
      if (f.mode == "w" || f.mode == "a") throw Fault{"file '" + f.path + "' is open for writing only"};
      read_targets(b.exprs("targets"), [&]() -> std::optional<std::string> {
        const std::string& content = files_[f.path];
        std::size_t& pos = f.read_pos;
        while (pos < content.size() && std::isspace(static_cast<unsigned char>(content[pos]))) ++pos;
        if (pos >= content.size()) return std::nullopt;
        std::size_t start = pos;
        while (pos < content.size() && !std::isspace(static_cast<unsigned char>(content[pos]))) ++pos;
        return content.substr(start, pos - start);
      });
    } else {
      throw Fault{"unknown file operation '" + op + "'"};
    }
  }

  // ---- statements ---------------------------------------------------------

  Flow exec_list(const std::vector<Block>& list, std::size_t begin, std::size_t end) {
    push_scope();
    for (std::size_t i = begin; i < end && i < list.size(); ++i) {
      Flow flow = exec(list[i]);
      if (flow != Flow::Normal) {
        pop_scope();
        return flow;
      }
    }
    pop_scope();
    return Flow::Normal;
  }

  /// Runs a loop body; returns the flow that should leave the loop, if any.
  std::optional<Flow> loop_body(const Block& b) {
    Flow flow = exec_list(b.children, 0, b.children.size());
    if (flow == Flow::Break) return Flow::Normal;
    if (flow == Flow::Return) return Flow::Return;
    return std::nullopt;
  }

  Flow exec(const Block& b) {
    tick(b);
    switch (b.kind) {
      case BlockKind::Declaration: {
        std::optional<Typed> init;
        if (const Expr* e = b.expr("init")) init = eval(*e);
        declare(b.text("name"), *b.type("type"), init);
        return Flow::Normal;
      }
      case BlockKind::Assignment: {
        Place target = place_of(*b.expr("target"));
        store(target, eval(*b.expr("value")));
        return Flow::Normal;
      }
      case BlockKind::If: {
        std::size_t split = static_cast<std::size_t>(b.index("else_from").value_or(
            static_cast<std::int64_t>(b.children.size())));
        if (truthy(eval(*b.expr("cond")))) return exec_list(b.children, 0, split);
        return exec_list(b.children, split, b.children.size());
      }
      case BlockKind::Switch: {
        std::int64_t subject = as_int(eval(*b.expr("subject")));
        std::optional<std::size_t> start;
        for (const model::CaseLabel& c : b.cases("cases")) {
          if (c.value && *c.value == subject) {
            start = c.start;
            break;
          }
        }
        if (!start) {
          for (const model::CaseLabel& c : b.cases("cases")) {
            if (!c.value) start = c.start;
          }
        }
        if (!start) return Flow::Normal;
        Flow flow = exec_list(b.children, *start, b.children.size());
        return flow == Flow::Break ? Flow::Normal : flow;
      }
      case BlockKind::ForLoop: {
        if (const Expr* init = b.expr("init")) eval(*init);
        const Expr* cond = b.expr("cond");
        const Expr* step = b.expr("step");
        for (;;) {
          tick(b);
          if (cond != nullptr && !truthy(eval(*cond))) return Flow::Normal;
          if (auto leave = loop_body(b)) return *leave;
          current_block_ = &b;
          if (step != nullptr) eval(*step);
        }
      }
      case BlockKind::WhileLoop:
        for (;;) {
          tick(b);
          if (!truthy(eval(*b.expr("cond")))) return Flow::Normal;
          if (auto leave = loop_body(b)) return *leave;
        }
      case BlockKind::DoWhileLoop:
        for (;;) {
          if (auto leave = loop_body(b)) return *leave;
          tick(b);
          if (!truthy(eval(*b.expr("cond")))) return Flow::Normal;
        }
      case BlockKind::FunctionCall:
        eval(*b.expr("call"));
        return Flow::Normal;
      case BlockKind::Return: {
        if (const Expr* e = b.expr("value")) {
          Typed v = eval(*e);
          const DataType* ret = frames_.empty() ? nullptr : frames_.back().function->type("return_type");
          if (ret != nullptr && ret->kind() != Kind::Void && ret->kind() != Kind::StructRef) {
            v = Typed{*ret, convert(v, *ret)};
          }
          return_value_ = v;
        }
        return Flow::Return;
      }
      case BlockKind::FileOp:
        file_op(b);
        return Flow::Normal;
      case BlockKind::MemAlloc: {
        Place target = place_of(*b.expr("target"));
        const DataType& elem = *b.type("elem_type");
        std::int64_t count = as_int(eval(*b.expr("count")));
        Pointer p = memory_.allocate(elem, Storage::Heap, count);
        store(target, Typed{DataType::pointer_to(elem), p});
        return Flow::Normal;
      }
      case BlockKind::MemFree: {
        Typed v = eval(*b.expr("target"));
        const auto* p = std::get_if<Pointer>(&v.value);
        if (p == nullptr) throw Fault{"free of a " + v.type.to_string()};
        if (!p->is_null()) memory_.free_heap(*p);
        return Flow::Normal;
      }
      case BlockKind::Output:
        emit(format(b.text("format"), b.exprs("args")));
        return Flow::Normal;
      case BlockKind::Input:
        read_targets(b.exprs("targets"), [this] { return next_stdin_token(); });
        return Flow::Normal;
      case BlockKind::Break:
        return Flow::Break;
      case BlockKind::Continue:
        return Flow::Continue;
      case BlockKind::FunctionDef:
      case BlockKind::Preprocessor:
      case BlockKind::StructDef:
        return Flow::Normal;
    }
    return Flow::Normal;
  }

  const model::Program& program_;
  const RunLimits& limits_;
  std::shared_ptr<const model::Symbols> symbols_;
  Memory memory_;
  std::map<std::string, const Block*, std::less<>> functions_;
  ScopeFrame globals_;
  std::vector<CallFrame> frames_;
  std::optional<Typed> return_value_;
  std::map<const Expr*, Pointer> literals_;
  std::vector<OpenFile> open_files_;
  std::map<std::string, std::string> files_;
  std::string stdout_;
  std::size_t stdin_pos_ = 0;
  std::int64_t steps_ = 0;
  const Block* current_block_ = nullptr;
};

}  // namespace

std::string_view run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::Completed:
      return "completed";
    case RunStatus::StepLimitExceeded:
      return "step_limit_exceeded";
    case RunStatus::RuntimeError:
      return "runtime_error";
  }
  return "unknown";
}

RuntimeOutcome run(const model::Program& program, const RunLimits& limits) {
  if (limits.max_steps <= 0 || limits.max_output_bytes <= 0) {
    throw InvalidProgram("run limits must be positive", {});
  }
  model::ValidationReport report = model::validate_program(program);
  if (!report.ok()) {
    std::vector<std::string> problems;
    for (const model::Defect& d : report.defects) problems.push_back(d.message);
    throw InvalidProgram("program is not structurally valid", std::move(problems));
  }
  std::vector<model::TypeDiagnostic> diagnostics = model::check_types(program);
  if (!diagnostics.empty()) {
    std::vector<std::string> problems;
    for (const model::TypeDiagnostic& d : diagnostics) problems.push_back(d.block_id + ": " + d.field + ": " + d.message);
    throw InvalidProgram("program does not type-check", std::move(problems));
  }
  Machine machine(program, limits);
  return machine.execute();
}

std::vector<std::string> split_stdin(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

OutputComparison compare_output(const RuntimeOutcome& outcome, std::string_view expected_stdout) {
  OutputComparison result;
  std::string_view actual = outcome.stdout_text;
  if (actual == expected_stdout) return result;
  result.equal = false;
  auto mismatch = std::mismatch(actual.begin(), actual.end(), expected_stdout.begin(), expected_stdout.end());
  result.first_difference = static_cast<std::size_t>(mismatch.first - actual.begin());
  std::size_t from = result.first_difference > kContextBytes ? result.first_difference - kContextBytes : 0;
  auto context = [&](std::string_view s) {
    if (from >= s.size()) return std::string();
    return std::string(s.substr(from, result.first_difference - from + kContextBytes));
  };
  result.expected_context = context(expected_stdout);
  result.actual_context = context(actual);
  return result;
}

}  // namespace tutor::interp
