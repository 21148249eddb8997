#include "tutor/rules/engine.hpp"

#include <algorithm>
#include <limits>
#include <optional>

#include "tutor/codec/expression_parser.hpp"
#include "tutor/model/typing.hpp"
#include "tutor/rules/program_view.hpp"

namespace tutor::rules {

using model::Block;
using model::DataType;
using model::Expr;
using model::ExprKind;

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

/// Small ordered name → node-position map; rules bind a handful of names.
class Env {
 public:
  void push(const std::string& name, std::size_t pos) { slots_.emplace_back(name, pos); }
  void pop() { slots_.pop_back(); }
  std::size_t at(const std::string& name) const {
    for (auto it = slots_.rbegin(); it != slots_.rend(); ++it) {
      if (it->first == name) return it->second;
    }
    return kNone;
  }
  const std::vector<std::pair<std::string, std::size_t>>& slots() const { return slots_; }

 private:
  std::vector<std::pair<std::string, std::size_t>> slots_;
};

bool format_spec_accepts(char spec, const DataType& t) {
  switch (spec) {
    case 'd':
    case 'i':
    case 'c':
      return t.is_integral();
    case 'f':
      return t.kind() == DataType::Kind::Float;
    case 's':
      return (t.is_pointer() || t.is_array()) && t.element().kind() == DataType::Kind::Char;
    default:
      return false;
  }
}

class Evaluator {
 public:
  explicit Evaluator(const ProgramView& view) : view_(view) {}

  std::vector<Env> bindings(const RelevancePattern& cr) const {
    std::vector<Env> out;
    Env env;
    bind(cr, 0, env, out);
    return out;
  }

  bool satisfied(const Predicate& p, Env& env) const {
    return std::visit([&](const auto& node) { return eval(node, env); }, p.node);
  }

 private:
  void bind(const RelevancePattern& cr, std::size_t index, Env& env, std::vector<Env>& out) const {
    if (index == cr.matchers.size()) {
      out.push_back(env);
      return;
    }
    const NodeMatcher& m = cr.matchers[index];
    for (std::size_t pos : view_.candidates(m.query.kinds)) {
      if (!matches(m.query, pos, env)) continue;
      env.push(m.bind, pos);
      bind(cr, index + 1, env, out);
      env.pop();
      if (m.first) break;
    }
  }

  std::optional<std::string> operand_text(const Operand& op, const Env& env) const {
    if (const auto* literal = std::get_if<std::string>(&op)) return *literal;
    const FieldRef& ref = std::get<FieldRef>(op);
    return view_.attr_text(env.at(ref.binding), ref.field);
  }

  std::optional<DataType> ref_type(const FieldRef& ref, const Env& env) const {
    auto t = view_.type_of(env.at(ref.binding), ref.field);
    if (t && ref.pointer_to) return DataType::pointer_to(*t);
    return t;
  }

  bool test(const AttrTest& t, std::size_t pos, const Env& env) const {
    bool result = false;
    switch (t.op) {
      case AttrOp::Equals:
      case AttrOp::NotEquals:
      case AttrOp::In: {
        auto actual = view_.attr_text(pos, t.field);
        bool any = false;
        if (actual) {
          for (const Operand& v : t.values) {
            auto expected = operand_text(v, env);
            if (expected && *expected == *actual) {
              any = true;
              break;
            }
          }
        }
        result = t.op == AttrOp::NotEquals ? !any : any;
        break;
      }
      case AttrOp::Present:
        result = view_.attr_present(pos, t.field);
        break;
      case AttrOp::Calls:
        for (const Expr* e : view_.expressions(pos, t.field)) {
          model::for_each_node(*e, [&](const Expr& n) {
            if (n.kind != ExprKind::Call) return;
            for (const Operand& v : t.values) {
              if (std::get<std::string>(v) == n.text) result = true;
            }
          });
        }
        break;
      case AttrOp::TypeKind:
        if (auto type = view_.type_of(pos, t.field)) {
          for (const Operand& v : t.values) {
            if (std::get<std::string>(v) == model::type_category(*type)) result = true;
          }
        }
        break;
    }
    return t.negate ? !result : result;
  }

  bool matches(const NodeQuery& q, std::size_t pos, const Env& env) const {
    if (!q.kinds.empty() && q.kinds.count(view_.block(pos).kind) == 0) return false;
    if (q.within) {
      std::size_t w = env.at(*q.within);
      if (!(pos > w && pos < view_.subtree_end(w))) return false;
    }
    if (q.before && !(pos < env.at(*q.before))) return false;
    if (q.after && !(pos > env.at(*q.after))) return false;
    for (const AttrTest& t : q.where) {
      if (!test(t, pos, env)) return false;
    }
    return true;
  }

  bool eval(const ExistsPred& p, Env& env) const {
    for (std::size_t pos : view_.candidates(p.query.kinds)) {
      if (!matches(p.query, pos, env)) continue;
      if (!p.bind) return true;
      env.push(*p.bind, pos);
      bool ok = p.that.empty() || satisfied(p.that.front(), env);
      env.pop();
      if (ok) return true;
    }
    return false;
  }

  bool eval(const CountAtLeastPred& p, Env& env) const {
    std::int64_t count = 0;
    for (std::size_t pos : view_.candidates(p.query.kinds)) {
      if (matches(p.query, pos, env) && ++count >= p.n) return true;
    }
    return count >= p.n;
  }

  bool eval(const TypeEqualsPred& p, Env& env) const {
    auto left = ref_type(p.left, env);
    auto right = ref_type(p.right, env);
    // Unknown types are some other rule's business.
    if (!left || !right) return true;
    return model::types_match(*left, *right);
  }

  bool eval(const TypeIsPred& p, Env& env) const {
    auto t = ref_type(p.ref, env);
    if (!t) return true;
    return p.categories.count(std::string(model::type_category(*t))) != 0;
  }

  bool eval(const AttrEqualsPred& p, Env& env) const {
    auto left = view_.attr_text(env.at(p.left.binding), p.left.field);
    auto right = operand_text(p.right, env);
    return left && right && *left == *right;
  }

  bool eval(const AttrPred& p, Env& env) const { return test(p.test, env.at(p.binding), env); }

  bool eval(const DeclaredBeforeUsePred& p, Env& env) const {
    std::size_t pos = env.at(p.binding);
    const model::Scope* scope = view_.scope(pos);
    if (scope == nullptr) return true;
    bool ok = true;
    for (const Expr* e : view_.expressions_in(pos, p.fields)) {
      model::for_each_node(*e, [&](const Expr& n) {
        if (n.kind == ExprKind::Var && scope->lookup(n.text) == nullptr) ok = false;
      });
    }
    return ok;
  }

  bool eval(const ValidExprPred& p, Env& env) const {
    const Block& b = view_.block(env.at(p.ref.binding));
    const Expr* e = b.expr(p.ref.field);
    return e != nullptr && e->depth() <= model::kMaxExprDepth;
  }

  bool eval(const WellTypedPred& p, Env& env) const {
    std::size_t pos = env.at(p.binding);
    const model::Scope* scope = view_.scope(pos);
    if (scope == nullptr) return true;
    for (const Expr* e : view_.expressions_in(pos, p.fields)) {
      try {
        model::infer_type(*e, *scope);
      } catch (const model::TypeError& err) {
        if (err.code() == model::TypeError::Code::UnboundVariable) continue;
        bool selected = p.nodes.empty() || p.nodes.count(err.node_kind()) != 0;
        if (selected && p.except.count(err.node_kind()) == 0) return false;
      }
    }
    return true;
  }

  bool eval(const InsidePred& p, Env& env) const {
    for (std::size_t up = view_.parent(env.at(p.binding)); up != kNone; up = view_.parent(up)) {
      if (p.kinds.count(view_.block(up).kind) != 0) return true;
    }
    return false;
  }

  bool eval(const FormatArgsPred& p, Env& env) const {
    std::size_t pos = env.at(p.binding);
    const Block& b = view_.block(pos);
    std::string specs = conversion_specs(b.text("format"));
    const std::vector<Expr>& args = b.exprs("args");
    if (p.check == FormatCheck::Count) return specs.size() == args.size();
    const model::Scope* scope = view_.scope(pos);
    if (scope == nullptr) return true;
    for (std::size_t i = 0; i < std::min(specs.size(), args.size()); ++i) {
      try {
        if (!format_spec_accepts(specs[i], model::infer_type(args[i], *scope))) return false;
      } catch (const model::TypeError&) {
        // reported elsewhere
      }
    }
    return true;
  }

  bool eval(const MentionsPred& p, Env& env) const {
    auto name = operand_text(p.name, env);
    if (!name) return false;
    std::size_t begin = 0;
    std::size_t end = view_.size();
    if (p.within) {
      begin = env.at(*p.within) + 1;
      end = view_.subtree_end(env.at(*p.within));
    }
    std::size_t skip_begin = kNone;
    std::size_t skip_end = kNone;
    if (p.exclude) {
      skip_begin = env.at(*p.exclude);
      skip_end = view_.subtree_end(skip_begin);
    }
    for (std::size_t pos = begin; pos < end; ++pos) {
      if (pos == skip_begin) {
        pos = skip_end - 1;
        continue;
      }
      for (const Expr* e : view_.expressions(pos, "*")) {
        bool found = false;
        model::for_each_node(*e, [&](const Expr& n) {
          if (n.text != *name) return;
          if (n.kind == ExprKind::Call && p.as != MentionAs::Var) found = true;
          if (n.kind == ExprKind::Var && p.as != MentionAs::Call) found = true;
        });
        if (found) return true;
      }
    }
    return false;
  }

  bool eval(const CallsResolvePred& p, Env& env) const {
    std::size_t pos = env.at(p.binding);
    const model::Scope* scope = view_.scope(pos);
    if (scope == nullptr) return true;
    bool ok = true;
    for (const Expr* e : view_.expressions(pos, "*")) {
      model::for_each_node(*e, [&](const Expr& n) {
        if (n.kind == ExprKind::Call && scope->function(n.text) == nullptr) ok = false;
      });
    }
    return ok;
  }

  bool eval(const NotPred& p, Env& env) const { return !satisfied(p.operand.front(), env); }

  bool eval(const AllPred& p, Env& env) const {
    for (const Predicate& item : p.operands) {
      if (!satisfied(item, env)) return false;
    }
    return true;
  }

  bool eval(const AnyPred& p, Env& env) const {
    for (const Predicate& item : p.operands) {
      if (satisfied(item, env)) return true;
    }
    return false;
  }

  const ProgramView& view_;
};

Binding to_binding(const Env& env, const ProgramView& view) {
  Binding out;
  for (const auto& [name, pos] : env.slots()) out.emplace_back(name, view.block(pos).id);
  return out;
}

std::vector<std::string> ids_of(const Binding& b) {
  std::vector<std::string> out;
  for (const auto& [name, id] : b) out.push_back(id);
  return out;
}

std::map<std::string, std::string> explanation(const Env& env, const ProgramView& view) {
  std::map<std::string, std::string> data;
  for (const auto& [name, pos] : env.slots()) {
    const Block& b = view.block(pos);
    data[name + ".id"] = b.id;
    data[name + ".kind"] = std::string(model::block_kind_name(b.kind));
    for (const auto& [field, value] : b.attrs) {
      if (auto text = view.attr_text(pos, field)) data[name + "." + field] = *text;
      if (auto t = view.type_of(pos, field)) data[name + "." + field + ":type"] = t->to_string();
    }
  }
  return data;
}

struct Outcome {
  Env env;
  Binding binding;
  bool satisfied;
};

std::vector<Outcome> run_constraint(const Constraint& c, const ProgramView& view, const codec::Exercise& exercise) {
  std::vector<Outcome> out;
  for (const std::string& tag : c.relevance.tags) {
    if (exercise.problem_tags.count(tag) == 0) return out;
  }
  Evaluator evaluator(view);
  for (Env& env : evaluator.bindings(c.relevance)) {
    bool ok = evaluator.satisfied(c.satisfaction, env);
    Binding binding = to_binding(env, view);
    out.push_back(Outcome{std::move(env), std::move(binding), ok});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Outcome& a, const Outcome& b) { return ids_of(a.binding) < ids_of(b.binding); });
  return out;
}

}  // namespace

std::string conversion_specs(std::string_view format) {
  std::string specs;
  for (std::size_t i = 0; i < format.size(); ++i) {
    if (format[i] != '%') continue;
    if (i + 1 >= format.size()) {
      specs.push_back('?');
      break;
    }
    ++i;
    if (format[i] != '%') specs.push_back(format[i]);
  }
  return specs;
}

std::vector<std::string> Violation::block_ids() const { return ids_of(bindings); }

bool constraint_enabled(const Constraint& c, const codec::Exercise& exercise) {
  bool enabled = c.enabled;
  for (const codec::RuleOverride& o : exercise.rule_overrides) {
    if (o.rule_id == c.id) enabled = o.enabled;
  }
  return enabled;
}

std::vector<BindingResult> check_constraint(const Constraint& c, const model::Program& program,
                                            const codec::Exercise& exercise) {
  ProgramView view(program);
  std::vector<BindingResult> out;
  for (Outcome& o : run_constraint(c, view, exercise)) out.push_back(BindingResult{std::move(o.binding), o.satisfied});
  return out;
}

std::vector<Violation> evaluate(const model::Program& program, const codec::Exercise& exercise,
                                const KnowledgeBase& kb) {
  ProgramView view(program);
  std::vector<Violation> out;
  for (const Constraint& c : kb.constraints()) {
    if (!constraint_enabled(c, exercise)) continue;
    for (Outcome& o : run_constraint(c, view, exercise)) {
      if (o.satisfied) continue;
      out.push_back(Violation{c.id, c.category, std::move(o.binding), explanation(o.env, view)});
    }
  }
  return out;
}

}  // namespace tutor::rules
