#include "naive_oracle.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "tutor/codec/expression_parser.hpp"
#include "tutor/model/analysis.hpp"
#include "tutor/model/typing.hpp"

namespace tutor::testing {

using nlohmann::json;
using model::Block;
using model::DataType;
using model::Expr;

namespace {

struct Node {
  const Block* block;
  std::vector<std::size_t> ancestors;  // outermost first
};

using Env = std::vector<std::pair<std::string, std::size_t>>;

std::vector<std::string> names(const json& j) {
  if (j.is_string()) return {j.get<std::string>()};
  return j.get<std::vector<std::string>>();
}

class Oracle {
 public:
  explicit Oracle(const model::Program& program) : scopes_(model::ScopeTable::build(program)) {
    collect(program.blocks, {});
  }

  std::vector<Env> bindings(const json& cr) const {
    std::vector<Env> out;
    json matchers = cr.value("match", json::array());
    extend(matchers, 0, {}, out);
    return out;
  }

  bool holds(const json& pred, const Env& env) const {
    const auto& [op, body] = *pred.items().begin();
    if (op == "exists") {
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!selects(body, i, env)) continue;
        if (!body.contains("that")) return true;
        Env inner = env;
        inner.emplace_back(body.value("bind", std::string()), i);
        if (holds(body["that"], inner)) return true;
      }
      return false;
    }
    if (op == "count_at_least") {
      long count = 0;
      for (std::size_t i = 0; i < nodes_.size(); ++i) count += selects(body, i, env) ? 1 : 0;
      return count >= body["n"].get<long>();
    }
    if (op == "type_equals") {
      auto l = type_of_ref(body["left"], env);
      auto r = type_of_ref(body["right"], env);
      return !l || !r || model::types_match(*l, *r);
    }
    if (op == "type_is") {
      auto t = type_of_ref(body["ref"], env);
      if (!t) return true;
      auto in = names(body["in"]);
      return std::find(in.begin(), in.end(), std::string(model::type_category(*t))) != in.end();
    }
    if (op == "attr_equals") {
      auto [b, f] = split(ref_text(body["left"]));
      auto l = text_of(lookup(env, b), f);
      auto r = value_text(body["right"], env);
      return l && r && *l == *r;
    }
    if (op == "attr") {
      json test = body;
      test.erase("of");
      return attr_test(test, lookup(env, body["of"].get<std::string>()), env);
    }
    if (op == "declared_before_use") {
      std::size_t n = lookup(env, body["of"].get<std::string>());
      const model::Scope* s = scope(n);
      if (s == nullptr) return true;
      for (const Expr* e : exprs(n, body.value("fields", std::vector<std::string>{}))) {
        bool ok = true;
        walk(*e, [&](const Expr& x) {
          if (x.kind == model::ExprKind::Var && s->lookup(x.text) == nullptr) ok = false;
        });
        if (!ok) return false;
      }
      return true;
    }
    if (op == "valid_expr") {
      auto [b, f] = split(ref_text(body["ref"]));
      const Block& blk = *nodes_[lookup(env, b)].block;
      auto it = blk.attrs.find(f);
      if (it == blk.attrs.end()) return false;
      const auto* slot = std::get_if<model::ExprSlot>(&it->second);
      return slot != nullptr && slot->has_value() && (*slot)->depth() <= model::kMaxExprDepth;
    }
    if (op == "well_typed") {
      std::size_t n = lookup(env, body["of"].get<std::string>());
      const model::Scope* s = scope(n);
      if (s == nullptr) return true;
      auto only = body.value("nodes", std::vector<std::string>{});
      auto except = body.value("except", std::vector<std::string>{});
      for (const Expr* e : exprs(n, body.value("fields", std::vector<std::string>{}))) {
        try {
          model::infer_type(*e, *s);
        } catch (const model::TypeError& err) {
          if (err.code() == model::TypeError::Code::UnboundVariable) continue;
          std::string kind(model::expr_kind_name(err.node_kind()));
          bool picked = only.empty() || std::find(only.begin(), only.end(), kind) != only.end();
          bool spared = std::find(except.begin(), except.end(), kind) != except.end();
          if (picked && !spared) return false;
        }
      }
      return true;
    }
    if (op == "inside") {
      std::size_t n = lookup(env, body["of"].get<std::string>());
      auto kinds = names(body["kind"]);
      for (std::size_t a : nodes_[n].ancestors) {
        if (std::find(kinds.begin(), kinds.end(), kind_name(a)) != kinds.end()) return true;
      }
      return false;
    }
    if (op == "format_args") return format_ok(body, env);
    if (op == "mentions") return mentions(body, env);
    if (op == "calls_resolve") {
      std::size_t n = lookup(env, body["of"].get<std::string>());
      const model::Scope* s = scope(n);
      if (s == nullptr) return true;
      bool ok = true;
      for (const Expr* e : exprs(n, {})) {
        walk(*e, [&](const Expr& x) {
          if (x.kind == model::ExprKind::Call && s->function(x.text) == nullptr) ok = false;
        });
      }
      return ok;
    }
    if (op == "not") return !holds(body, env);
    if (op == "all") {
      for (const json& p : body) {
        if (!holds(p, env)) return false;
      }
      return true;
    }
    if (op == "any") {
      for (const json& p : body) {
        if (holds(p, env)) return true;
      }
      return false;
    }
    throw std::runtime_error("oracle: unknown predicate " + op);
  }

  const Block& block(std::size_t i) const { return *nodes_[i].block; }

 private:
  void collect(const std::vector<Block>& list, std::vector<std::size_t> ancestors) {
    for (const Block& b : list) {
      std::size_t me = nodes_.size();
      nodes_.push_back(Node{&b, ancestors});
      auto inner = ancestors;
      inner.push_back(me);
      collect(b.children, inner);
    }
  }

  void extend(const json& matchers, std::size_t k, Env env, std::vector<Env>& out) const {
    if (k == matchers.size()) {
      out.push_back(env);
      return;
    }
    const json& m = matchers[k];
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!selects(m, i, env)) continue;
      Env next = env;
      next.emplace_back(m["bind"].get<std::string>(), i);
      extend(matchers, k + 1, next, out);
      if (m.value("first", false)) return;
    }
  }

  static std::size_t lookup(const Env& env, const std::string& name) {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
      if (it->first == name) return it->second;
    }
    throw std::runtime_error("oracle: unbound " + name);
  }

  std::string kind_name(std::size_t i) const { return std::string(model::block_kind_name(nodes_[i].block->kind)); }

  bool descends(std::size_t i, std::size_t ancestor) const {
    const auto& a = nodes_[i].ancestors;
    return std::find(a.begin(), a.end(), ancestor) != a.end();
  }

  bool selects(const json& q, std::size_t i, const Env& env) const {
    if (q.contains("kind")) {
      auto kinds = names(q["kind"]);
      if (std::find(kinds.begin(), kinds.end(), kind_name(i)) == kinds.end()) return false;
    }
    if (q.contains("within") && !descends(i, lookup(env, q["within"].get<std::string>()))) return false;
    if (q.contains("before") && !(i < lookup(env, q["before"].get<std::string>()))) return false;
    if (q.contains("after") && !(i > lookup(env, q["after"].get<std::string>()))) return false;
    for (const json& t : q.value("where", json::array())) {
      if (!attr_test(t, i, env)) return false;
    }
    return true;
  }

  static std::string ref_text(const json& j) { return j.is_string() ? j.get<std::string>() : j["ref"].get<std::string>(); }

  static std::pair<std::string, std::string> split(const std::string& ref) {
    auto dot = ref.find('.');
    return {ref.substr(0, dot), ref.substr(dot + 1)};
  }

  std::optional<std::string> value_text(const json& v, const Env& env) const {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    auto [b, f] = split(v["ref"].get<std::string>());
    return text_of(lookup(env, b), f);
  }

  std::optional<std::string> text_of(std::size_t i, const std::string& field) const {
    const Block& b = *nodes_[i].block;
    auto it = b.attrs.find(field);
    if (it == b.attrs.end()) {
      if (field == "id") return b.id;
      if (field == "kind") return kind_name(i);
      return std::nullopt;
    }
    const model::AttrValue& v = it->second;
    auto join = [](const std::vector<std::string>& parts) {
      std::string out;
      for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? ", " : "") + parts[k];
      return out;
    };
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* n = std::get_if<std::int64_t>(&v)) return std::to_string(*n);
    if (const auto* t = std::get_if<DataType>(&v)) return t->to_string();
    if (const auto* slot = std::get_if<model::ExprSlot>(&v)) {
      return *slot ? codec::print_expression(**slot) : std::string();
    }
    std::vector<std::string> parts;
    if (const auto* list = std::get_if<std::vector<Expr>>(&v)) {
      for (const Expr& e : *list) parts.push_back(codec::print_expression(e));
    } else if (const auto* params = std::get_if<std::vector<model::Param>>(&v)) {
      for (const model::Param& p : *params) parts.push_back(p.type.to_string() + " " + p.name);
    } else {
      for (const model::CaseLabel& c : std::get<std::vector<model::CaseLabel>>(v)) {
        parts.push_back((c.value ? std::to_string(*c.value) : "default") + ":" + std::to_string(c.start));
      }
    }
    return join(parts);
  }

  bool present(std::size_t i, const std::string& field) const {
    const Block& b = *nodes_[i].block;
    auto it = b.attrs.find(field);
    if (it == b.attrs.end()) return false;
    const model::AttrValue& v = it->second;
    if (const auto* s = std::get_if<std::string>(&v)) return !s->empty();
    if (const auto* slot = std::get_if<model::ExprSlot>(&v)) return slot->has_value();
    if (const auto* l = std::get_if<std::vector<Expr>>(&v)) return !l->empty();
    if (const auto* p = std::get_if<std::vector<model::Param>>(&v)) return !p->empty();
    if (const auto* c = std::get_if<std::vector<model::CaseLabel>>(&v)) return !c->empty();
    return true;
  }

  const model::Scope* scope(std::size_t i) const { return scopes_.at(nodes_[i].block->id); }

  std::vector<const Expr*> exprs(std::size_t i, const std::vector<std::string>& fields) const {
    std::vector<const Expr*> out;
    auto take = [&](const model::AttrValue& v) {
      if (const auto* slot = std::get_if<model::ExprSlot>(&v)) {
        if (*slot) out.push_back(&**slot);
      } else if (const auto* list = std::get_if<std::vector<Expr>>(&v)) {
        for (const Expr& e : *list) out.push_back(&e);
      }
    };
    const Block& b = *nodes_[i].block;
    if (fields.empty()) {
      for (const auto& [name, v] : b.attrs) take(v);
    } else {
      for (const std::string& f : fields) {
        auto it = b.attrs.find(f);
        if (it != b.attrs.end()) take(it->second);
      }
    }
    return out;
  }

  template <typename F>
  static void walk(const Expr& e, F&& visit) {
    visit(e);
    for (const Expr& c : e.operands) walk(c, visit);
  }

  std::optional<DataType> type_of(std::size_t i, const std::string& field) const {
    const Block& b = *nodes_[i].block;
    auto it = b.attrs.find(field);
    if (it == b.attrs.end()) return std::nullopt;
    if (const auto* t = std::get_if<DataType>(&it->second)) return *t;
    const auto* slot = std::get_if<model::ExprSlot>(&it->second);
    if (slot == nullptr || !*slot) return std::nullopt;
    const model::Scope* s = scope(i);
    if (s == nullptr) return std::nullopt;
    try {
      return model::infer_type(**slot, *s);
    } catch (const model::TypeError&) {
      return std::nullopt;
    }
  }

  std::optional<DataType> type_of_ref(const json& ref, const Env& env) const {
    auto [b, f] = split(ref_text(ref));
    auto t = type_of(lookup(env, b), f);
    if (t && ref.is_object() && ref.value("pointer_to", false)) return DataType::pointer_to(*t);
    return t;
  }

  bool attr_test(const json& t, std::size_t i, const Env& env) const {
    const std::string field = t["field"].get<std::string>();
    bool result = false;
    if (t.contains("equals") || t.contains("in") || t.contains("not_equals")) {
      json options = t.contains("in") ? t["in"] : json::array({t.contains("equals") ? t["equals"] : t["not_equals"]});
      auto actual = text_of(i, field);
      bool hit = false;
      for (const json& o : options) {
        auto want = value_text(o, env);
        hit = hit || (actual && want && *actual == *want);
      }
      result = t.contains("not_equals") ? !hit : hit;
    } else if (t.contains("present")) {
      result = present(i, field) == t["present"].get<bool>();
    } else if (t.contains("calls")) {
      auto callees = names(t["calls"]);
      std::vector<std::string> fields;
      if (field != "*") fields.push_back(field);
      for (const Expr* e : exprs(i, fields)) {
        walk(*e, [&](const Expr& x) {
          if (x.kind == model::ExprKind::Call && std::find(callees.begin(), callees.end(), x.text) != callees.end()) {
            result = true;
          }
        });
      }
    } else if (t.contains("type_kind")) {
      auto kinds = names(t["type_kind"]);
      auto ty = type_of(i, field);
      result = ty && std::find(kinds.begin(), kinds.end(), std::string(model::type_category(*ty))) != kinds.end();
    }
    return t.value("negate", false) ? !result : result;
  }

  bool format_ok(const json& body, const Env& env) const {
    std::size_t n = lookup(env, body["of"].get<std::string>());
    const Block& b = *nodes_[n].block;
    std::string format;
    if (auto it = b.attrs.find("format"); it != b.attrs.end()) format = std::get<std::string>(it->second);
    std::string specs;
    for (std::size_t k = 0; k < format.size(); ++k) {
      if (format[k] != '%') continue;
      if (k + 1 == format.size()) {
        specs += '?';
      } else if (format[++k] != '%') {
        specs += format[k];
      }
    }
    std::vector<Expr> args;
    if (auto it = b.attrs.find("args"); it != b.attrs.end()) args = std::get<std::vector<Expr>>(it->second);
    if (body.value("check", std::string("count")) == "count") return specs.size() == args.size();
    const model::Scope* s = scope(n);
    if (s == nullptr) return true;
    for (std::size_t k = 0; k < specs.size() && k < args.size(); ++k) {
      DataType t;
      try {
        t = model::infer_type(args[k], *s);
      } catch (const model::TypeError&) {
        continue;
      }
      std::string cat(model::type_category(t));
      bool ok = false;
      if (specs[k] == 'd' || specs[k] == 'i' || specs[k] == 'c') ok = cat == "int" || cat == "char";
      if (specs[k] == 'f') ok = cat == "float";
      if (specs[k] == 's') ok = (cat == "pointer" || cat == "array") && model::type_category(t.element()) == "char";
      if (!ok) return false;
    }
    return true;
  }

  bool mentions(const json& body, const Env& env) const {
    auto name = value_text(body["name"], env);
    if (!name) return false;
    std::string as = body.value("as", std::string("any"));
    std::optional<std::size_t> within;
    std::optional<std::size_t> exclude;
    if (body.contains("within")) within = lookup(env, body["within"].get<std::string>());
    if (body.contains("exclude")) exclude = lookup(env, body["exclude"].get<std::string>());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (within && !descends(i, *within)) continue;
      if (exclude && (i == *exclude || descends(i, *exclude))) continue;
      bool found = false;
      for (const Expr* e : exprs(i, {})) {
        walk(*e, [&](const Expr& x) {
          if (x.text != *name) return;
          if (x.kind == model::ExprKind::Call && as != "var") found = true;
          if (x.kind == model::ExprKind::Var && as != "call") found = true;
        });
      }
      if (found) return true;
    }
    return false;
  }

  std::vector<Node> nodes_;
  model::ScopeTable scopes_;
};

}  // namespace

std::vector<json> rules_of(const std::vector<json>& documents) {
  std::vector<json> out;
  for (const json& d : documents) {
    for (const json& r : d["rules"]) out.push_back(r);
  }
  return out;
}

std::vector<OracleViolation> naive_evaluate(const std::vector<json>& rules, const model::Program& program,
                                            const std::set<std::string>& problem_tags,
                                            const std::set<std::string>& disabled) {
  std::vector<json> ordered = rules;
  std::sort(ordered.begin(), ordered.end(),
            [](const json& a, const json& b) { return a["id"].get<std::string>() < b["id"].get<std::string>(); });
  Oracle oracle(program);
  std::vector<OracleViolation> out;
  for (const json& rule : ordered) {
    const std::string id = rule["id"].get<std::string>();
    if (!rule.value("enabled", true) || disabled.count(id) != 0) continue;
    const json cr = rule.value("cr", json::object());
    bool relevant = true;
    for (const std::string& tag : cr.value("tags", std::vector<std::string>{})) relevant = relevant && problem_tags.count(tag);
    if (!relevant) continue;
    std::vector<std::pair<std::vector<std::string>, OracleViolation>> found;
    for (const Env& env : oracle.bindings(cr)) {
      if (oracle.holds(rule["cs"], env)) continue;
      OracleViolation v{id, rule["category"].get<std::string>(), {}};
      std::vector<std::string> ids;
      for (const auto& [name, i] : env) {
        v.binding.emplace_back(name, oracle.block(i).id);
        ids.push_back(oracle.block(i).id);
      }
      found.emplace_back(ids, v);
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [ids, v] : found) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace tutor::testing
