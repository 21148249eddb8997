#include "tutor/rules/knowledge_base.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tutor::rules {

using nlohmann::json;

namespace {

using Env = std::set<std::string>;

class RuleParser {
 public:
  RuleParser(std::string document, std::string rule_id) : document_(std::move(document)), rule_id_(std::move(rule_id)) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw KbError(KbError::Code::RuleParseError, document_, rule_id_, message);
  }
  [[noreturn]] void unbound(const std::string& name) const {
    throw KbError(KbError::Code::UnboundBindingInCs, document_, rule_id_, "binding '" + name + "' is not declared");
  }

  void keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) const {
    if (!j.is_object()) fail(std::string(where) + ": expected an object");
    for (const auto& [key, value] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(std::string(where) + ": unknown key '" + key + "'");
      }
    }
  }

  std::string str(const json& j, std::string_view what) const {
    if (!j.is_string()) fail(std::string(what) + ": expected a string");
    return j.get<std::string>();
  }

  std::string binding_name(const json& j, const Env& env, std::string_view what) const {
    std::string name = str(j, what);
    if (env.count(name) == 0) unbound(name);
    return name;
  }

  std::vector<std::string> str_list(const json& j, std::string_view what) const {
    std::vector<std::string> out;
    if (j.is_string()) {
      out.push_back(j.get<std::string>());
      return out;
    }
    if (!j.is_array()) fail(std::string(what) + ": expected a string or list of strings");
    for (const json& item : j) out.push_back(str(item, what));
    return out;
  }

  FieldRef field_ref(const json& j, const Env& env) const {
    FieldRef ref;
    std::string text;
    if (j.is_object()) {
      keys(j, "field reference", {"ref", "pointer_to"});
      if (!j.contains("ref")) fail("field reference needs 'ref'");
      text = str(j["ref"], "ref");
      if (j.contains("pointer_to")) {
        if (!j["pointer_to"].is_boolean()) fail("pointer_to must be a boolean");
        ref.pointer_to = j["pointer_to"].get<bool>();
      }
    } else {
      text = str(j, "field reference");
    }
    auto dot = text.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == text.size()) fail("malformed field reference '" + text + "'");
    ref.binding = text.substr(0, dot);
    ref.field = text.substr(dot + 1);
    if (env.count(ref.binding) == 0) unbound(ref.binding);
    return ref;
  }

  Operand operand(const json& j, const Env& env) const {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
    if (j.is_object()) return field_ref(j, env);
    fail("operand must be a string, an integer or {\"ref\": ...}");
  }

  std::set<model::BlockKind> block_kinds(const json& j) const {
    std::set<model::BlockKind> out;
    for (const std::string& name : str_list(j, "kind")) {
      auto k = model::block_kind_from_name(name);
      if (!k) fail("unknown block kind '" + name + "'");
      out.insert(*k);
    }
    return out;
  }

  std::set<model::ExprKind> expr_kinds(const json& j) const {
    static const std::vector<model::ExprKind> kAll = {
        model::ExprKind::IntLit, model::ExprKind::FloatLit, model::ExprKind::CharLit,   model::ExprKind::StringLit,
        model::ExprKind::Var,    model::ExprKind::Unary,    model::ExprKind::Binary,    model::ExprKind::Assign,
        model::ExprKind::IncDec, model::ExprKind::Call,     model::ExprKind::AddressOf, model::ExprKind::Deref,
        model::ExprKind::Index,  model::ExprKind::Member};
    std::set<model::ExprKind> out;
    for (const std::string& name : str_list(j, "expression kind")) {
      auto it = std::find_if(kAll.begin(), kAll.end(), [&](model::ExprKind k) { return model::expr_kind_name(k) == name; });
      if (it == kAll.end()) fail("unknown expression kind '" + name + "'");
      out.insert(*it);
    }
    return out;
  }

  AttrTest attr_test(const json& j, const Env& env) const {
    keys(j, "attribute test", {"field", "equals", "not_equals", "in", "present", "calls", "type_kind", "negate"});
    if (!j.contains("field")) fail("attribute test needs 'field'");
    AttrTest t;
    t.field = str(j["field"], "field");
    int ops = 0;
    if (j.contains("equals")) {
      t.op = AttrOp::Equals;
      t.values.push_back(operand(j["equals"], env));
      ++ops;
    }
    if (j.contains("not_equals")) {
      t.op = AttrOp::NotEquals;
      t.values.push_back(operand(j["not_equals"], env));
      ++ops;
    }
    if (j.contains("in")) {
      t.op = AttrOp::In;
      if (!j["in"].is_array()) fail("'in' needs a list");
      for (const json& v : j["in"]) t.values.push_back(operand(v, env));
      ++ops;
    }
    if (j.contains("present")) {
      t.op = AttrOp::Present;
      if (!j["present"].is_boolean()) fail("'present' must be a boolean");
      if (!j["present"].get<bool>()) t.negate = !t.negate;
      ++ops;
    }
    if (j.contains("calls")) {
      t.op = AttrOp::Calls;
      for (const std::string& s : str_list(j["calls"], "calls")) t.values.emplace_back(s);
      ++ops;
    }
    if (j.contains("type_kind")) {
      t.op = AttrOp::TypeKind;
      for (const std::string& s : str_list(j["type_kind"], "type_kind")) t.values.emplace_back(s);
      ++ops;
    }
    if (ops != 1) fail("attribute test on '" + t.field + "' needs exactly one operator");
    if (j.contains("negate")) {
      if (!j["negate"].is_boolean()) fail("'negate' must be a boolean");
      if (j["negate"].get<bool>()) t.negate = !t.negate;
    }
    return t;
  }

  NodeQuery node_query(const json& j, const Env& env) const {
    NodeQuery q;
    if (j.contains("kind")) q.kinds = block_kinds(j["kind"]);
    if (j.contains("within")) q.within = binding_name(j["within"], env, "within");
    if (j.contains("before")) q.before = binding_name(j["before"], env, "before");
    if (j.contains("after")) q.after = binding_name(j["after"], env, "after");
    if (j.contains("where")) {
      if (!j["where"].is_array()) fail("'where' needs a list");
      for (const json& t : j["where"]) q.where.push_back(attr_test(t, env));
    }
    return q;
  }

  RelevancePattern relevance(const json& j, const std::set<std::string>& vocabulary, Env& env) const {
    keys(j, "cr", {"tags", "match"});
    RelevancePattern cr;
    if (j.contains("tags")) {
      for (const std::string& tag : str_list(j["tags"], "tags")) {
        if (vocabulary.count(tag) == 0) fail("tag '" + tag + "' is not in the tag vocabulary");
        cr.tags.insert(tag);
      }
    }
    if (j.contains("match")) {
      if (!j["match"].is_array()) fail("'match' needs a list");
      for (const json& m : j["match"]) {
        keys(m, "matcher", {"bind", "kind", "within", "before", "after", "where", "first"});
        if (!m.contains("bind")) fail("matcher needs 'bind'");
        NodeMatcher matcher;
        matcher.bind = str(m["bind"], "bind");
        if (env.count(matcher.bind) != 0) fail("binding '" + matcher.bind + "' declared twice");
        matcher.query = node_query(m, env);
        if (m.contains("first")) {
          if (!m["first"].is_boolean()) fail("'first' must be a boolean");
          matcher.first = m["first"].get<bool>();
        }
        env.insert(matcher.bind);
        cr.matchers.push_back(std::move(matcher));
      }
    }
    return cr;
  }

  Predicate predicate(const json& j, const Env& env) const {
    if (!j.is_object() || j.size() != 1) fail("a predicate is an object with exactly one key");
    const std::string& op = j.begin().key();
    const json& body = j.begin().value();
    Predicate p;
    if (op == "exists") {
      keys(body, op, {"kind", "within", "before", "after", "where", "bind", "that"});
      ExistsPred e;
      e.query = node_query(body, env);
      Env inner = env;
      if (body.contains("bind")) {
        e.bind = str(body["bind"], "bind");
        if (env.count(*e.bind) != 0) fail("binding '" + *e.bind + "' declared twice");
        inner.insert(*e.bind);
      }
      if (body.contains("that")) {
        if (!e.bind) fail("'that' needs 'bind'");
        e.that.push_back(predicate(body["that"], inner));
      }
      p.node = std::move(e);
    } else if (op == "count_at_least") {
      keys(body, op, {"kind", "within", "before", "after", "where", "n"});
      CountAtLeastPred c;
      c.query = node_query(body, env);
      if (!body.contains("n") || !body["n"].is_number_integer()) fail("count_at_least needs integer 'n'");
      c.n = body["n"].get<std::int64_t>();
      p.node = std::move(c);
    } else if (op == "type_equals") {
      keys(body, op, {"left", "right"});
      if (!body.contains("left") || !body.contains("right")) fail("type_equals needs left and right");
      p.node = TypeEqualsPred{field_ref(body["left"], env), field_ref(body["right"], env)};
    } else if (op == "type_is") {
      keys(body, op, {"ref", "in"});
      if (!body.contains("ref") || !body.contains("in")) fail("type_is needs ref and in");
      TypeIsPred t;
      t.ref = field_ref(body["ref"], env);
      for (const std::string& c : str_list(body["in"], "in")) t.categories.insert(c);
      p.node = std::move(t);
    } else if (op == "attr_equals") {
      keys(body, op, {"left", "right"});
      if (!body.contains("left") || !body.contains("right")) fail("attr_equals needs left and right");
      p.node = AttrEqualsPred{field_ref(body["left"], env), operand(body["right"], env)};
    } else if (op == "attr") {
      if (!body.is_object() || !body.contains("of")) fail("attr needs 'of'");
      json test = body;
      std::string of = binding_name(body["of"], env, "of");
      test.erase("of");
      p.node = AttrPred{of, attr_test(test, env)};
    } else if (op == "declared_before_use") {
      keys(body, op, {"of", "fields"});
      DeclaredBeforeUsePred d;
      d.binding = binding_name(body.value("of", json()), env, "of");
      if (body.contains("fields")) d.fields = str_list(body["fields"], "fields");
      p.node = std::move(d);
    } else if (op == "valid_expr") {
      keys(body, op, {"ref"});
      if (!body.contains("ref")) fail("valid_expr needs 'ref'");
      p.node = ValidExprPred{field_ref(body["ref"], env)};
    } else if (op == "well_typed") {
      keys(body, op, {"of", "fields", "nodes", "except"});
      WellTypedPred w;
      w.binding = binding_name(body.value("of", json()), env, "of");
      if (body.contains("fields")) w.fields = str_list(body["fields"], "fields");
      if (body.contains("nodes")) w.nodes = expr_kinds(body["nodes"]);
      if (body.contains("except")) w.except = expr_kinds(body["except"]);
      p.node = std::move(w);
    } else if (op == "inside") {
      keys(body, op, {"of", "kind"});
      if (!body.contains("kind")) fail("inside needs 'kind'");
      p.node = InsidePred{binding_name(body.value("of", json()), env, "of"), block_kinds(body["kind"])};
    } else if (op == "format_args") {
      keys(body, op, {"of", "check"});
      FormatArgsPred f;
      f.binding = binding_name(body.value("of", json()), env, "of");
      std::string check = body.contains("check") ? str(body["check"], "check") : "count";
      if (check == "count") {
        f.check = FormatCheck::Count;
      } else if (check == "types") {
        f.check = FormatCheck::Types;
      } else {
        fail("format_args check must be 'count' or 'types'");
      }
      p.node = std::move(f);
    } else if (op == "mentions") {
      keys(body, op, {"name", "as", "within", "exclude"});
      if (!body.contains("name")) fail("mentions needs 'name'");
      MentionsPred m;
      m.name = operand(body["name"], env);
      std::string as = body.contains("as") ? str(body["as"], "as") : "any";
      if (as == "call") {
        m.as = MentionAs::Call;
      } else if (as == "var") {
        m.as = MentionAs::Var;
      } else if (as == "any") {
        m.as = MentionAs::Any;
      } else {
        fail("mentions 'as' must be call, var or any");
      }
      if (body.contains("within")) m.within = binding_name(body["within"], env, "within");
      if (body.contains("exclude")) m.exclude = binding_name(body["exclude"], env, "exclude");
      p.node = std::move(m);
    } else if (op == "calls_resolve") {
      keys(body, op, {"of"});
      p.node = CallsResolvePred{binding_name(body.value("of", json()), env, "of")};
    } else if (op == "not") {
      NotPred n;
      n.operand.push_back(predicate(body, env));
      p.node = std::move(n);
    } else if (op == "all" || op == "any") {
      if (!body.is_array()) fail("'" + op + "' needs a list");
      std::vector<Predicate> items;
      for (const json& item : body) items.push_back(predicate(item, env));
      if (op == "all") {
        p.node = AllPred{std::move(items)};
      } else {
        p.node = AnyPred{std::move(items)};
      }
    } else {
      fail("unknown predicate '" + op + "'");
    }
    return p;
  }

  void check_placeholders(const std::string& text, const Env& env) const {
    std::size_t pos = 0;
    while ((pos = text.find('{', pos)) != std::string::npos) {
      std::size_t end = text.find('}', pos);
      if (end == std::string::npos) fail("unterminated placeholder in feedback");
      std::string key = text.substr(pos + 1, end - pos - 1);
      std::string binding = key.substr(0, key.find('.'));
      if (key.find('.') == std::string::npos || env.count(binding) == 0) {
        fail("feedback placeholder {" + key + "} does not name a bound block");
      }
      pos = end + 1;
    }
  }

  FeedbackTemplates feedback(const json& j, const Env& env) const {
    keys(j, "feedback", {"elaborated", "correct"});
    FeedbackTemplates f;
    if (!j.contains("elaborated")) fail("feedback needs an 'elaborated' template");
    const json& e = j["elaborated"];
    if (e.is_string()) {
      f.elaborated["standard"] = e.get<std::string>();
    } else {
      keys(e, "elaborated", {"standard", "novice", "terse"});
      if (!e.contains("standard")) fail("elaborated variants need 'standard'");
      for (const auto& [tier, text] : e.items()) f.elaborated[tier] = str(text, "elaborated");
    }
    if (j.contains("correct")) f.correct = str(j["correct"], "correct");
    for (const auto& [tier, text] : f.elaborated) check_placeholders(text, env);
    if (f.correct) check_placeholders(*f.correct, env);
    return f;
  }

  Constraint constraint(const json& j, const std::set<std::string>& vocabulary) const {
    keys(j, "rule", {"id", "category", "description", "cr", "cs", "feedback", "enabled"});
    for (std::string_view required : {"category", "cs", "feedback"}) {
      if (!j.contains(required)) fail("rule needs '" + std::string(required) + "'");
    }
    Constraint c;
    c.id = rule_id_;
    std::string category = str(j["category"], "category");
    auto cat = rule_category_from_name(category);
    if (!cat) throw KbError(KbError::Code::UnknownCategory, document_, rule_id_, "unknown category '" + category + "'");
    c.category = *cat;
    if (j.contains("description")) c.description = str(j["description"], "description");
    Env env;
    c.relevance = relevance(j.value("cr", json::object()), vocabulary, env);
    c.satisfaction = predicate(j["cs"], env);
    c.feedback = feedback(j["feedback"], env);
    if (j.contains("enabled")) {
      if (!j["enabled"].is_boolean()) fail("'enabled' must be a boolean");
      c.enabled = j["enabled"].get<bool>();
    }
    c.source_document = document_;
    c.source_json = j.dump();
    return c;
  }

 private:
  std::string document_;
  std::string rule_id_;
};

}  // namespace

KbError::KbError(Code code, std::string document, std::string rule_id, const std::string& message)
    : std::runtime_error(document + (rule_id.empty() ? "" : " [" + rule_id + "]") + ": " + message),
      code_(code),
      document_(std::move(document)),
      rule_id_(std::move(rule_id)) {}

std::string_view KbError::code_name() const {
  switch (code_) {
    case Code::RuleParseError: return "RuleParseError";
    case Code::DuplicateRuleId: return "DuplicateRuleId";
    case Code::UnknownCategory: return "UnknownCategory";
    case Code::UnboundBindingInCs: return "UnboundBindingInCs";
  }
  return "?";
}

const Constraint* KnowledgeBase::find(std::string_view id) const {
  auto it = std::lower_bound(constraints_.begin(), constraints_.end(), id,
                             [](const Constraint& c, std::string_view key) { return c.id < key; });
  return it != constraints_.end() && it->id == id ? &*it : nullptr;
}

KnowledgeBase load_knowledge_base(const std::vector<RuleDocument>& documents) {
  KnowledgeBase kb;
  std::vector<std::pair<std::string, json>> parsed;
  std::set<std::string> versions;
  for (const RuleDocument& doc : documents) {
    json root;
    try {
      root = json::parse(doc.text);
    } catch (const json::parse_error& e) {
      throw KbError(KbError::Code::RuleParseError, doc.name, "", e.what());
    }
    RuleParser top(doc.name, "");
    top.keys(root, "rule document", {"version", "tag_vocabulary", "rules"});
    if (root.contains("version")) versions.insert(top.str(root["version"], "version"));
    if (root.contains("tag_vocabulary")) {
      for (const std::string& tag : top.str_list(root["tag_vocabulary"], "tag_vocabulary")) kb.tags_.insert(tag);
    }
    if (root.contains("rules") && !root["rules"].is_array()) top.fail("'rules' needs a list");
    parsed.emplace_back(doc.name, std::move(root));
  }
  std::map<std::string, std::string> seen;  // id -> document
  for (const auto& [name, root] : parsed) {
    if (!root.contains("rules")) continue;
    for (const json& rule : root["rules"]) {
      if (!rule.is_object() || !rule.contains("id") || !rule["id"].is_string() || rule["id"].get<std::string>().empty()) {
        throw KbError(KbError::Code::RuleParseError, name, "", "every rule needs a non-empty string id");
      }
      std::string id = rule["id"].get<std::string>();
      if (auto [it, inserted] = seen.emplace(id, name); !inserted) {
        throw KbError(KbError::Code::DuplicateRuleId, name, id, "rule id already defined in " + it->second);
      }
      kb.constraints_.push_back(RuleParser(name, id).constraint(rule, kb.tags_));
    }
  }
  std::sort(kb.constraints_.begin(), kb.constraints_.end(),
            [](const Constraint& a, const Constraint& b) { return a.id < b.id; });
  for (const std::string& v : versions) kb.version_ += (kb.version_.empty() ? "" : "+") + v;
  return kb;
}

KnowledgeBase load_knowledge_base_files(const std::vector<std::filesystem::path>& paths) {
  std::vector<std::filesystem::path> files;
  for (const auto& path : paths) {
    if (std::filesystem::is_directory(path)) {
      for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 11 && name.ends_with(".rules.json")) files.push_back(entry.path());
      }
    } else {
      files.push_back(path);
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RuleDocument> docs;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw KbError(KbError::Code::RuleParseError, file.string(), "", "cannot read file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    docs.push_back(RuleDocument{file.filename().string(), buffer.str()});
  }
  return load_knowledge_base(docs);
}

std::map<RuleCategory, std::size_t> kb_stats(const KnowledgeBase& kb) {
  std::map<RuleCategory, std::size_t> out;
  for (RuleCategory c : kAllRuleCategories) out[c] = 0;
  for (const Constraint& c : kb.constraints()) ++out[c.category];
  return out;
}

}  // namespace tutor::rules
