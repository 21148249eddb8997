#include "rule_gen.hpp"

namespace tutor::testing {

using nlohmann::json;

namespace {

const std::vector<std::string> kKinds = {"declaration", "assignment",    "if",      "switch",        "for_loop",
                                         "while_loop",  "do_while_loop", "function_def", "function_call", "return",
                                         "preprocessor", "file_op",      "mem_alloc", "mem_free",     "output",
                                         "input",       "break",         "continue"};
const std::vector<std::string> kFields = {"name",   "type",   "init",   "target", "value", "cond",  "format", "args",
                                          "op",     "handle", "return_type", "subject", "count", "elem_type", "call",
                                          "id",     "kind",   "argument", "targets"};
const std::vector<std::string> kExprFields = {"init", "target", "value", "cond", "args", "handle", "count", "call"};
const std::vector<std::string> kLiterals = {"a", "b", "p", "main", "helper", "int", "0", "1", "f", "stdio.h", "open"};
const std::vector<std::string> kCategories = {"int", "float", "char", "void", "pointer", "array", "struct", "file"};
const std::vector<std::string> kExprKinds = {"binary", "unary", "call", "deref", "index", "address_of", "assign", "member"};
const std::vector<std::string> kRuleCategories = {"SolutionMethods", "MissingReferences", "Pointer", "Memory",
                                                  "File",            "Functions",         "DataTypes", "Syntax"};

class Gen {
 public:
  explicit Gen(std::mt19937_64& rng) : rng_(rng) {}

  int roll(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool chance(int percent) { return roll(100) < percent; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(roll(static_cast<int>(v.size())))];
  }

  json kinds() {
    json out = json::array();
    int n = 1 + roll(3);
    for (int i = 0; i < n; ++i) out.push_back(pick(kKinds));
    return out;
  }

  json ref(const std::vector<std::string>& bound, const std::vector<std::string>& fields) {
    return pick(bound) + "." + pick(fields);
  }

  json attr_test(const std::vector<std::string>& bound) {
    json t;
    t["field"] = pick(kFields);
    switch (roll(6)) {
      case 0:
        t["equals"] = !bound.empty() && chance(40) ? json{{"ref", ref(bound, kFields).get<std::string>()}}
                                                   : json(pick(kLiterals));
        break;
      case 1:
        t["not_equals"] = pick(kLiterals);
        break;
      case 2:
        t["in"] = json::array({pick(kLiterals), pick(kLiterals)});
        break;
      case 3:
        t["present"] = chance(50);
        break;
      case 4:
        if (chance(50)) t["field"] = "*";
        t["calls"] = json::array({pick(std::vector<std::string>{"helper", "sqrt", "strlen", "missing", "abs"})});
        break;
      default:
        t["type_kind"] = json::array({pick(kCategories), pick(kCategories)});
        break;
    }
    if (chance(20)) t["negate"] = true;
    return t;
  }

  void query(json& q, const std::vector<std::string>& bound) {
    if (chance(70)) q["kind"] = kinds();
    if (!bound.empty()) {
      if (chance(30)) q["within"] = pick(bound);
      if (chance(20)) q["before"] = pick(bound);
      if (chance(20)) q["after"] = pick(bound);
    }
    if (chance(50)) q["where"] = json::array({attr_test(bound)});
  }

  json predicate(std::vector<std::string> bound, int depth) {
    int choice = roll(depth > 0 ? 16 : 13);
    if (bound.empty() && choice >= 2 && choice <= 12) choice = chance(50) ? 0 : 1;
    switch (choice) {
      case 0: {
        json q = json::object();
        query(q, bound);
        if (depth > 0 && chance(40)) {
          std::string name = "e" + std::to_string(bound.size());
          q["bind"] = name;
          bound.push_back(name);
          q["that"] = predicate(bound, depth - 1);
        }
        return {{"exists", q}};
      }
      case 1: {
        json q = json::object();
        query(q, bound);
        q["n"] = 1 + roll(3);
        return {{"count_at_least", q}};
      }
      case 2: {
        json right = ref(bound, kExprFields);
        if (chance(30)) right = json{{"ref", pick(bound) + ".elem_type"}, {"pointer_to", true}};
        return {{"type_equals", {{"left", ref(bound, {"type", "init", "target", "value", "return_type"})}, {"right", right}}}};
      }
      case 3:
        return {{"type_is", {{"ref", ref(bound, kExprFields)}, {"in", json::array({pick(kCategories), pick(kCategories)})}}}};
      case 4:
        return {{"attr_equals", {{"left", ref(bound, kFields)},
                                 {"right", chance(50) ? json(pick(kLiterals)) : json{{"ref", ref(bound, kFields)}}}}}};
      case 5: {
        json t = attr_test(bound);
        t["of"] = pick(bound);
        return {{"attr", t}};
      }
      case 6: {
        json body = {{"of", pick(bound)}};
        if (chance(30)) body["fields"] = json::array({pick(kExprFields)});
        return {{"declared_before_use", body}};
      }
      case 7:
        return {{"valid_expr", {{"ref", ref(bound, kExprFields)}}}};
      case 8: {
        json body = {{"of", pick(bound)}};
        if (chance(30)) body["fields"] = json::array({pick(kExprFields)});
        if (chance(40)) body["nodes"] = json::array({pick(kExprKinds)});
        if (chance(30)) body["except"] = json::array({pick(kExprKinds)});
        return {{"well_typed", body}};
      }
      case 9:
        return {{"inside", {{"of", pick(bound)}, {"kind", kinds()}}}};
      case 10:
        return {{"format_args", {{"of", pick(bound)}, {"check", chance(50) ? "count" : "types"}}}};
      case 11: {
        json body = {{"name", chance(50) ? json(pick(kLiterals)) : json{{"ref", ref(bound, {"name", "target"})}}},
                     {"as", pick(std::vector<std::string>{"call", "var", "any"})}};
        if (chance(40)) body["within"] = pick(bound);
        if (chance(40)) body["exclude"] = pick(bound);
        return {{"mentions", body}};
      }
      case 12:
        return {{"calls_resolve", {{"of", pick(bound)}}}};
      case 13:
        return {{"not", predicate(bound, depth - 1)}};
      case 14:
        return {{"all", json::array({predicate(bound, depth - 1), predicate(bound, depth - 1)})}};
      default:
        return {{"any", json::array({predicate(bound, depth - 1), predicate(bound, depth - 1)})}};
    }
  }

  json rule(const std::string& id) {
    json cr = json::object();
    if (chance(25)) cr["tags"] = json::array({pick(kRandomTags)});
    std::vector<std::string> bound;
    int matchers = roll(3);
    json match = json::array();
    for (int i = 0; i < matchers; ++i) {
      json m = json::object();
      query(m, bound);
      std::string name = i == 0 ? "a" : "b";
      m["bind"] = name;
      if (chance(15)) m["first"] = true;
      match.push_back(m);
      bound.push_back(name);
    }
    if (!match.empty()) cr["match"] = match;
    json r = {{"id", id}, {"category", pick(kRuleCategories)}, {"cr", cr}, {"cs", predicate(bound, 2)},
              {"feedback", {{"elaborated", "generated rule " + id}}}};
    if (chance(10)) r["enabled"] = false;
    return r;
  }

 private:
  std::mt19937_64& rng_;
};

}  // namespace

json random_rule_document(std::mt19937_64& rng, int count, const std::string& prefix) {
  Gen gen(rng);
  json rules = json::array();
  for (int i = 0; i < count; ++i) rules.push_back(gen.rule(prefix + std::to_string(i)));
  return {{"version", "gen"}, {"tag_vocabulary", kRandomTags}, {"rules", rules}};
}

}  // namespace tutor::testing
