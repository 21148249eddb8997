#include "tutor/codec/solution_codec.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include <json.hpp>

#include "tutor/codec/expression_parser.hpp"
#include "tutor/codec/lessons.hpp"

namespace tutor::codec {

using nlohmann::json;
using nlohmann::ordered_json;
using model::Block;
using model::BlockKind;
using model::FieldType;

namespace {

constexpr std::size_t kMaxBlockNesting = 128;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

json parse_json(std::string_view document) {
  try {
    return json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based; translate to line/column.
    std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, document.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < limit; ++i) {
      if (document[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string message = e.what();
    if (auto cut = message.find("parse error"); cut != std::string::npos) message = message.substr(cut);
    throw CodecError::syntax(line, column, message);
  }
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw CodecError::at_path(path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw CodecError::at_path(path + "/" + key, "unknown field '" + key + "'");
    }
  }
}

const std::string& get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw CodecError::at_path(path, "expected a string");
  return j.get_ref<const std::string&>();
}

std::int64_t get_int(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) {
    auto v = j.get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw CodecError::at_path(path, "integer out of range");
    }
    return static_cast<std::int64_t>(v);
  }
  if (!j.is_number_integer()) throw CodecError::at_path(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::size_t get_index(const json& j, const std::string& path) {
  std::int64_t v = get_int(j, path);
  if (v < 0) throw CodecError::at_path(path, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

const json& require_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw CodecError::at_path(path, "expected an array");
  return j;
}

model::DataType get_type(const json& j, const std::string& path) {
  auto t = model::parse_type(get_string(j, path));
  if (!t) throw CodecError::at_path(path, "invalid type '" + j.get<std::string>() + "'");
  return *t;
}

std::string get_identifier(const json& j, const std::string& path) {
  const std::string& s = get_string(j, path);
  if (!model::is_identifier(s)) throw CodecError::at_path(path, "'" + s + "' is not an identifier");
  return s;
}

model::Expr parse_expr_text(std::string_view text, const std::string& block_id, const std::string& field) {
  try {
    return parse_expression(text);
  } catch (const ExpressionSyntaxError& e) {
    CodecError err(CodecError::Code::ExpressionParse,
                   "block " + block_id + ", field " + field + ": " + e.what());
    err.with_subject(block_id);
    throw err;
  }
}

std::vector<model::Param> get_params(const json& j, const std::string& path) {
  std::vector<model::Param> out;
  std::size_t i = 0;
  for (const json& item : require_array(j, path)) {
    std::string at = path + "/" + std::to_string(i++);
    require_object(item, at);
    reject_unknown(item, at, {"name", "type"});
    if (!item.contains("name") || !item.contains("type")) throw CodecError::at_path(at, "needs name and type");
    out.push_back(model::Param{get_identifier(item["name"], at + "/name"), get_type(item["type"], at + "/type")});
  }
  return out;
}

std::vector<model::CaseLabel> get_cases(const json& j, const std::string& path) {
  std::vector<model::CaseLabel> out;
  std::size_t i = 0;
  for (const json& item : require_array(j, path)) {
    std::string at = path + "/" + std::to_string(i++);
    require_object(item, at);
    reject_unknown(item, at, {"label", "start"});
    if (!item.contains("label") || !item.contains("start")) throw CodecError::at_path(at, "needs label and start");
    model::CaseLabel c;
    const json& label = item["label"];
    if (label.is_string()) {
      if (label.get<std::string>() != "default") throw CodecError::at_path(at + "/label", "expected an integer or \"default\"");
    } else {
      c.value = get_int(label, at + "/label");
    }
    c.start = get_index(item["start"], at + "/start");
    out.push_back(c);
  }
  return out;
}

model::AttrValue decode_attr(const model::FieldSpec& spec, const json& j, const std::string& path,
                             const std::string& block_id) {
  switch (spec.type) {
    case FieldType::Identifier: return get_identifier(j, path);
    case FieldType::Text: return get_string(j, path);
    case FieldType::Index: return get_int(j, path);
    case FieldType::Type: return get_type(j, path);
    case FieldType::Expr: {
      std::string_view text = trim(get_string(j, path));
      if (text.empty()) return model::ExprSlot{};
      return model::ExprSlot{parse_expr_text(text, block_id, spec.name)};
    }
    case FieldType::ExprList: {
      std::vector<model::Expr> out;
      std::size_t i = 0;
      for (const json& item : require_array(j, path)) {
        std::string_view text = trim(get_string(item, path + "/" + std::to_string(i++)));
        out.push_back(parse_expr_text(text, block_id, spec.name));
      }
      return out;
    }
    case FieldType::Params: return get_params(j, path);
    case FieldType::Cases: return get_cases(j, path);
  }
  throw CodecError::at_path(path, "unsupported field");
}

class SolutionDecoder {
 public:
  explicit SolutionDecoder(const model::TemplateRegistry& registry) : registry_(registry) {}

  model::Program decode(const json& root, const std::string& path) {
    require_object(root, path);
    reject_unknown(root, path, {"blocks"});
    std::vector<Block> blocks;
    if (root.contains("blocks")) blocks = decode_list(root["blocks"], path + "/blocks", 0);
    return model::Program::from_blocks(std::move(blocks));
  }

 private:
  std::vector<Block> decode_list(const json& j, const std::string& path, std::size_t depth) {
    if (depth > kMaxBlockNesting) throw CodecError::at_path(path, "blocks nested too deeply");
    std::vector<Block> out;
    std::size_t i = 0;
    for (const json& item : require_array(j, path)) {
      out.push_back(decode_block(item, path + "/" + std::to_string(i++), depth));
    }
    return out;
  }

  Block decode_block(const json& j, const std::string& path, std::size_t depth) {
    require_object(j, path);
    reject_unknown(j, path, {"id", "kind", "attrs", "children", "layer"});
    if (!j.contains("id")) throw CodecError::at_path(path, "block needs an id");
    if (!j.contains("kind")) throw CodecError::at_path(path, "block needs a kind");
    Block b;
    b.id = get_string(j["id"], path + "/id");
    const std::string& kind_name = get_string(j["kind"], path + "/kind");
    auto kind = model::block_kind_from_name(kind_name);
    if (!kind) {
      CodecError err(CodecError::Code::UnknownBlockKind, "unknown block kind '" + kind_name + "' at " + path);
      err.with_subject(kind_name);
      throw err;
    }
    b.kind = *kind;
    const model::Template& schema = registry_.builtin_for(b.kind);
    if (j.contains("layer")) {
      b.layer.template_name = get_string(j["layer"], path + "/layer");
      const model::Template* t = registry_.find(b.layer.template_name);
      b.layer.layer_class = t ? t->layer_class : model::LayerClass::Basic;
    } else {
      b.layer = model::LayerTag{schema.layer_class, schema.name};
    }
    if (j.contains("attrs")) {
      const json& attrs = j["attrs"];
      require_object(attrs, path + "/attrs");
      for (const auto& [key, value] : attrs.items()) {
        const model::FieldSpec* spec = schema.field(key);
        if (spec == nullptr) {
          throw CodecError::at_path(path + "/attrs/" + key,
                                    "unknown field '" + key + "' for " + std::string(model::block_kind_name(b.kind)));
        }
        b.attrs.emplace(key, decode_attr(*spec, value, path + "/attrs/" + key, b.id));
      }
    }
    if (j.contains("children")) b.children = decode_list(j["children"], path + "/children", depth + 1);
    return b;
  }

  const model::TemplateRegistry& registry_;
};

ordered_json encode_attr(const model::AttrValue& value) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string> || std::is_same_v<T, std::int64_t>) {
          return v;
        } else if constexpr (std::is_same_v<T, model::DataType>) {
          return v.to_string();
        } else if constexpr (std::is_same_v<T, model::ExprSlot>) {
          return v ? print_expression(*v) : std::string();
        } else if constexpr (std::is_same_v<T, std::vector<model::Expr>>) {
          ordered_json arr = ordered_json::array();
          for (const model::Expr& e : v) arr.push_back(print_expression(e));
          return arr;
        } else if constexpr (std::is_same_v<T, std::vector<model::Param>>) {
          ordered_json arr = ordered_json::array();
          for (const model::Param& p : v) arr.push_back(ordered_json{{"name", p.name}, {"type", p.type.to_string()}});
          return arr;
        } else {
          ordered_json arr = ordered_json::array();
          for (const model::CaseLabel& c : v) {
            ordered_json label = c.value ? ordered_json(*c.value) : ordered_json("default");
            arr.push_back(ordered_json{{"label", label}, {"start", c.start}});
          }
          return arr;
        }
      },
      value);
}

ordered_json encode_blocks(const std::vector<Block>& blocks, const model::TemplateRegistry& registry) {
  ordered_json arr = ordered_json::array();
  for (const Block& b : blocks) {
    ordered_json node;
    node["id"] = b.id;
    node["kind"] = std::string(model::block_kind_name(b.kind));
    const model::Template& schema = registry.builtin_for(b.kind);
    if (b.layer.template_name != schema.name) node["layer"] = b.layer.template_name;
    ordered_json attrs = ordered_json::object();
    // Template order first, then anything the schema does not know.
    for (const model::FieldSpec& f : schema.fields) {
      auto it = b.attrs.find(f.name);
      if (it != b.attrs.end()) attrs[f.name] = encode_attr(it->second);
    }
    for (const auto& [name, value] : b.attrs) {
      if (schema.field(name) == nullptr) attrs[name] = encode_attr(value);
    }
    node["attrs"] = std::move(attrs);
    if (!b.children.empty()) node["children"] = encode_blocks(b.children, registry);
    arr.push_back(std::move(node));
  }
  return arr;
}

ordered_json encode_program(const model::Program& program, const model::TemplateRegistry& registry) {
  ordered_json root;
  root["blocks"] = encode_blocks(program.blocks, registry);
  return root;
}

std::set<std::string> get_string_set(const json& j, const std::string& path) {
  std::set<std::string> out;
  std::size_t i = 0;
  for (const json& item : require_array(j, path)) out.insert(get_string(item, path + "/" + std::to_string(i++)));
  return out;
}

}  // namespace

CodecError CodecError::syntax(std::size_t line, std::size_t column, const std::string& message) {
  CodecError err(Code::Syntax, "syntax error at line " + std::to_string(line) + ", column " +
                                   std::to_string(column) + ": " + message);
  err.line_ = line;
  err.column_ = column;
  return err;
}

CodecError CodecError::at_path(const std::string& path, const std::string& message) {
  CodecError err(Code::Syntax, "syntax error at " + (path.empty() ? std::string("/") : path) + ": " + message);
  err.path_ = path;
  return err;
}

std::string_view CodecError::code_name() const {
  switch (code_) {
    case Code::Syntax: return "SyntaxError";
    case Code::UnknownBlockKind: return "UnknownBlockKind";
    case Code::ExpressionParse: return "ExpressionParseError";
    case Code::InvalidReferenceSolution: return "InvalidReferenceSolution";
    case Code::UnknownTag: return "UnknownTag";
    case Code::UnknownLesson: return "UnknownLesson";
    case Code::InvalidScoringLimits: return "InvalidScoringLimits";
  }
  return "?";
}

model::Program parse_solution(std::string_view document, const model::TemplateRegistry& registry) {
  if (trim(document).empty()) return model::Program{};
  json root = parse_json(document);
  return SolutionDecoder(registry).decode(root, "");
}

std::string serialize_solution(const model::Program& program, const model::TemplateRegistry& registry) {
  return encode_program(program, registry).dump(2) + "\n";
}

Exercise parse_exercise(std::string_view document, const std::set<std::string>& tag_vocabulary,
                        const model::TemplateRegistry& registry) {
  json root = parse_json(document);
  require_object(root, "");
  reject_unknown(root, "",
                 {"id", "lesson_id", "problem_text", "allowed_layers", "problem_tags", "reference_solution",
                  "scoring_limits", "rule_overrides", "expected_stdout", "stdin_script", "feedback_kind"});
  for (std::string_view key : {"id", "lesson_id", "problem_text", "allowed_layers", "reference_solution", "scoring_limits"}) {
    if (!root.contains(key)) throw CodecError::at_path("/" + std::string(key), "required field is missing");
  }
  Exercise ex;
  ex.id = get_string(root["id"], "/id");
  if (ex.id.empty()) throw CodecError::at_path("/id", "exercise id must not be empty");
  ex.lesson_id = get_string(root["lesson_id"], "/lesson_id");
  if (find_lesson(ex.lesson_id) == nullptr) {
    CodecError err(CodecError::Code::UnknownLesson, "unknown lesson '" + ex.lesson_id + "'");
    err.with_subject(ex.lesson_id);
    throw err;
  }
  ex.problem_text = get_string(root["problem_text"], "/problem_text");
  ex.allowed_layers = get_string_set(root["allowed_layers"], "/allowed_layers");
  for (const std::string& layer : ex.allowed_layers) {
    if (registry.find(layer) == nullptr) throw CodecError::at_path("/allowed_layers", "unknown layer template '" + layer + "'");
  }
  if (root.contains("problem_tags")) {
    ex.problem_tags = get_string_set(root["problem_tags"], "/problem_tags");
    for (const std::string& tag : ex.problem_tags) {
      if (tag_vocabulary.count(tag) == 0) {
        CodecError err(CodecError::Code::UnknownTag, "unknown problem tag '" + tag + "'");
        err.with_subject(tag);
        throw err;
      }
    }
  }

  const json& limits = root["scoring_limits"];
  require_object(limits, "/scoring_limits");
  reject_unknown(limits, "/scoring_limits", {"time_limit_seconds", "feedback_limit"});
  if (!limits.contains("time_limit_seconds") || !limits.contains("feedback_limit")) {
    throw CodecError::at_path("/scoring_limits", "needs time_limit_seconds and feedback_limit");
  }
  ex.scoring_limits.time_limit_seconds = get_int(limits["time_limit_seconds"], "/scoring_limits/time_limit_seconds");
  ex.scoring_limits.feedback_limit = get_int(limits["feedback_limit"], "/scoring_limits/feedback_limit");
  if (ex.scoring_limits.time_limit_seconds <= 0 || ex.scoring_limits.feedback_limit <= 0) {
    throw CodecError(CodecError::Code::InvalidScoringLimits, "scoring limits must be strictly positive");
  }

  if (root.contains("rule_overrides")) {
    std::size_t i = 0;
    for (const json& item : require_array(root["rule_overrides"], "/rule_overrides")) {
      std::string at = "/rule_overrides/" + std::to_string(i++);
      require_object(item, at);
      reject_unknown(item, at, {"id", "enabled"});
      if (!item.contains("id") || !item.contains("enabled") || !item["enabled"].is_boolean()) {
        throw CodecError::at_path(at, "needs id and boolean enabled");
      }
      ex.rule_overrides.push_back(RuleOverride{get_string(item["id"], at + "/id"), item["enabled"].get<bool>()});
    }
  }
  if (root.contains("expected_stdout")) ex.expected_stdout = get_string(root["expected_stdout"], "/expected_stdout");
  if (root.contains("stdin_script")) {
    std::size_t i = 0;
    for (const json& item : require_array(root["stdin_script"], "/stdin_script")) {
      ex.stdin_script.push_back(get_string(item, "/stdin_script/" + std::to_string(i++)));
    }
  }
  if (root.contains("feedback_kind")) {
    const std::string& name = get_string(root["feedback_kind"], "/feedback_kind");
    ex.feedback_kind = feedback::feedback_kind_from_name(name);
    if (!ex.feedback_kind) throw CodecError::at_path("/feedback_kind", "unknown feedback kind '" + name + "'");
  }

  ex.reference_solution = SolutionDecoder(registry).decode(root["reference_solution"], "/reference_solution");
  model::ValidationReport report = model::validate_program(ex.reference_solution, ex.allowed_layers, registry);
  if (!report.ok()) {
    CodecError err(CodecError::Code::InvalidReferenceSolution, "reference solution is invalid:\n" + report.to_string());
    err.with_report(std::move(report));
    throw err;
  }
  return ex;
}

std::string serialize_exercise(const Exercise& ex, const model::TemplateRegistry& registry) {
  ordered_json root;
  root["id"] = ex.id;
  root["lesson_id"] = ex.lesson_id;
  root["problem_text"] = ex.problem_text;
  root["allowed_layers"] = ex.allowed_layers;
  root["problem_tags"] = ex.problem_tags;
  root["reference_solution"] = encode_program(ex.reference_solution, registry);
  root["scoring_limits"] = {{"time_limit_seconds", ex.scoring_limits.time_limit_seconds},
                            {"feedback_limit", ex.scoring_limits.feedback_limit}};
  ordered_json overrides = ordered_json::array();
  for (const RuleOverride& o : ex.rule_overrides) overrides.push_back({{"id", o.rule_id}, {"enabled", o.enabled}});
  root["rule_overrides"] = std::move(overrides);
  if (ex.expected_stdout) root["expected_stdout"] = *ex.expected_stdout;
  if (!ex.stdin_script.empty()) root["stdin_script"] = ex.stdin_script;
  if (ex.feedback_kind) root["feedback_kind"] = std::string(feedback::feedback_kind_name(*ex.feedback_kind));
  return root.dump(2) + "\n";
}

}  // namespace tutor::codec
