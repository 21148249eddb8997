#include "tutor/model/templates.hpp"

#include <algorithm>

namespace tutor::model {

std::string_view field_type_name(FieldType t) {
  switch (t) {
    case FieldType::Identifier: return "identifier";
    case FieldType::Text: return "text";
    case FieldType::Index: return "index";
    case FieldType::Type: return "type";
    case FieldType::Expr: return "expr";
    case FieldType::ExprList: return "expr_list";
    case FieldType::Params: return "params";
    case FieldType::Cases: return "cases";
  }
  return "?";
}

const FieldSpec* Template::field(std::string_view field_name) const {
  for (const FieldSpec& f : fields) {
    if (f.name == field_name) return &f;
  }
  return nullptr;
}

namespace {

using FT = FieldType;

Template make(std::string name, LayerClass cls, BlockKind kind, std::vector<FieldSpec> fields) {
  return Template{std::move(name), cls, std::move(fields), {kind}};
}

}  // namespace

TemplateRegistry TemplateRegistry::with_builtins() {
  constexpr auto B = LayerClass::Basic;
  constexpr auto A = LayerClass::Advanced;
  TemplateRegistry r;
  std::vector<Template> builtins = {
      make("declaration", B, BlockKind::Declaration,
           {{"name", FT::Identifier}, {"type", FT::Type}, {"init", FT::Expr, false}}),
      make("assignment", B, BlockKind::Assignment, {{"target", FT::Expr}, {"value", FT::Expr}}),
      make("if_else", A, BlockKind::If, {{"cond", FT::Expr}, {"else_from", FT::Index, false}}),
      make("switch_case", A, BlockKind::Switch, {{"subject", FT::Expr}, {"cases", FT::Cases}}),
      make("for_loop", A, BlockKind::ForLoop,
           {{"init", FT::Expr, false}, {"cond", FT::Expr, false}, {"step", FT::Expr, false}}),
      make("while_loop", A, BlockKind::WhileLoop, {{"cond", FT::Expr}}),
      make("do_while_loop", A, BlockKind::DoWhileLoop, {{"cond", FT::Expr}}),
      make("function_def", A, BlockKind::FunctionDef,
           {{"name", FT::Identifier}, {"return_type", FT::Type}, {"params", FT::Params, false}}),
      make("function_call", B, BlockKind::FunctionCall, {{"call", FT::Expr}}),
      make("return_stmt", B, BlockKind::Return, {{"value", FT::Expr, false}}),
      make("preprocessor", B, BlockKind::Preprocessor,
           {{"directive", FT::Identifier}, {"argument", FT::Text, false}}),
      make("struct_def", B, BlockKind::StructDef, {{"name", FT::Identifier}, {"fields", FT::Params}}),
      make("file_op", B, BlockKind::FileOp,
           {{"op", FT::Identifier},
            {"handle", FT::Expr},
            {"path", FT::Text, false},
            {"mode", FT::Text, false},
            {"format", FT::Text, false},
            {"args", FT::ExprList, false},
            {"targets", FT::ExprList, false}}),
      make("mem_alloc", B, BlockKind::MemAlloc,
           {{"target", FT::Expr}, {"elem_type", FT::Type}, {"count", FT::Expr}}),
      make("mem_free", B, BlockKind::MemFree, {{"target", FT::Expr}}),
      make("printf_call", B, BlockKind::Output, {{"format", FT::Text}, {"args", FT::ExprList, false}}),
      make("scanf_call", B, BlockKind::Input, {{"targets", FT::ExprList}}),
      make("break_stmt", B, BlockKind::Break, {}),
      make("continue_stmt", B, BlockKind::Continue, {}),
  };
  for (Template& t : builtins) {
    BlockKind kind = *t.binds_block_kinds.begin();
    r.builtin_by_kind_[kind] = t.name;
    r.register_template(std::move(t));
  }
  return r;
}

const TemplateRegistry& TemplateRegistry::builtin() {
  static const TemplateRegistry registry = with_builtins();
  return registry;
}

void TemplateRegistry::register_template(Template t) {
  if (templates_.count(t.name) != 0) throw DuplicateTemplate(t.name);
  for (std::size_t i = 0; i < t.fields.size(); ++i) {
    for (std::size_t j = i + 1; j < t.fields.size(); ++j) {
      if (t.fields[i].name == t.fields[j].name) {
        throw std::invalid_argument("template " + t.name + " repeats field " + t.fields[i].name);
      }
    }
  }
  std::string name = t.name;
  templates_.emplace(std::move(name), std::move(t));
}

const Template* TemplateRegistry::find(std::string_view name) const {
  auto it = templates_.find(name);
  return it == templates_.end() ? nullptr : &it->second;
}

const Template& TemplateRegistry::builtin_for(BlockKind kind) const {
  return templates_.find(builtin_by_kind_.at(kind))->second;
}

std::vector<std::string> TemplateRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : templates_) out.push_back(name);
  return out;
}

}  // namespace tutor::model
