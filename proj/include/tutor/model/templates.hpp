#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/model/program.hpp"

namespace tutor::model {

/// Semantic type of a block attribute. Drives decoding and rule predicates.
enum class FieldType { Identifier, Text, Index, Type, Expr, ExprList, Params, Cases };

std::string_view field_type_name(FieldType t);

struct FieldSpec {
  std::string name;
  FieldType type = FieldType::Text;
  bool required = true;
};

/// Workspace layer template. Built-ins exist for every block kind; teachers
/// may register extra templates (e.g. an algorithm skeleton bound to
/// function_def) that tighten which fields must be filled in.
struct Template {
  std::string name;
  LayerClass layer_class = LayerClass::Basic;
  std::vector<FieldSpec> fields;
  std::set<BlockKind> binds_block_kinds;

  const FieldSpec* field(std::string_view field_name) const;
};

class DuplicateTemplate : public std::runtime_error {
 public:
  explicit DuplicateTemplate(const std::string& name)
      : std::runtime_error("template already registered: " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class TemplateRegistry {
 public:
  /// Registry holding one built-in template per block kind.
  static TemplateRegistry with_builtins();
  /// Process-wide immutable instance of with_builtins().
  static const TemplateRegistry& builtin();

  /// Throws DuplicateTemplate. Template field names must be unique.
  void register_template(Template t);

  const Template* find(std::string_view name) const;
  /// The built-in template bound to `kind`; always exists.
  const Template& builtin_for(BlockKind kind) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Template, std::less<>> templates_;
  std::map<BlockKind, std::string> builtin_by_kind_;
};

}  // namespace tutor::model
