#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/model/program.hpp"
#include "tutor/model/templates.hpp"

namespace tutor::model {

inline constexpr std::size_t kMaxExprDepth = 64;

enum class DefectKind {
  MissingEntryFunction,
  DuplicateEntryFunction,
  DuplicateId,
  EmptyId,
  DisallowedLayer,
  UnknownTemplate,
  LayerMismatch,
  ChildrenNotAllowed,
  MissingField,
  UnknownField,
  InvalidAttribute,
  MisplacedDefinition,
  UnresolvedStruct,
  DuplicateStruct,
  PointerTooDeep,
  ExpressionTooDeep,
};

std::string_view defect_kind_name(DefectKind kind);

struct Defect {
  DefectKind kind;
  std::vector<std::string> block_ids;
  std::string message;
};

struct ValidationReport {
  std::vector<Defect> defects;

  bool ok() const { return defects.empty(); }
  bool has(DefectKind kind) const;
  std::string to_string() const;
};

/// Structural legality of a program. `allowed_layers` restricts which layer
/// templates may appear; nullopt allows every registered template.
ValidationReport validate_program(const Program& program,
                                  const std::optional<std::set<std::string>>& allowed_layers = std::nullopt,
                                  const TemplateRegistry& registry = TemplateRegistry::builtin());

struct NodeEntry {
  std::string block_id;
  BlockKind kind;
  const Block* block;                  // borrowed from the enumerated program
  std::vector<std::string> ancestors;  // enclosing block ids, root first
};

/// Pre-order listing of blocks, optionally restricted to `filter` kinds.
std::vector<NodeEntry> enumerate_nodes(const Program& program,
                                       const std::optional<std::set<BlockKind>>& filter = std::nullopt);

}  // namespace tutor::model
