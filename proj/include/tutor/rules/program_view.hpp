#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tutor/model/program.hpp"
#include "tutor/model/typing.hpp"

namespace tutor::rules {

/// Flattened, indexed view of a program for repeated rule queries. Blocks
/// are numbered in pre-order; a block's subtree is [pos, subtree_end(pos)).
class ProgramView {
 public:
  explicit ProgramView(const model::Program& program);

  std::size_t size() const { return blocks_.size(); }
  const model::Block& block(std::size_t pos) const { return *blocks_[pos]; }
  std::size_t subtree_end(std::size_t pos) const { return ends_[pos]; }
  /// Parent position, or SIZE_MAX at top level.
  std::size_t parent(std::size_t pos) const { return parents_[pos]; }

  /// Positions of blocks whose kind is in `kinds` (all when empty), ascending.
  std::vector<std::size_t> candidates(const std::set<model::BlockKind>& kinds) const;

  const model::Scope* scope(std::size_t pos) const;

  /// Canonical text of an attribute; "id" and "kind" name the block itself.
  std::optional<std::string> attr_text(std::size_t pos, std::string_view field) const;
  /// Attribute exists and is non-empty.
  bool attr_present(std::size_t pos, std::string_view field) const;
  /// Declared type of a Type field, or inferred type of an Expr field in the
  /// block's scope. Empty when absent or ill-typed. Cached.
  std::optional<model::DataType> type_of(std::size_t pos, std::string_view field) const;

  /// Expressions of one field, or of every expression field when `field` is "*".
  std::vector<const model::Expr*> expressions(std::size_t pos, std::string_view field) const;
  /// Expressions of the listed fields, or of every field when `fields` is empty.
  std::vector<const model::Expr*> expressions_in(std::size_t pos, const std::vector<std::string>& fields) const;

 private:
  void flatten(const std::vector<model::Block>& list, std::size_t parent);

  std::vector<const model::Block*> blocks_;
  std::vector<std::size_t> ends_;
  std::vector<std::size_t> parents_;
  std::array<std::vector<std::size_t>, model::kBlockKindCount> by_kind_;
  model::ScopeTable scopes_;
  mutable std::map<std::pair<std::size_t, std::string>, std::optional<model::DataType>, std::less<>> type_cache_;
};

/// Canonical text of an attribute value (expressions printed canonically).
std::string attr_value_text(const model::AttrValue& value);

}  // namespace tutor::rules
