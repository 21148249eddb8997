#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tutor/model/data_type.hpp"
#include "tutor/model/expression.hpp"

namespace tutor::model {

enum class BlockKind {
  Declaration,
  Assignment,
  If,
  Switch,
  ForLoop,
  WhileLoop,
  DoWhileLoop,
  FunctionDef,
  FunctionCall,
  Return,
  Preprocessor,
  StructDef,
  FileOp,
  MemAlloc,
  MemFree,
  Output,
  Input,
  Break,
  Continue,
};

inline constexpr std::size_t kBlockKindCount = 19;

/// Wire name, e.g. "for_loop".
std::string_view block_kind_name(BlockKind kind);
std::optional<BlockKind> block_kind_from_name(std::string_view name);
const std::vector<BlockKind>& all_block_kinds();

/// If, Switch, loops and FunctionDef may own children.
bool is_control_kind(BlockKind kind);
bool is_loop_kind(BlockKind kind);

enum class LayerClass { Basic, Advanced };
std::string_view layer_class_name(LayerClass c);

struct LayerTag {
  LayerClass layer_class = LayerClass::Basic;
  std::string template_name;

  friend bool operator==(const LayerTag&, const LayerTag&) = default;
};

/// A named, typed slot: function parameter or struct field.
struct Param {
  std::string name;
  DataType type;

  friend bool operator==(const Param&, const Param&) = default;
};

/// Switch label; `value` empty means `default`. Execution of the case starts
/// at children[start].
struct CaseLabel {
  std::optional<std::int64_t> value;
  std::size_t start = 0;

  friend bool operator==(const CaseLabel&, const CaseLabel&) = default;
};

/// An expression slot; empty when the author left the field blank.
using ExprSlot = std::optional<Expr>;

using AttrValue = std::variant<std::string,            // identifier or free text
                               std::int64_t,           // index
                               DataType,               // type
                               ExprSlot,               // expression
                               std::vector<Expr>,      // expression list
                               std::vector<Param>,     // parameter / field list
                               std::vector<CaseLabel>  // switch labels
                               >;

struct Block {
  std::string id;
  BlockKind kind = BlockKind::Declaration;
  std::map<std::string, AttrValue, std::less<>> attrs;
  std::vector<Block> children;
  LayerTag layer;

  bool has(std::string_view field) const { return attrs.find(field) != attrs.end(); }
  /// Text attribute or empty string.
  const std::string& text(std::string_view field) const;
  /// Expression attribute if present and non-empty.
  const Expr* expr(std::string_view field) const;
  const DataType* type(std::string_view field) const;
  const std::vector<Expr>& exprs(std::string_view field) const;
  const std::vector<Param>& params(std::string_view field) const;
  const std::vector<CaseLabel>& cases(std::string_view field) const;
  std::optional<std::int64_t> index(std::string_view field) const;

  friend bool operator==(const Block& a, const Block& b);
};

struct Program {
  std::vector<Block> blocks;
  /// Derived from StructDef blocks by index_structs().
  std::map<std::string, std::vector<Param>, std::less<>> struct_defs;
  std::string entry_function = "main";

  static Program from_blocks(std::vector<Block> blocks);
  void index_structs();
  std::size_t block_count() const;

  friend bool operator==(const Program& a, const Program& b) {
    return a.blocks == b.blocks && a.entry_function == b.entry_function;
  }
};

/// Pre-order traversal over blocks; callback receives (block, depth).
template <typename F>
void walk_blocks(const std::vector<Block>& blocks, F&& f, std::size_t depth = 0) {
  for (const Block& b : blocks) {
    f(b, depth);
    walk_blocks(b.children, f, depth + 1);
  }
}

}  // namespace tutor::model
