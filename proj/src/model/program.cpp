#include "tutor/model/program.hpp"

#include <array>

namespace tutor::model {

namespace {

struct KindName {
  BlockKind kind;
  std::string_view name;
};

constexpr std::array<KindName, kBlockKindCount> kKindNames{{
    {BlockKind::Declaration, "declaration"},
    {BlockKind::Assignment, "assignment"},
    {BlockKind::If, "if"},
    {BlockKind::Switch, "switch"},
    {BlockKind::ForLoop, "for_loop"},
    {BlockKind::WhileLoop, "while_loop"},
    {BlockKind::DoWhileLoop, "do_while_loop"},
    {BlockKind::FunctionDef, "function_def"},
    {BlockKind::FunctionCall, "function_call"},
    {BlockKind::Return, "return"},
    {BlockKind::Preprocessor, "preprocessor"},
    {BlockKind::StructDef, "struct_def"},
    {BlockKind::FileOp, "file_op"},
    {BlockKind::MemAlloc, "mem_alloc"},
    {BlockKind::MemFree, "mem_free"},
    {BlockKind::Output, "output"},
    {BlockKind::Input, "input"},
    {BlockKind::Break, "break"},
    {BlockKind::Continue, "continue"},
}};

const std::string kEmptyText;
const std::vector<Expr> kNoExprs;
const std::vector<Param> kNoParams;
const std::vector<CaseLabel> kNoCases;

template <typename T>
const T* get_attr(const Block& b, std::string_view field) {
  auto it = b.attrs.find(field);
  if (it == b.attrs.end()) return nullptr;
  return std::get_if<T>(&it->second);
}

}  // namespace

std::string_view block_kind_name(BlockKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)].name;
}

std::optional<BlockKind> block_kind_from_name(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  return std::nullopt;
}

const std::vector<BlockKind>& all_block_kinds() {
  static const std::vector<BlockKind> kinds = [] {
    std::vector<BlockKind> out;
    for (const auto& entry : kKindNames) out.push_back(entry.kind);
    return out;
  }();
  return kinds;
}

bool is_control_kind(BlockKind kind) {
  switch (kind) {
    case BlockKind::If:
    case BlockKind::Switch:
    case BlockKind::ForLoop:
    case BlockKind::WhileLoop:
    case BlockKind::DoWhileLoop:
    case BlockKind::FunctionDef:
      return true;
    default:
      return false;
  }
}

bool is_loop_kind(BlockKind kind) {
  return kind == BlockKind::ForLoop || kind == BlockKind::WhileLoop ||
         kind == BlockKind::DoWhileLoop;
}

std::string_view layer_class_name(LayerClass c) {
  return c == LayerClass::Basic ? "basic" : "advanced";
}

const std::string& Block::text(std::string_view field) const {
  const auto* s = get_attr<std::string>(*this, field);
  return s ? *s : kEmptyText;
}

const Expr* Block::expr(std::string_view field) const {
  const auto* slot = get_attr<ExprSlot>(*this, field);
  return slot && slot->has_value() ? &**slot : nullptr;
}

const DataType* Block::type(std::string_view field) const { return get_attr<DataType>(*this, field); }

const std::vector<Expr>& Block::exprs(std::string_view field) const {
  const auto* v = get_attr<std::vector<Expr>>(*this, field);
  return v ? *v : kNoExprs;
}

const std::vector<Param>& Block::params(std::string_view field) const {
  const auto* v = get_attr<std::vector<Param>>(*this, field);
  return v ? *v : kNoParams;
}

const std::vector<CaseLabel>& Block::cases(std::string_view field) const {
  const auto* v = get_attr<std::vector<CaseLabel>>(*this, field);
  return v ? *v : kNoCases;
}

std::optional<std::int64_t> Block::index(std::string_view field) const {
  const auto* v = get_attr<std::int64_t>(*this, field);
  if (!v) return std::nullopt;
  return *v;
}

bool operator==(const Block& a, const Block& b) {
  return a.id == b.id && a.kind == b.kind && a.attrs == b.attrs && a.children == b.children &&
         a.layer == b.layer;
}

Program Program::from_blocks(std::vector<Block> blocks) {
  Program p;
  p.blocks = std::move(blocks);
  p.index_structs();
  return p;
}

void Program::index_structs() {
  struct_defs.clear();
  walk_blocks(blocks, [this](const Block& b, std::size_t) {
    if (b.kind == BlockKind::StructDef) struct_defs.emplace(b.text("name"), b.params("fields"));
  });
}

std::size_t Program::block_count() const {
  std::size_t n = 0;
  walk_blocks(blocks, [&n](const Block&, std::size_t) { ++n; });
  return n;
}

}  // namespace tutor::model
