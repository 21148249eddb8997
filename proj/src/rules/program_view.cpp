#include "tutor/rules/program_view.hpp"

#include <limits>

#include "tutor/codec/expression_parser.hpp"

namespace tutor::rules {

using model::AttrValue;
using model::Block;
using model::Expr;

std::string attr_value_text(const AttrValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, model::DataType>) {
          return v.to_string();
        } else if constexpr (std::is_same_v<T, model::ExprSlot>) {
          return v ? codec::print_expression(*v) : std::string();
        } else if constexpr (std::is_same_v<T, std::vector<Expr>>) {
          std::string out;
          for (const Expr& e : v) out += (out.empty() ? "" : ", ") + codec::print_expression(e);
          return out;
        } else if constexpr (std::is_same_v<T, std::vector<model::Param>>) {
          std::string out;
          for (const model::Param& p : v) out += (out.empty() ? "" : ", ") + p.type.to_string() + " " + p.name;
          return out;
        } else {
          std::string out;
          for (const model::CaseLabel& c : v) {
            out += (out.empty() ? "" : ", ") + (c.value ? std::to_string(*c.value) : std::string("default")) + ":" +
                   std::to_string(c.start);
          }
          return out;
        }
      },
      value);
}

ProgramView::ProgramView(const model::Program& program) : scopes_(model::ScopeTable::build(program)) {
  flatten(program.blocks, std::numeric_limits<std::size_t>::max());
}

void ProgramView::flatten(const std::vector<Block>& list, std::size_t parent) {
  for (const Block& b : list) {
    std::size_t pos = blocks_.size();
    blocks_.push_back(&b);
    ends_.push_back(0);
    parents_.push_back(parent);
    by_kind_[static_cast<std::size_t>(b.kind)].push_back(pos);
    flatten(b.children, pos);
    ends_[pos] = blocks_.size();
  }
}

std::vector<std::size_t> ProgramView::candidates(const std::set<model::BlockKind>& kinds) const {
  std::vector<std::size_t> out;
  if (kinds.empty()) {
    out.resize(blocks_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
  for (model::BlockKind k : kinds) {
    const auto& list = by_kind_[static_cast<std::size_t>(k)];
    out.insert(out.end(), list.begin(), list.end());
  }
  if (kinds.size() > 1) std::sort(out.begin(), out.end());
  return out;
}

const model::Scope* ProgramView::scope(std::size_t pos) const { return scopes_.at(blocks_[pos]->id); }

std::optional<std::string> ProgramView::attr_text(std::size_t pos, std::string_view field) const {
  const Block& b = *blocks_[pos];
  auto it = b.attrs.find(field);
  if (it != b.attrs.end()) return attr_value_text(it->second);
  if (field == "id") return b.id;
  if (field == "kind") return std::string(model::block_kind_name(b.kind));
  return std::nullopt;
}

bool ProgramView::attr_present(std::size_t pos, std::string_view field) const {
  const Block& b = *blocks_[pos];
  auto it = b.attrs.find(field);
  if (it == b.attrs.end()) return false;
  return std::visit(
      [](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, model::DataType>) {
          return true;
        } else if constexpr (std::is_same_v<T, model::ExprSlot>) {
          return v.has_value();
        } else {
          return !v.empty();
        }
      },
      it->second);
}

std::optional<model::DataType> ProgramView::type_of(std::size_t pos, std::string_view field) const {
  auto key = std::make_pair(pos, std::string(field));
  if (auto it = type_cache_.find(key); it != type_cache_.end()) return it->second;
  std::optional<model::DataType> result;
  const Block& b = *blocks_[pos];
  if (const model::DataType* declared = b.type(field)) {
    result = *declared;
  } else if (const Expr* e = b.expr(field)) {
    if (const model::Scope* s = scope(pos)) {
      try {
        result = model::infer_type(*e, *s);
      } catch (const model::TypeError&) {
      }
    }
  }
  type_cache_.emplace(std::move(key), result);
  return result;
}

std::vector<const Expr*> ProgramView::expressions(std::size_t pos, std::string_view field) const {
  std::vector<const Expr*> out;
  const Block& b = *blocks_[pos];
  for (const auto& [name, value] : b.attrs) {
    if (field != "*" && name != field) continue;
    if (const auto* slot = std::get_if<model::ExprSlot>(&value)) {
      if (*slot) out.push_back(&**slot);
    } else if (const auto* list = std::get_if<std::vector<Expr>>(&value)) {
      for (const Expr& e : *list) out.push_back(&e);
    }
  }
  return out;
}

std::vector<const Expr*> ProgramView::expressions_in(std::size_t pos, const std::vector<std::string>& fields) const {
  if (fields.empty()) return expressions(pos, "*");
  std::vector<const Expr*> out;
  for (const std::string& f : fields) {
    auto part = expressions(pos, f);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace tutor::rules
