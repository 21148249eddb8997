#include "tutor/model/analysis.hpp"

#include <map>
#include <sstream>

namespace tutor::model {

std::string_view defect_kind_name(DefectKind kind) {
  switch (kind) {
    case DefectKind::MissingEntryFunction: return "MissingEntryFunction";
    case DefectKind::DuplicateEntryFunction: return "DuplicateEntryFunction";
    case DefectKind::DuplicateId: return "DuplicateId";
    case DefectKind::EmptyId: return "EmptyId";
    case DefectKind::DisallowedLayer: return "DisallowedLayer";
    case DefectKind::UnknownTemplate: return "UnknownTemplate";
    case DefectKind::LayerMismatch: return "LayerMismatch";
    case DefectKind::ChildrenNotAllowed: return "ChildrenNotAllowed";
    case DefectKind::MissingField: return "MissingField";
    case DefectKind::UnknownField: return "UnknownField";
    case DefectKind::InvalidAttribute: return "InvalidAttribute";
    case DefectKind::MisplacedDefinition: return "MisplacedDefinition";
    case DefectKind::UnresolvedStruct: return "UnresolvedStruct";
    case DefectKind::DuplicateStruct: return "DuplicateStruct";
    case DefectKind::PointerTooDeep: return "PointerTooDeep";
    case DefectKind::ExpressionTooDeep: return "ExpressionTooDeep";
  }
  return "?";
}

bool ValidationReport::has(DefectKind kind) const {
  for (const Defect& d : defects) {
    if (d.kind == kind) return true;
  }
  return false;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const Defect& d : defects) {
    out << defect_kind_name(d.kind);
    for (const std::string& id : d.block_ids) out << " [" << id << "]";
    if (!d.message.empty()) out << ": " << d.message;
    out << "\n";
  }
  return out.str();
}

namespace {

class Validator {
 public:
  Validator(const Program& program, const std::optional<std::set<std::string>>& allowed,
            const TemplateRegistry& registry)
      : program_(program), allowed_(allowed), registry_(registry) {
    walk_blocks(program.blocks, [this](const Block& b, std::size_t) {
      if (b.kind == BlockKind::StructDef) {
        if (!struct_names_.insert(b.text("name")).second) {
          add(DefectKind::DuplicateStruct, {b.id}, "struct " + b.text("name") + " defined twice");
        }
      }
    });
  }

  ValidationReport run() {
    std::map<std::string, std::string> first_seen;
    walk_blocks(program_.blocks, [&](const Block& b, std::size_t) {
      if (b.id.empty()) {
        add(DefectKind::EmptyId, {}, "block of kind " + std::string(block_kind_name(b.kind)) + " has no id");
      } else if (auto [it, inserted] = first_seen.emplace(b.id, b.id); !inserted) {
        add(DefectKind::DuplicateId, {b.id, b.id}, "id used by more than one block");
      }
    });

    std::size_t entries = 0;
    for (const Block& b : program_.blocks) {
      if (b.kind == BlockKind::FunctionDef && b.text("name") == program_.entry_function) ++entries;
    }
    if (entries == 0) {
      add(DefectKind::MissingEntryFunction, {}, "no function named " + program_.entry_function);
    } else if (entries > 1) {
      add(DefectKind::DuplicateEntryFunction, {}, "function " + program_.entry_function + " defined more than once");
    }

    for (const Block& b : program_.blocks) check_block(b, 0);
    return std::move(report_);
  }

 private:
  void add(DefectKind kind, std::vector<std::string> ids, std::string message) {
    report_.defects.push_back(Defect{kind, std::move(ids), std::move(message)});
  }

  void check_type(const Block& b, const DataType& t) {
    if (t.pointer_depth() > DataType::kMaxPointerDepth) {
      add(DefectKind::PointerTooDeep, {b.id}, t.to_string());
    }
    const DataType* inner = &t;
    while (inner->is_pointer() || inner->is_array()) inner = &inner->element();
    if (inner->kind() == DataType::Kind::StructRef && struct_names_.count(inner->struct_name()) == 0) {
      add(DefectKind::UnresolvedStruct, {b.id}, "unknown struct " + inner->struct_name());
    }
  }

  void check_expr(const Block& b, const Expr& e) {
    if (e.depth() > kMaxExprDepth) add(DefectKind::ExpressionTooDeep, {b.id}, "expression nesting exceeds limit");
  }

  void check_layer(const Block& b) {
    const Template* t = registry_.find(b.layer.template_name);
    if (t == nullptr) {
      add(DefectKind::UnknownTemplate, {b.id}, "unknown layer template '" + b.layer.template_name + "'");
      return;
    }
    if (t->binds_block_kinds.count(b.kind) == 0 || t->layer_class != b.layer.layer_class) {
      add(DefectKind::LayerMismatch, {b.id},
          "template " + t->name + " does not bind " + std::string(block_kind_name(b.kind)));
    }
    if (allowed_ && allowed_->count(b.layer.template_name) == 0) {
      add(DefectKind::DisallowedLayer, {b.id}, "layer '" + b.layer.template_name + "' is not allowed here");
    }
    // Custom templates may only require fields the block kind actually has.
    for (const FieldSpec& f : t->fields) {
      if (f.required && !b.has(f.name)) {
        add(DefectKind::MissingField, {b.id}, "missing field '" + f.name + "'");
      }
    }
  }

  void check_block(const Block& b, std::size_t depth) {
    check_layer(b);
    const Template& schema = registry_.builtin_for(b.kind);
    if (&schema != registry_.find(b.layer.template_name)) {
      for (const FieldSpec& f : schema.fields) {
        if (f.required && !b.has(f.name)) add(DefectKind::MissingField, {b.id}, "missing field '" + f.name + "'");
      }
    }
    for (const auto& [name, value] : b.attrs) {
      const FieldSpec* spec = schema.field(name);
      if (spec == nullptr) {
        add(DefectKind::UnknownField, {b.id}, "field '" + name + "' not valid for " + std::string(block_kind_name(b.kind)));
        continue;
      }
      if (const auto* t = std::get_if<DataType>(&value)) check_type(b, *t);
      if (const auto* slot = std::get_if<ExprSlot>(&value); slot && slot->has_value()) check_expr(b, **slot);
      if (const auto* list = std::get_if<std::vector<Expr>>(&value)) {
        for (const Expr& e : *list) check_expr(b, e);
      }
      if (const auto* params = std::get_if<std::vector<Param>>(&value)) {
        std::set<std::string> names;
        for (const Param& p : *params) {
          check_type(b, p.type);
          if (!names.insert(p.name).second) add(DefectKind::InvalidAttribute, {b.id}, "repeated name " + p.name);
        }
      }
    }

    if (!is_control_kind(b.kind) && !b.children.empty()) {
      add(DefectKind::ChildrenNotAllowed, {b.id}, std::string(block_kind_name(b.kind)) + " cannot contain blocks");
    }
    if (depth > 0 && (b.kind == BlockKind::FunctionDef || b.kind == BlockKind::StructDef ||
                      b.kind == BlockKind::Preprocessor)) {
      add(DefectKind::MisplacedDefinition, {b.id}, std::string(block_kind_name(b.kind)) + " must be at top level");
    }

    switch (b.kind) {
      case BlockKind::If:
        if (auto split = b.index("else_from")) {
          if (*split < 0 || static_cast<std::size_t>(*split) > b.children.size()) {
            add(DefectKind::InvalidAttribute, {b.id}, "else_from out of range");
          }
        }
        break;
      case BlockKind::Switch: {
        std::set<std::optional<std::int64_t>> labels;
        std::size_t previous = 0;
        for (const CaseLabel& c : b.cases("cases")) {
          if (c.start > b.children.size() || c.start < previous) {
            add(DefectKind::InvalidAttribute, {b.id}, "case start out of order or range");
          }
          previous = c.start;
          if (!labels.insert(c.value).second) add(DefectKind::InvalidAttribute, {b.id}, "repeated case label");
        }
        break;
      }
      case BlockKind::FileOp: {
        const std::string& op = b.text("op");
        if (op != "open" && op != "close" && op != "read" && op != "write") {
          add(DefectKind::InvalidAttribute, {b.id}, "unknown file operation '" + op + "'");
        }
        if (op == "open") {
          if (!b.has("path")) add(DefectKind::MissingField, {b.id}, "missing field 'path'");
          if (!b.has("mode")) add(DefectKind::MissingField, {b.id}, "missing field 'mode'");
        }
        if (op == "write" && !b.has("format")) add(DefectKind::MissingField, {b.id}, "missing field 'format'");
        if (op == "read" && !b.has("targets")) add(DefectKind::MissingField, {b.id}, "missing field 'targets'");
        if (b.has("mode")) {
          const std::string& mode = b.text("mode");
          if (mode != "r" && mode != "w" && mode != "a") {
            add(DefectKind::InvalidAttribute, {b.id}, "file mode must be r, w or a");
          }
        }
        break;
      }
      case BlockKind::Preprocessor: {
        const std::string& d = b.text("directive");
        if (d != "include" && d != "define") add(DefectKind::InvalidAttribute, {b.id}, "unknown directive " + d);
        break;
      }
      default:
        break;
    }

    for (const Block& child : b.children) check_block(child, depth + 1);
  }

  const Program& program_;
  const std::optional<std::set<std::string>>& allowed_;
  const TemplateRegistry& registry_;
  std::set<std::string> struct_names_;
  ValidationReport report_;
};

void enumerate_into(const std::vector<Block>& blocks, const std::optional<std::set<BlockKind>>& filter,
                    std::vector<std::string>& chain, std::vector<NodeEntry>& out) {
  for (const Block& b : blocks) {
    if (!filter || filter->count(b.kind) != 0) out.push_back(NodeEntry{b.id, b.kind, &b, chain});
    chain.push_back(b.id);
    enumerate_into(b.children, filter, chain, out);
    chain.pop_back();
  }
}

}  // namespace

ValidationReport validate_program(const Program& program, const std::optional<std::set<std::string>>& allowed_layers,
                                  const TemplateRegistry& registry) {
  return Validator(program, allowed_layers, registry).run();
}

std::vector<NodeEntry> enumerate_nodes(const Program& program, const std::optional<std::set<BlockKind>>& filter) {
  std::vector<NodeEntry> out;
  std::vector<std::string> chain;
  enumerate_into(program.blocks, filter, chain, out);
  return out;
}

}  // namespace tutor::model
