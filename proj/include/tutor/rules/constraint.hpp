#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tutor/model/expression.hpp"
#include "tutor/model/program.hpp"
#include "tutor/rules/category.hpp"

namespace tutor::rules {

/// `binding.field`, e.g. "a.value". The pseudo-fields "id" and "kind" name
/// the block itself.
struct FieldRef {
  std::string binding;
  std::string field;
  /// type_equals only: compare against a pointer to this field's type.
  bool pointer_to = false;

  friend bool operator==(const FieldRef&, const FieldRef&) = default;
};

/// Literal text or a reference to another bound block's attribute.
using Operand = std::variant<std::string, FieldRef>;

enum class AttrOp { Equals, NotEquals, In, Present, Calls, TypeKind };

/// Test on one attribute of a candidate block. Field "*" means every
/// expression-valued attribute (Calls only).
struct AttrTest {
  std::string field;
  AttrOp op = AttrOp::Present;
  std::vector<Operand> values;
  bool negate = false;
};

/// Selection of blocks by kind, position and attributes.
struct NodeQuery {
  std::set<model::BlockKind> kinds;  // empty: any kind
  std::optional<std::string> within;  // strict descendant of this binding
  std::optional<std::string> before;  // earlier in pre-order than this binding
  std::optional<std::string> after;
  std::vector<AttrTest> where;
};

struct NodeMatcher {
  std::string bind;
  NodeQuery query;
  /// Bind only the first qualifying block in pre-order.
  bool first = false;
};

/// Cr: tag gate plus node matchers combined all-of (Cartesian product).
struct RelevancePattern {
  std::set<std::string> tags;
  std::vector<NodeMatcher> matchers;
};

struct Predicate;

struct ExistsPred {
  NodeQuery query;
  std::optional<std::string> bind;
  std::vector<Predicate> that;  // zero or one
};
struct CountAtLeastPred {
  NodeQuery query;
  std::int64_t n = 1;
};
struct TypeEqualsPred {
  FieldRef left;
  FieldRef right;
};
struct TypeIsPred {
  FieldRef ref;
  std::set<std::string> categories;
};
struct AttrEqualsPred {
  FieldRef left;
  Operand right;
};
struct AttrPred {
  std::string binding;
  AttrTest test;
};
struct DeclaredBeforeUsePred {
  std::string binding;
  std::vector<std::string> fields;  // empty: every expression field
};
struct ValidExprPred {
  FieldRef ref;
};
struct WellTypedPred {
  std::string binding;
  std::vector<std::string> fields;
  std::set<model::ExprKind> nodes;  // empty: any node kind
  std::set<model::ExprKind> except;
};
struct InsidePred {
  std::string binding;
  std::set<model::BlockKind> kinds;
};
enum class FormatCheck { Count, Types };
struct FormatArgsPred {
  std::string binding;
  FormatCheck check = FormatCheck::Count;
};
enum class MentionAs { Call, Var, Any };
struct MentionsPred {
  Operand name;
  MentionAs as = MentionAs::Any;
  std::optional<std::string> within;
  std::optional<std::string> exclude;
};
struct CallsResolvePred {
  std::string binding;
};
struct NotPred {
  std::vector<Predicate> operand;  // exactly one
};
struct AllPred {
  std::vector<Predicate> operands;
};
struct AnyPred {
  std::vector<Predicate> operands;
};

/// Cs: predicate tree over the bound blocks and program-wide queries.
struct Predicate {
  std::variant<ExistsPred, CountAtLeastPred, TypeEqualsPred, TypeIsPred, AttrEqualsPred, AttrPred,
               DeclaredBeforeUsePred, ValidExprPred, WellTypedPred, InsidePred, FormatArgsPred, MentionsPred,
               CallsResolvePred, NotPred, AllPred, AnyPred>
      node;
};

/// Elaborated variants are keyed "standard", "novice", "terse"; "standard"
/// is always present.
struct FeedbackTemplates {
  std::map<std::string, std::string> elaborated;
  std::optional<std::string> correct;
};

struct Constraint {
  std::string id;
  RuleCategory category = RuleCategory::Syntax;
  std::string description;
  RelevancePattern relevance;
  Predicate satisfaction;
  FeedbackTemplates feedback;
  bool enabled = true;
  /// Document the rule came from and its original JSON text.
  std::string source_document;
  std::string source_json;
};

}  // namespace tutor::rules
