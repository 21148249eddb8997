#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tutor/codec/solution_codec.hpp"
#include "tutor/model/program.hpp"
#include "tutor/rules/knowledge_base.hpp"

namespace tutor::rules {

/// Binding name → block id, in matcher order.
using Binding = std::vector<std::pair<std::string, std::string>>;

struct Violation {
  std::string constraint_id;
  RuleCategory category = RuleCategory::Syntax;
  Binding bindings;
  /// Placeholder values: "a.id", "a.kind", "a.<field>", "a.<field>:type".
  std::map<std::string, std::string> explanation_data;

  std::vector<std::string> block_ids() const;
};

struct BindingResult {
  Binding binding;
  bool satisfied = true;
};

/// Conversion characters of a printf-style format in order. "%%" is skipped;
/// a trailing lone '%' yields '?'.
std::string conversion_specs(std::string_view format);

/// Whether `c` is active for `exercise` after rule overrides.
bool constraint_enabled(const Constraint& c, const codec::Exercise& exercise);

/// Every relevance binding of `c` with its satisfaction outcome, in binding
/// order. Empty when the tag gate fails.
std::vector<BindingResult> check_constraint(const Constraint& c, const model::Program& program,
                                            const codec::Exercise& exercise);

/// Unsatisfied bindings of every enabled constraint, ordered by constraint id
/// then binding block ids.
std::vector<Violation> evaluate(const model::Program& program, const codec::Exercise& exercise,
                                const KnowledgeBase& kb);

}  // namespace tutor::rules
