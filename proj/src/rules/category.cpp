#include "tutor/rules/category.hpp"

namespace tutor::rules {

std::string_view rule_category_name(RuleCategory category) {
  switch (category) {
    case RuleCategory::SolutionMethods: return "SolutionMethods";
    case RuleCategory::MissingReferences: return "MissingReferences";
    case RuleCategory::Pointer: return "Pointer";
    case RuleCategory::Memory: return "Memory";
    case RuleCategory::File: return "File";
    case RuleCategory::Functions: return "Functions";
    case RuleCategory::DataTypes: return "DataTypes";
    case RuleCategory::Syntax: return "Syntax";
  }
  return "?";
}

std::optional<RuleCategory> rule_category_from_name(std::string_view name) {
  for (RuleCategory c : kAllRuleCategories) {
    if (rule_category_name(c) == name) return c;
  }
  return std::nullopt;
}

}  // namespace tutor::rules
