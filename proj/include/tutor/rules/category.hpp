#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace tutor::rules {

enum class RuleCategory { SolutionMethods, MissingReferences, Pointer, Memory, File, Functions, DataTypes, Syntax };

inline constexpr std::size_t kRuleCategoryCount = 8;

inline constexpr std::array<RuleCategory, kRuleCategoryCount> kAllRuleCategories = {
    RuleCategory::SolutionMethods, RuleCategory::MissingReferences, RuleCategory::Pointer,
    RuleCategory::Memory,          RuleCategory::File,              RuleCategory::Functions,
    RuleCategory::DataTypes,       RuleCategory::Syntax};

std::string_view rule_category_name(RuleCategory category);
std::optional<RuleCategory> rule_category_from_name(std::string_view name);

}  // namespace tutor::rules
