#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tutor/feedback/feedback_kind.hpp"
#include "tutor/rules/engine.hpp"

namespace tutor::feedback {

struct FeedbackMessage {
  /// Empty for the verdict-only messages (clean solution, knowledge of response).
  std::string constraint_id;
  std::optional<rules::RuleCategory> category;
  FeedbackKind kind = FeedbackKind::Elaborated;
  std::string text;
  std::vector<std::string> target_block_ids;
};

class FeedbackError : public std::runtime_error {
 public:
  enum class Code { MissingTemplate, InvalidLearningLevel };

  FeedbackError(Code code, std::string constraint_id, FeedbackKind kind, const std::string& message)
      : std::runtime_error(message), code_(code), constraint_id_(std::move(constraint_id)), kind_(kind) {}

  Code code() const { return code_; }
  const std::string& constraint_id() const { return constraint_id_; }
  FeedbackKind kind() const { return kind_; }

 private:
  Code code_;
  std::string constraint_id_;
  FeedbackKind kind_;
};

inline constexpr const char* kCleanSolutionText = "Your solution satisfies all constraints.";
inline constexpr const char* kIncorrectText = "Your solution is not correct yet.";

/// Elaborated variant used by Adapted feedback: "novice" below 40,
/// "standard" below 80, "terse" from 80 up.
std::string adapted_tier(double learning_level);

/// Fills `{binding.field}` placeholders from explanation data. Unknown keys
/// render empty, except `:type` keys, which render "unknown".
std::string fill_placeholders(const std::string& text, const std::map<std::string, std::string>& data);

/// One message per violation, or a single verdict for KnowledgeOfResponse
/// and for an empty violation list.
std::vector<FeedbackMessage> render_feedback(const std::vector<rules::Violation>& violations, FeedbackKind kind,
                                             double learning_level, const rules::KnowledgeBase& kb);

/// Violation count per category; every category is present.
std::map<rules::RuleCategory, std::size_t> summarize(const std::vector<rules::Violation>& violations);

}  // namespace tutor::feedback
