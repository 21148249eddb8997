#pragma once

#include <optional>
#include <string_view>

namespace tutor::feedback {

/// Feedback styles, from a bare verdict to learner-tailored explanation.
enum class FeedbackKind { KnowledgeOfResponse, KnowledgeOfCorrectResponse, Elaborated, Adapted };

/// Wire names: "response", "correct", "elaborated", "adapted".
std::string_view feedback_kind_name(FeedbackKind kind);
std::optional<FeedbackKind> feedback_kind_from_name(std::string_view name);

}  // namespace tutor::feedback
