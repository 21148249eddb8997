#include "tutor/feedback/feedback_kind.hpp"

namespace tutor::feedback {

std::string_view feedback_kind_name(FeedbackKind kind) {
  switch (kind) {
    case FeedbackKind::KnowledgeOfResponse: return "response";
    case FeedbackKind::KnowledgeOfCorrectResponse: return "correct";
    case FeedbackKind::Elaborated: return "elaborated";
    case FeedbackKind::Adapted: return "adapted";
  }
  return "response";
}

std::optional<FeedbackKind> feedback_kind_from_name(std::string_view name) {
  for (FeedbackKind k : {FeedbackKind::KnowledgeOfResponse, FeedbackKind::KnowledgeOfCorrectResponse,
                         FeedbackKind::Elaborated, FeedbackKind::Adapted}) {
    if (feedback_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

}  // namespace tutor::feedback
