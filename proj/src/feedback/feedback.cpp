#include "tutor/feedback/feedback.hpp"

#include <algorithm>

namespace tutor::feedback {

std::string adapted_tier(double learning_level) {
  if (learning_level < 40.0) return "novice";
  if (learning_level < 80.0) return "standard";
  return "terse";
}

std::string fill_placeholders(const std::string& text, const std::map<std::string, std::string>& data) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t open = text.find('{', i);
    std::size_t close = open == std::string::npos ? std::string::npos : text.find('}', open);
    if (close == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    out.append(text, i, open - i);
    std::string key = text.substr(open + 1, close - open - 1);
    if (auto it = data.find(key); it != data.end()) {
      out += it->second;
    } else if (key.size() > 5 && key.compare(key.size() - 5, 5, ":type") == 0) {
      out += "unknown";
    }
    i = close + 1;
  }
  return out;
}

namespace {

std::vector<std::string> targets_of(const rules::Violation& v) {
  std::vector<std::string> out;
  for (const std::string& id : v.block_ids()) {
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  return out;
}

const rules::Constraint& constraint_for(const rules::Violation& v, FeedbackKind kind, const rules::KnowledgeBase& kb) {
  const rules::Constraint* c = kb.find(v.constraint_id);
  if (c == nullptr) {
    throw FeedbackError(FeedbackError::Code::MissingTemplate, v.constraint_id, kind,
                        "no rule '" + v.constraint_id + "' in the knowledge base");
  }
  return *c;
}

std::string template_for(const rules::Constraint& c, FeedbackKind kind, double level) {
  const auto& variants = c.feedback.elaborated;
  switch (kind) {
    case FeedbackKind::KnowledgeOfCorrectResponse:
      if (!c.feedback.correct) {
        throw FeedbackError(FeedbackError::Code::MissingTemplate, c.id, kind,
                            "rule '" + c.id + "' has no correct-response template");
      }
      return *c.feedback.correct;
    case FeedbackKind::Adapted:
      if (auto it = variants.find(adapted_tier(level)); it != variants.end()) return it->second;
      [[fallthrough]];
    default:
      if (auto it = variants.find("standard"); it != variants.end()) return it->second;
      throw FeedbackError(FeedbackError::Code::MissingTemplate, c.id, kind,
                          "rule '" + c.id + "' has no elaborated template");
  }
}

}  // namespace

std::vector<FeedbackMessage> render_feedback(const std::vector<rules::Violation>& violations, FeedbackKind kind,
                                             double learning_level, const rules::KnowledgeBase& kb) {
  if (!(learning_level >= 0.0 && learning_level <= 100.0)) {
    throw FeedbackError(FeedbackError::Code::InvalidLearningLevel, "", kind, "learning level must lie in [0, 100]");
  }
  if (violations.empty()) return {FeedbackMessage{"", std::nullopt, kind, kCleanSolutionText, {}}};
  if (kind == FeedbackKind::KnowledgeOfResponse) return {FeedbackMessage{"", std::nullopt, kind, kIncorrectText, {}}};

  std::vector<FeedbackMessage> out;
  out.reserve(violations.size());
  for (const rules::Violation& v : violations) {
    const rules::Constraint& c = constraint_for(v, kind, kb);
    std::string text = fill_placeholders(template_for(c, kind, learning_level), v.explanation_data);
    if (text.empty()) text = c.id;
    out.push_back(FeedbackMessage{v.constraint_id, v.category, kind, std::move(text), targets_of(v)});
  }
  return out;
}

std::map<rules::RuleCategory, std::size_t> summarize(const std::vector<rules::Violation>& violations) {
  std::map<rules::RuleCategory, std::size_t> out;
  for (rules::RuleCategory c : rules::kAllRuleCategories) out[c] = 0;
  for (const rules::Violation& v : violations) ++out[v.category];
  return out;
}

}  // namespace tutor::feedback
