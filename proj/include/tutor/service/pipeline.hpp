#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tutor/codec/solution_codec.hpp"
#include "tutor/feedback/feedback.hpp"
#include "tutor/grading/grading.hpp"
#include "tutor/interp/interpreter.hpp"
#include "tutor/itest/itest.hpp"
#include "tutor/model/analysis.hpp"
#include "tutor/model/typing.hpp"
#include "tutor/rules/engine.hpp"

namespace tutor::service {

/// Structural defects that stop a submission before any rule is checked.
class InvalidSubmission : public std::runtime_error {
 public:
  explicit InvalidSubmission(model::ValidationReport report)
      : std::runtime_error(report.to_string()), report_(std::move(report)) {}
  const model::ValidationReport& report() const { return report_; }

 private:
  model::ValidationReport report_;
};

struct Evaluation {
  std::vector<model::TypeDiagnostic> type_errors;
  std::vector<rules::Violation> violations;
  std::vector<feedback::FeedbackMessage> feedback;
  /// Present when the program was constraint-clean and type-correct.
  std::optional<interp::RuntimeOutcome> runtime;
  /// Present when the program ran and the exercise declares expected output.
  std::optional<interp::OutputComparison> output_check;
  bool completed = false;
};

/// validate → type-check → evaluate constraints → render feedback → run when
/// clean. Completed means no violations, no type errors, a normal exit and,
/// if declared, matching stdout. Throws InvalidSubmission.
Evaluation evaluate_solution(const model::Program& program, const codec::Exercise& exercise,
                             const rules::KnowledgeBase& kb, feedback::FeedbackKind kind, double learning_level,
                             interp::RunLimits limits);

nlohmann::json to_json(const rules::Violation& violation);
nlohmann::json to_json(const feedback::FeedbackMessage& message);
nlohmann::json to_json(const interp::RuntimeOutcome& outcome);
nlohmann::json to_json(const interp::OutputComparison& comparison);
nlohmann::json to_json(const model::ValidationReport& report);
nlohmann::json to_json(const model::TypeDiagnostic& diagnostic);
nlohmann::json to_json(const Evaluation& evaluation);
nlohmann::json to_json(const codec::CodecError& error);
nlohmann::json to_json(const perf::StudentAverages& averages);
nlohmann::json to_json(const grading::TTestResult& result);
nlohmann::json to_json(const grading::SampleStats& stats);
nlohmann::json to_json(const grading::CohortReport& report);
nlohmann::json to_json(const grading::GradeRecord& record);

/// Constraint count per category, in category order.
nlohmann::json kb_stats_json(const rules::KnowledgeBase& kb);

/// Everything a student may see: no correct index, priority or usage.
nlohmann::json question_for_student(const itest::QuestionRecord& question);
/// The authoring document form (parse_question accepts it back).
nlohmann::json question_document(const itest::QuestionRecord& question);

}  // namespace tutor::service
