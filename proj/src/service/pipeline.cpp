#include "tutor/service/pipeline.hpp"

namespace tutor::service {

using nlohmann::json;

Evaluation evaluate_solution(const model::Program& program, const codec::Exercise& exercise,
                             const rules::KnowledgeBase& kb, feedback::FeedbackKind kind, double learning_level,
                             interp::RunLimits limits) {
  model::ValidationReport report = model::validate_program(program, exercise.allowed_layers);
  if (!report.ok()) throw InvalidSubmission(std::move(report));

  Evaluation result;
  result.type_errors = model::check_types(program);
  result.violations = rules::evaluate(program, exercise, kb);
  result.feedback = feedback::render_feedback(result.violations, kind, learning_level, kb);
  if (!result.violations.empty() || !result.type_errors.empty()) return result;

  result.runtime = interp::run(program, limits);
  bool output_ok = true;
  if (exercise.expected_stdout) {
    result.output_check = interp::compare_output(*result.runtime, *exercise.expected_stdout);
    output_ok = result.output_check->equal;
  }
  result.completed = result.runtime->status == interp::RunStatus::Completed && output_ok;
  return result;
}

json to_json(const rules::Violation& violation) {
  json bindings = json::array();
  for (const auto& [name, block] : violation.bindings) bindings.push_back({{"name", name}, {"block_id", block}});
  return {{"constraint_id", violation.constraint_id},
          {"category", rules::rule_category_name(violation.category)},
          {"block_ids", violation.block_ids()},
          {"bindings", std::move(bindings)},
          {"explanation_data", violation.explanation_data}};
}

json to_json(const feedback::FeedbackMessage& message) {
  json out = {{"constraint_id", message.constraint_id},
              {"category", nullptr},
              {"kind", feedback::feedback_kind_name(message.kind)},
              {"text", message.text},
              {"target_block_ids", message.target_block_ids}};
  if (message.category) out["category"] = rules::rule_category_name(*message.category);
  return out;
}

json to_json(const interp::RuntimeOutcome& outcome) {
  json out = {{"status", interp::run_status_name(outcome.status)},
              {"stdout", outcome.stdout_text},
              {"steps_used", outcome.steps_used},
              {"virtual_files", outcome.virtual_files}};
  if (outcome.status == interp::RunStatus::RuntimeError) {
    out["error"] = {{"message", outcome.error_message}, {"block_id", outcome.error_block_id}};
  }
  return out;
}

json to_json(const interp::OutputComparison& comparison) {
  json out = {{"equal", comparison.equal}};
  if (!comparison.equal) {
    out["first_difference"] = comparison.first_difference;
    out["expected_context"] = comparison.expected_context;
    out["actual_context"] = comparison.actual_context;
  }
  return out;
}

json to_json(const model::ValidationReport& report) {
  json defects = json::array();
  for (const model::Defect& d : report.defects) {
    defects.push_back({{"kind", model::defect_kind_name(d.kind)}, {"block_ids", d.block_ids}, {"message", d.message}});
  }
  return defects;
}

json to_json(const model::TypeDiagnostic& diagnostic) {
  return {{"block_id", diagnostic.block_id}, {"field", diagnostic.field}, {"message", diagnostic.message}};
}

json to_json(const Evaluation& evaluation) {
  json out = {{"completed", evaluation.completed}};
  json& types = out["type_errors"] = json::array();
  for (const auto& d : evaluation.type_errors) types.push_back(to_json(d));
  json& violations = out["violations"] = json::array();
  for (const auto& v : evaluation.violations) violations.push_back(to_json(v));
  json summary = json::object();
  for (const auto& [category, count] : feedback::summarize(evaluation.violations)) {
    summary[std::string(rules::rule_category_name(category))] = count;
  }
  out["category_summary"] = std::move(summary);
  json& messages = out["feedback"] = json::array();
  for (const auto& m : evaluation.feedback) messages.push_back(to_json(m));
  out["runtime"] = evaluation.runtime ? to_json(*evaluation.runtime) : json(nullptr);
  out["output_check"] = evaluation.output_check ? to_json(*evaluation.output_check) : json(nullptr);
  return out;
}

json to_json(const codec::CodecError& error) {
  json out = {{"code", error.code_name()}, {"message", error.what()}};
  if (error.line() != 0) {
    out["line"] = error.line();
    out["column"] = error.column();
  }
  if (!error.path().empty()) out["path"] = error.path();
  if (!error.subject().empty()) out["subject"] = error.subject();
  if (!error.report().ok()) out["defects"] = to_json(error.report());
  return out;
}

json to_json(const perf::StudentAverages& averages) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"page_view_score", opt(averages.page_view_score)},
          {"avg_quiz_score", opt(averages.avg_quiz_score)},
          {"avg_ctutor_score", opt(averages.avg_ctutor_score)}};
}

json to_json(const grading::TTestResult& result) {
  return {{"variant", grading::variance_name(result.variant)},
          {"t", result.t},
          {"df", result.df},
          {"sig_two_tailed", result.p_two_tailed},
          {"mean_difference", result.mean_difference},
          {"std_error_difference", result.std_error_difference},
          {"ci95_lower", result.ci95.first},
          {"ci95_upper", result.ci95.second}};
}

json to_json(const grading::SampleStats& stats) {
  return {{"n", stats.n}, {"mean", stats.mean}, {"stdev", stats.stdev}, {"median", stats.median}};
}

json to_json(const grading::CohortReport& report) {
  auto group = [&](const std::string& name, const grading::SampleStats& stats, std::size_t passed,
                   const std::array<std::size_t, 10>& histogram) {
    json g = to_json(stats);
    g["name"] = name;
    if (report.has_grades) {
      g["passed"] = passed;
      g["histogram"] = histogram;
    } else {
      g.erase("median");
    }
    return g;
  };
  return {{"first", group(report.first_name, report.first, report.first_passed, report.first_histogram)},
          {"second", group(report.second_name, report.second, report.second_passed, report.second_histogram)},
          {"tests", json::array({to_json(report.equal_variances), to_json(report.welch)})}};
}

json to_json(const grading::GradeRecord& record) {
  return {{"student_id", record.student_id},
          {"visa", record.visa},
          {"final_exam", record.final_exam},
          {"activities",
           {{"homework", record.activity_averages.homework},
            {"forum", record.activity_averages.forum},
            {"chat", record.activity_averages.chat}}},
          {"adjusted_final", record.adjusted_final},
          {"term_grade", record.term_grade},
          {"passed", record.passed}};
}

json kb_stats_json(const rules::KnowledgeBase& kb) {
  json categories = json::array();
  for (const auto& [category, count] : rules::kb_stats(kb)) {
    categories.push_back({{"category", rules::rule_category_name(category)}, {"count", count}});
  }
  return {{"version", kb.version()}, {"total", kb.size()}, {"categories", std::move(categories)}};
}

json question_for_student(const itest::QuestionRecord& question) {
  return {{"id", question.id},
          {"lesson_id", question.lesson_id},
          {"stem", question.stem},
          {"choices", question.choices},
          {"difficulty", question.difficulty},
          {"answering_time_seconds", question.answering_time_seconds}};
}

json question_document(const itest::QuestionRecord& question) {
  return {{"id", question.id},
          {"lesson_id", question.lesson_id},
          {"stem", question.stem},
          {"choices", question.choices},
          {"correct_index", question.correct_index},
          {"difficulty", question.difficulty},
          {"choice_priority", question.choice_priority},
          {"answering_time_seconds", question.answering_time_seconds}};
}

}  // namespace tutor::service
