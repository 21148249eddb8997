#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/feedback/feedback_kind.hpp"
#include "tutor/model/analysis.hpp"
#include "tutor/model/program.hpp"
#include "tutor/model/templates.hpp"

namespace tutor::codec {

class CodecError : public std::runtime_error {
 public:
  enum class Code {
    Syntax,
    UnknownBlockKind,
    ExpressionParse,
    InvalidReferenceSolution,
    UnknownTag,
    UnknownLesson,
    InvalidScoringLimits,
  };

  CodecError(Code code, std::string message) : std::runtime_error(std::move(message)), code_(code) {}

  static CodecError syntax(std::size_t line, std::size_t column, const std::string& message);
  /// Schema-level problem at a JSON pointer path (no byte position).
  static CodecError at_path(const std::string& path, const std::string& message);

  Code code() const { return code_; }
  std::string_view code_name() const;
  /// 1-based position for malformed JSON; 0 for schema errors, which carry `path`.
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& path() const { return path_; }
  /// Block whose expression failed to parse, or the unknown kind/tag name.
  const std::string& subject() const { return subject_; }
  const model::ValidationReport& report() const { return report_; }

  CodecError& with_subject(std::string s) {
    subject_ = std::move(s);
    return *this;
  }
  CodecError& with_report(model::ValidationReport r) {
    report_ = std::move(r);
    return *this;
  }

 private:
  Code code_;
  std::size_t line_ = 0;
  std::size_t column_ = 0;
  std::string path_;
  std::string subject_;
  model::ValidationReport report_;
};

/// Parses a `.sol.json` document. Blank input yields an empty program.
model::Program parse_solution(std::string_view document,
                              const model::TemplateRegistry& registry = model::TemplateRegistry::builtin());

/// Canonical, byte-stable encoding of a program.
std::string serialize_solution(const model::Program& program,
                               const model::TemplateRegistry& registry = model::TemplateRegistry::builtin());

struct ScoringLimits {
  std::int64_t time_limit_seconds = 600;
  std::int64_t feedback_limit = 10;
};

struct RuleOverride {
  std::string rule_id;
  bool enabled = false;
};

struct Exercise {
  std::string id;
  std::string lesson_id;
  std::string problem_text;
  std::set<std::string> allowed_layers;
  std::set<std::string> problem_tags;
  model::Program reference_solution;
  ScoringLimits scoring_limits;
  std::vector<RuleOverride> rule_overrides;
  /// Behavioural check applied once the solution is constraint-clean.
  std::optional<std::string> expected_stdout;
  std::vector<std::string> stdin_script;
  std::optional<feedback::FeedbackKind> feedback_kind;
};

/// Parses an `.exercise.json` document; tags must come from `tag_vocabulary`.
Exercise parse_exercise(std::string_view document, const std::set<std::string>& tag_vocabulary,
                        const model::TemplateRegistry& registry = model::TemplateRegistry::builtin());

std::string serialize_exercise(const Exercise& exercise,
                               const model::TemplateRegistry& registry = model::TemplateRegistry::builtin());

}  // namespace tutor::codec
