#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tutor/perf/performance_store.hpp"

namespace tutor::itest {

inline constexpr std::size_t kChoiceCount = 5;
inline constexpr int kMinDifficulty = 1;
inline constexpr int kMaxDifficulty = 5;

struct QuestionRecord {
  std::string id;
  std::string lesson_id;
  std::string stem;
  std::vector<std::string> choices;
  int correct_index = 0;
  /// 1 very easy .. 5 very hard.
  int difficulty = 3;
  int choice_priority = 50;
  std::int64_t answering_time_seconds = 60;
  /// Runtime state; never part of question documents.
  std::optional<perf::Timestamp> last_used_at;

  friend bool operator==(const QuestionRecord&, const QuestionRecord&) = default;
};

class ItestError : public std::runtime_error {
 public:
  enum class Code {
    InvalidQuestion,
    DuplicateQuestion,
    UnknownQuestion,
    EmptyBankForLesson,
    UnknownQuestionInAnswers,
    InvalidAnswer,
    InsufficientQuestions,
    InvalidConfig,
    MalformedDocument,
  };

  ItestError(Code code, const std::string& message, std::size_t needed = 0, std::size_t available = 0)
      : std::runtime_error(message), code_(code), needed_(needed), available_(available) {}

  Code code() const { return code_; }
  /// Set for InsufficientQuestions.
  std::size_t needed() const { return needed_; }
  std::size_t available() const { return available_; }

 private:
  Code code_;
  std::size_t needed_;
  std::size_t available_;
};

std::string_view itest_error_code_name(ItestError::Code code);

/// Throws ItestError(InvalidQuestion) naming the first broken invariant.
void validate_question(const QuestionRecord& question);

/// Questions keyed by id; every stored record satisfies validate_question.
class QuestionBank {
 public:
  QuestionBank() = default;
  explicit QuestionBank(std::vector<QuestionRecord> questions);

  /// Throws InvalidQuestion or DuplicateQuestion.
  void add(QuestionRecord question);
  /// Inserts or replaces; keeps last_used_at of a replaced record.
  void upsert(QuestionRecord question);
  /// Throws UnknownQuestion.
  void remove(std::string_view id);

  const QuestionRecord* find(std::string_view id) const;
  QuestionRecord* find_mutable(std::string_view id);
  const std::map<std::string, QuestionRecord, std::less<>>& questions() const { return questions_; }
  std::size_t size() const { return questions_.size(); }
  std::vector<const QuestionRecord*> of_lesson(std::string_view lesson_id) const;

  friend bool operator==(const QuestionBank&, const QuestionBank&) = default;

 private:
  std::map<std::string, QuestionRecord, std::less<>> questions_;
};

/// `.questions.json`: an array of question objects without last_used_at.
/// Throws ItestError (MalformedDocument, InvalidQuestion, DuplicateQuestion).
QuestionBank parse_questions(std::string_view document);
std::string serialize_questions(const QuestionBank& bank);
QuestionRecord parse_question(std::string_view document);

struct ItestConfig {
  double weight_pv = 0.10;
  double weight_quiz = 0.40;
  double weight_ctutor = 0.50;
  double default_level = 50;
  int questions_per_quiz = 10;
  int priority_decrease = 10;
  int priority_increase = 1;
};

/// Throws InvalidConfig unless weights are non-negative and sum to 1
/// (within 1e-9), default_level is in [0,100] and counts are positive.
void validate_config(const ItestConfig& config);

struct StudentModel {
  std::string student_id;
  perf::StudentAverages averages;
  std::int64_t completed_ctutor_exercises = 0;
  /// (quiz id, score) in the order the quizzes were scored.
  std::vector<std::pair<std::string, double>> quiz_history;

  friend bool operator==(const StudentModel&, const StudentModel&) = default;
};

StudentModel build_student_model(const std::string& student_id, const std::vector<perf::LearningEvent>& events,
                                 int lessons_total);

/// Weighted sum of the present components with their weights renormalised
/// to 1; default_level when all are absent.
double learning_level(const perf::StudentAverages& averages, const ItestConfig& config = {});

/// Fifths of [0,100]: [0,20) → 1 … [80,100] → 5. Throws std::out_of_range
/// outside [0,100].
int difficulty_band(double level);

struct Quiz {
  std::string id;
  std::string student_id;
  std::string lesson_id;
  std::vector<std::string> question_ids;
  std::int64_t total_time_seconds = 0;
  perf::Timestamp created_at = 0;

  friend bool operator==(const Quiz&, const Quiz&) = default;
};

/// Lesson questions ranked by the chooser: closeness of difficulty to the
/// target band, then priority (high first), then freshness (never used,
/// then oldest use), then id.
std::vector<const QuestionRecord*> rank_candidates(const QuestionBank& bank, std::string_view lesson_id,
                                                   int target_difficulty);

/// Throws EmptyBankForLesson.
Quiz assemble_quiz(const QuestionBank& bank, const StudentModel& student, const std::string& lesson_id,
                   const ItestConfig& config, std::string quiz_id, perf::Timestamp created_at);

struct QuestionResult {
  std::string question_id;
  std::optional<int> chosen_index;
  int correct_index = 0;
  bool correct = false;

  friend bool operator==(const QuestionResult&, const QuestionResult&) = default;
};

struct QuizGrade {
  /// Percentage of correct answers rounded to two decimals.
  double score = 0;
  std::size_t correct_count = 0;
  std::vector<QuestionResult> results;
};

/// Unanswered questions count as incorrect. Throws UnknownQuestionInAnswers
/// for answers outside the quiz, InvalidAnswer for indices outside 0..4.
QuizGrade grade_quiz(const Quiz& quiz, const std::map<std::string, int, std::less<>>& answers,
                     const QuestionBank& bank);

/// Used questions lose priority (floor 0) and get last_used_at; unused
/// questions of the same lesson gain priority (cap 100).
void update_priorities(QuestionBank& bank, const Quiz& quiz, const ItestConfig& config = {});

struct ExamPolicy {
  int per_difficulty = 5;
  int question_count() const { return per_difficulty * (kMaxDifficulty - kMinDifficulty + 1); }
};

/// Non-adaptive exam: per_difficulty questions from each level, spread
/// round-robin over `term_lessons`; shortfalls are filled from the nearest
/// levels (lower first on ties). Ordered by slot difficulty. Throws
/// InsufficientQuestions.
std::vector<std::string> assemble_exam(const QuestionBank& bank, const std::vector<std::string>& term_lessons,
                                       const ExamPolicy& policy = {});

}  // namespace tutor::itest
