#include "tutor/itest/itest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

namespace tutor::itest {

using nlohmann::json;

namespace {

void invalid(const QuestionRecord& q, const std::string& what) {
  throw ItestError(ItestError::Code::InvalidQuestion, "question '" + q.id + "': " + what);
}

/// Priority, then never-used first, then oldest use, then id.
bool fresher(const QuestionRecord& a, const QuestionRecord& b) {
  if (a.choice_priority != b.choice_priority) return a.choice_priority > b.choice_priority;
  if (a.last_used_at.has_value() != b.last_used_at.has_value()) return !a.last_used_at.has_value();
  if (a.last_used_at && *a.last_used_at != *b.last_used_at) return *a.last_used_at < *b.last_used_at;
  return a.id < b.id;
}

json question_to_json(const QuestionRecord& q) {
  return json{{"id", q.id},
              {"lesson_id", q.lesson_id},
              {"stem", q.stem},
              {"choices", q.choices},
              {"correct_index", q.correct_index},
              {"difficulty", q.difficulty},
              {"choice_priority", q.choice_priority},
              {"answering_time_seconds", q.answering_time_seconds}};
}

QuestionRecord question_from_json(const json& j) {
  static const std::set<std::string> kFields = {"id",         "lesson_id",       "stem",
                                                "choices",    "correct_index",   "difficulty",
                                                "choice_priority", "answering_time_seconds"};
  if (!j.is_object()) throw ItestError(ItestError::Code::MalformedDocument, "a question must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!kFields.count(key)) throw ItestError(ItestError::Code::MalformedDocument, "unknown question field '" + key + "'");
  }
  try {
    QuestionRecord q;
    q.id = j.at("id").get<std::string>();
    q.lesson_id = j.at("lesson_id").get<std::string>();
    q.stem = j.at("stem").get<std::string>();
    q.choices = j.at("choices").get<std::vector<std::string>>();
    q.correct_index = j.at("correct_index").get<int>();
    q.difficulty = j.at("difficulty").get<int>();
    q.choice_priority = j.at("choice_priority").get<int>();
    q.answering_time_seconds = j.at("answering_time_seconds").get<std::int64_t>();
    validate_question(q);
    return q;
  } catch (const json::exception& e) {
    throw ItestError(ItestError::Code::MalformedDocument, std::string("malformed question: ") + e.what());
  }
}

json parse_json(std::string_view document) {
  try {
    return json::parse(document);
  } catch (const json::exception& e) {
    throw ItestError(ItestError::Code::MalformedDocument, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string_view itest_error_code_name(ItestError::Code code) {
  switch (code) {
    case ItestError::Code::InvalidQuestion:
      return "InvalidQuestion";
    case ItestError::Code::DuplicateQuestion:
      return "DuplicateQuestion";
    case ItestError::Code::UnknownQuestion:
      return "UnknownQuestion";
    case ItestError::Code::EmptyBankForLesson:
      return "EmptyBankForLesson";
    case ItestError::Code::UnknownQuestionInAnswers:
      return "UnknownQuestionInAnswers";
    case ItestError::Code::InvalidAnswer:
      return "InvalidAnswer";
    case ItestError::Code::InsufficientQuestions:
      return "InsufficientQuestions";
    case ItestError::Code::InvalidConfig:
      return "InvalidConfig";
    case ItestError::Code::MalformedDocument:
      return "MalformedDocument";
  }
  return "Unknown";
}

void validate_question(const QuestionRecord& q) {
  if (q.id.empty()) invalid(q, "id must not be empty");
  if (q.lesson_id.empty()) invalid(q, "lesson_id must not be empty");
  if (q.choices.size() != kChoiceCount) {
    invalid(q, "needs exactly 5 choices, found " + std::to_string(q.choices.size()));
  }
  if (q.correct_index < 0 || q.correct_index >= static_cast<int>(kChoiceCount)) invalid(q, "correct_index must be 0..4");
  if (q.difficulty < kMinDifficulty || q.difficulty > kMaxDifficulty) invalid(q, "difficulty must be 1..5");
  if (q.choice_priority < 0 || q.choice_priority > 100) invalid(q, "choice_priority must be 0..100");
  if (q.answering_time_seconds <= 0) invalid(q, "answering_time_seconds must be positive");
}

QuestionBank::QuestionBank(std::vector<QuestionRecord> questions) {
  for (QuestionRecord& q : questions) add(std::move(q));
}

void QuestionBank::add(QuestionRecord question) {
  validate_question(question);
  if (questions_.count(question.id)) {
    throw ItestError(ItestError::Code::DuplicateQuestion, "duplicate question id '" + question.id + "'");
  }
  std::string id = question.id;
  questions_.emplace(std::move(id), std::move(question));
}

void QuestionBank::upsert(QuestionRecord question) {
  validate_question(question);
  if (auto it = questions_.find(question.id); it != questions_.end()) {
    if (!question.last_used_at) question.last_used_at = it->second.last_used_at;
    it->second = std::move(question);
    return;
  }
  std::string id = question.id;
  questions_.emplace(std::move(id), std::move(question));
}

void QuestionBank::remove(std::string_view id) {
  auto it = questions_.find(id);
  if (it == questions_.end()) throw ItestError(ItestError::Code::UnknownQuestion, "no question '" + std::string(id) + "'");
  questions_.erase(it);
}

const QuestionRecord* QuestionBank::find(std::string_view id) const {
  auto it = questions_.find(id);
  return it == questions_.end() ? nullptr : &it->second;
}

QuestionRecord* QuestionBank::find_mutable(std::string_view id) {
  auto it = questions_.find(id);
  return it == questions_.end() ? nullptr : &it->second;
}

std::vector<const QuestionRecord*> QuestionBank::of_lesson(std::string_view lesson_id) const {
  std::vector<const QuestionRecord*> out;
  for (const auto& [id, q] : questions_) {
    if (q.lesson_id == lesson_id) out.push_back(&q);
  }
  return out;
}

QuestionBank parse_questions(std::string_view document) {
  json j = parse_json(document);
  if (!j.is_array()) throw ItestError(ItestError::Code::MalformedDocument, "a question document must be an array");
  QuestionBank bank;
  for (const json& item : j) bank.add(question_from_json(item));
  return bank;
}

QuestionRecord parse_question(std::string_view document) { return question_from_json(parse_json(document)); }

std::string serialize_questions(const QuestionBank& bank) {
  json out = json::array();
  for (const auto& [id, q] : bank.questions()) out.push_back(question_to_json(q));
  return out.dump(2) + "\n";
}

void validate_config(const ItestConfig& c) {
  auto fail = [](const std::string& m) { throw ItestError(ItestError::Code::InvalidConfig, m); };
  for (double w : {c.weight_pv, c.weight_quiz, c.weight_ctutor}) {
    if (!std::isfinite(w) || w < 0) fail("weights must be non-negative");
  }
  if (std::abs(c.weight_pv + c.weight_quiz + c.weight_ctutor - 1.0) > 1e-9) fail("weights must sum to 1");
  if (!(c.default_level >= 0 && c.default_level <= 100)) fail("default_level must be within [0,100]");
  if (c.questions_per_quiz <= 0) fail("questions_per_quiz must be positive");
  if (c.priority_decrease < 0 || c.priority_increase < 0) fail("priority steps must not be negative");
}

StudentModel build_student_model(const std::string& student_id, const std::vector<perf::LearningEvent>& events,
                                 int lessons_total) {
  StudentModel model;
  model.student_id = student_id;
  model.averages = perf::averages_of(events, lessons_total);
  for (const perf::LearningEvent& e : events) {
    if (std::holds_alternative<perf::ExerciseCompleted>(e.payload)) {
      ++model.completed_ctutor_exercises;
    } else if (const auto* q = std::get_if<perf::QuizScored>(&e.payload)) {
      model.quiz_history.emplace_back(q->quiz_id, q->score);
    }
  }
  return model;
}

double learning_level(const perf::StudentAverages& averages, const ItestConfig& config) {
  double weighted = 0;
  double weight = 0;
  auto add = [&](const std::optional<double>& component, double w) {
    if (!component) return;
    weighted += w * *component;
    weight += w;
  };
  add(averages.page_view_score, config.weight_pv);
  add(averages.avg_quiz_score, config.weight_quiz);
  add(averages.avg_ctutor_score, config.weight_ctutor);
  if (weight <= 0) return config.default_level;
  // Renormalise only when a component is missing, so the complete case is
  // the plain weighted sum.
  double level = std::abs(weight - 1.0) <= 1e-12 ? weighted : weighted / weight;
  return std::clamp(level, 0.0, 100.0);
}

int difficulty_band(double level) {
  if (!(level >= 0 && level <= 100)) throw std::out_of_range("learning level must be within [0,100]");
  if (level < 20) return 1;
  if (level < 40) return 2;
  if (level < 60) return 3;
  if (level < 80) return 4;
  return 5;
}

std::vector<const QuestionRecord*> rank_candidates(const QuestionBank& bank, std::string_view lesson_id,
                                                   int target_difficulty) {
  std::vector<const QuestionRecord*> ranked = bank.of_lesson(lesson_id);
  std::sort(ranked.begin(), ranked.end(), [target_difficulty](const QuestionRecord* a, const QuestionRecord* b) {
    int da = std::abs(a->difficulty - target_difficulty);
    int db = std::abs(b->difficulty - target_difficulty);
    if (da != db) return da < db;
    return fresher(*a, *b);
  });
  return ranked;
}

Quiz assemble_quiz(const QuestionBank& bank, const StudentModel& student, const std::string& lesson_id,
                   const ItestConfig& config, std::string quiz_id, perf::Timestamp created_at) {
  validate_config(config);
  int target = difficulty_band(learning_level(student.averages, config));
  std::vector<const QuestionRecord*> ranked = rank_candidates(bank, lesson_id, target);
  if (ranked.empty()) {
    throw ItestError(ItestError::Code::EmptyBankForLesson, "no questions for lesson '" + lesson_id + "'");
  }
  Quiz quiz{std::move(quiz_id), student.student_id, lesson_id, {}, 0, created_at};
  std::size_t take = std::min(ranked.size(), static_cast<std::size_t>(config.questions_per_quiz));
  for (std::size_t i = 0; i < take; ++i) {
    quiz.question_ids.push_back(ranked[i]->id);
    quiz.total_time_seconds += ranked[i]->answering_time_seconds;
  }
  return quiz;
}

QuizGrade grade_quiz(const Quiz& quiz, const std::map<std::string, int, std::less<>>& answers,
                     const QuestionBank& bank) {
  for (const auto& [id, chosen] : answers) {
    if (std::find(quiz.question_ids.begin(), quiz.question_ids.end(), id) == quiz.question_ids.end()) {
      throw ItestError(ItestError::Code::UnknownQuestionInAnswers, "question '" + id + "' is not part of quiz '" + quiz.id + "'");
    }
    if (chosen < 0 || chosen >= static_cast<int>(kChoiceCount)) {
      throw ItestError(ItestError::Code::InvalidAnswer, "answer for '" + id + "' must be 0..4");
    }
  }
  QuizGrade grade;
  for (const std::string& id : quiz.question_ids) {
    const QuestionRecord* q = bank.find(id);
    if (q == nullptr) throw ItestError(ItestError::Code::UnknownQuestion, "quiz refers to missing question '" + id + "'");
    QuestionResult r{id, std::nullopt, q->correct_index, false};
    if (auto it = answers.find(id); it != answers.end()) {
      r.chosen_index = it->second;
      r.correct = it->second == q->correct_index;
    }
    grade.correct_count += r.correct ? 1 : 0;
    grade.results.push_back(std::move(r));
  }
  if (!quiz.question_ids.empty()) {
    double percent = 100.0 * static_cast<double>(grade.correct_count) / static_cast<double>(quiz.question_ids.size());
    grade.score = std::round(percent * 100.0) / 100.0;
  }
  return grade;
}

void update_priorities(QuestionBank& bank, const Quiz& quiz, const ItestConfig& config) {
  std::set<std::string, std::less<>> used(quiz.question_ids.begin(), quiz.question_ids.end());
  std::vector<std::string> same_lesson;
  for (const QuestionRecord* q : bank.of_lesson(quiz.lesson_id)) same_lesson.push_back(q->id);
  for (const std::string& id : same_lesson) {
    QuestionRecord& q = *bank.find_mutable(id);
    if (used.count(id)) {
      q.choice_priority = std::max(0, q.choice_priority - config.priority_decrease);
      q.last_used_at = quiz.created_at;
    } else {
      q.choice_priority = std::min(100, q.choice_priority + config.priority_increase);
    }
  }
  // Quiz members from other lessons (not produced by assemble_quiz) still
  // count as used.
  for (const std::string& id : used) {
    QuestionRecord* q = bank.find_mutable(id);
    if (q == nullptr || q->lesson_id == quiz.lesson_id) continue;
    q->choice_priority = std::max(0, q->choice_priority - config.priority_decrease);
    q->last_used_at = quiz.created_at;
  }
}

std::vector<std::string> assemble_exam(const QuestionBank& bank, const std::vector<std::string>& term_lessons,
                                       const ExamPolicy& policy) {
  if (policy.per_difficulty <= 0) throw ItestError(ItestError::Code::InvalidConfig, "per_difficulty must be positive");
  std::vector<std::string> lessons;
  for (const std::string& l : term_lessons) {
    if (std::find(lessons.begin(), lessons.end(), l) == lessons.end()) lessons.push_back(l);
  }
  // pools[difficulty][lesson] = questions best-first; cursors track what is taken
  constexpr int kLevels = kMaxDifficulty - kMinDifficulty + 1;
  std::vector<std::vector<std::vector<const QuestionRecord*>>> pools(kLevels,
                                                                      std::vector<std::vector<const QuestionRecord*>>(lessons.size()));
  std::size_t available = 0;
  for (std::size_t li = 0; li < lessons.size(); ++li) {
    for (const QuestionRecord* q : bank.of_lesson(lessons[li])) {
      pools[q->difficulty - kMinDifficulty][li].push_back(q);
      ++available;
    }
  }
  const auto needed = static_cast<std::size_t>(policy.question_count());
  if (available < needed) {
    throw ItestError(ItestError::Code::InsufficientQuestions,
                     "exam needs " + std::to_string(needed) + " questions, bank has " + std::to_string(available), needed,
                     available);
  }
  for (auto& level : pools) {
    for (auto& pool : level) std::sort(pool.begin(), pool.end(), [](auto* a, auto* b) { return fresher(*a, *b); });
  }
  std::vector<std::vector<std::size_t>> taken(kLevels, std::vector<std::size_t>(lessons.size(), 0));
  // One rotation shared by all levels keeps lessons balanced across the exam.
  std::size_t next_lesson = 0;

  // Takes up to `count` questions of `level`, cycling over lessons.
  auto draw = [&](int level, std::size_t count, std::vector<std::string>& into) {
    std::size_t drawn = 0;
    std::size_t idle = 0;
    while (drawn < count && idle < lessons.size()) {
      std::size_t li = next_lesson++ % lessons.size();
      auto& pool = pools[level][li];
      if (taken[level][li] < pool.size()) {
        into.push_back(pool[taken[level][li]++]->id);
        ++drawn;
        idle = 0;
      } else {
        ++idle;
      }
    }
    return drawn;
  };

  std::vector<std::vector<std::string>> slots(kLevels);
  for (int level = 0; level < kLevels; ++level) draw(level, static_cast<std::size_t>(policy.per_difficulty), slots[level]);
  for (int level = 0; level < kLevels; ++level) {
    for (int distance = 1; distance < kLevels; ++distance) {
      for (int source : {level - distance, level + distance}) {
        std::size_t missing = static_cast<std::size_t>(policy.per_difficulty) - slots[level].size();
        if (missing == 0) break;
        if (source >= 0 && source < kLevels) draw(source, missing, slots[level]);
      }
    }
  }
  std::vector<std::string> exam;
  for (const auto& slot : slots) exam.insert(exam.end(), slot.begin(), slot.end());
  return exam;
}

}  // namespace tutor::itest
