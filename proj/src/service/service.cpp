#include "tutor/service/service.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <utility>

#include "tutor/codec/lessons.hpp"
#include "tutor/grading/grading.hpp"
#include "tutor/itest/itest.hpp"
#include "tutor/rules/knowledge_base.hpp"
#include "tutor/service/pipeline.hpp"

namespace tutor::service {

namespace fs = std::filesystem;
using nlohmann::json;

perf::Timestamp system_clock_seconds() {
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

namespace {

/// Thrown inside handlers; becomes {"error": {...}} with `status`.
struct ApiError {
  int status;
  std::string code;
  std::string message;
  json details = json::object();
};

ApiError not_found(const std::string& what, const std::string& id) {
  return {404, "NotFound", what + " '" + id + "' does not exist"};
}

ApiError malformed(const std::string& message) { return {422, "MalformedRequest", message}; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

/// Replaces `path` in one rename so readers never see a partial document.
void write_atomically(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot append to " + path.string());
}

/// Identifiers double as file names.
bool safe_id(std::string_view id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
           c == '.';
  });
}

std::vector<fs::path> files_ending_with(const std::vector<fs::path>& roots, std::string_view suffix) {
  std::vector<fs::path> out;
  for (const fs::path& root : roots) {
    if (fs::is_regular_file(root)) {
      out.push_back(root);
    } else if (fs::is_directory(root)) {
      for (const auto& entry : fs::directory_iterator(root)) {
        std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > suffix.size() && name.ends_with(suffix)) {
          out.push_back(entry.path());
        }
      }
    } else {
      throw ConfigError("no such file or directory: " + root.string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    if (end > start) out.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

json parse_object(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw malformed("request body must be a JSON object");
  return doc;
}

double number_field(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number()) throw malformed(std::string("'") + key + "' must be a number");
  return doc[key].get<double>();
}

std::string string_field(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_string() || doc[key].get<std::string>().empty()) {
    throw malformed(std::string("'") + key + "' must be a non-empty string");
  }
  return doc[key].get<std::string>();
}

struct Session {
  std::string student_id;
  std::string exercise_id;
  perf::Timestamp started_at = 0;
  std::int64_t feedback_shown_count = 0;
  bool completed = false;
  std::optional<int> learning_score;
};

json session_json(const Session& s) {
  return {{"student_id", s.student_id},
          {"exercise_id", s.exercise_id},
          {"started_at", s.started_at},
          {"feedback_shown_count", s.feedback_shown_count},
          {"completed", s.completed},
          {"learning_score", s.learning_score ? json(*s.learning_score) : json(nullptr)}};
}

Session session_from_json(const json& j) {
  Session s;
  s.student_id = j.at("student_id").get<std::string>();
  s.exercise_id = j.at("exercise_id").get<std::string>();
  s.started_at = j.at("started_at").get<perf::Timestamp>();
  s.feedback_shown_count = j.at("feedback_shown_count").get<std::int64_t>();
  s.completed = j.at("completed").get<bool>();
  if (!j.at("learning_score").is_null()) s.learning_score = j.at("learning_score").get<int>();
  return s;
}

struct StoredQuiz {
  itest::Quiz quiz;
  /// The questions as they were when the quiz was assembled.
  itest::QuestionBank snapshot;
  json grade;  // null until graded
};

json quiz_json(const itest::Quiz& q) {
  return {{"id", q.id},
          {"student_id", q.student_id},
          {"lesson_id", q.lesson_id},
          {"question_ids", q.question_ids},
          {"total_time_seconds", q.total_time_seconds},
          {"created_at", q.created_at}};
}

itest::Quiz quiz_from_json(const json& j) {
  itest::Quiz q;
  q.id = j.at("id").get<std::string>();
  q.student_id = j.at("student_id").get<std::string>();
  q.lesson_id = j.at("lesson_id").get<std::string>();
  q.question_ids = j.at("question_ids").get<std::vector<std::string>>();
  q.total_time_seconds = j.at("total_time_seconds").get<std::int64_t>();
  q.created_at = j.at("created_at").get<perf::Timestamp>();
  return q;
}

json stored_quiz_json(const StoredQuiz& s) {
  json snapshot = json::array();
  for (const auto& [_, q] : s.snapshot.questions()) snapshot.push_back(question_document(q));
  return {{"quiz", quiz_json(s.quiz)}, {"snapshot", std::move(snapshot)}, {"grade", s.grade}};
}

json quiz_for_student(const StoredQuiz& s) {
  json questions = json::array();
  for (const std::string& id : s.quiz.question_ids) questions.push_back(question_for_student(*s.snapshot.find(id)));
  json out = quiz_json(s.quiz);
  out["questions"] = std::move(questions);
  out["graded"] = !s.grade.is_null();
  return out;
}

struct StoredGrade {
  std::string group;
  grading::GradeRecord record;
};

json grade_json(const StoredGrade& g) {
  json out = to_json(g.record);
  out["group"] = g.group;
  return out;
}

StoredGrade grade_from_json(const json& j) {
  StoredGrade g;
  g.group = j.at("group").get<std::string>();
  auto& r = g.record;
  r.student_id = j.at("student_id").get<std::string>();
  r.visa = j.at("visa").get<double>();
  r.final_exam = j.at("final_exam").get<double>();
  const json& a = j.at("activities");
  r.activity_averages = {a.at("homework").get<double>(), a.at("forum").get<double>(), a.at("chat").get<double>()};
  r.adjusted_final = j.at("adjusted_final").get<double>();
  r.term_grade = j.at("term_grade").get<double>();
  r.passed = j.at("passed").get<bool>();
  return g;
}

enum class Role { Student, Teacher };

struct Caller {
  Role role;
  std::string student_id;  // empty for the teacher
};

int lessons_total() { return static_cast<int>(codec::lesson_catalog().size()); }

}  // namespace

struct TutorService::State {
  ServiceConfig config;
  Clock clock;
  fs::path dir;
  std::unique_ptr<perf::PerformanceStore> store;

  // Exercises and the knowledge base; replaced wholesale on edits.
  mutable std::shared_mutex content_mutex;
  std::map<std::string, codec::Exercise, std::less<>> exercises;
  std::vector<rules::RuleDocument> base_rules;
  std::map<std::string, std::string> uploaded_rules;
  std::shared_ptr<const rules::KnowledgeBase> kb;

  // Question bank and quizzes.
  std::mutex bank_mutex;
  itest::QuestionBank bank;
  std::map<std::string, StoredQuiz, std::less<>> quizzes;

  std::mutex sessions_mutex;
  std::map<std::pair<std::string, std::string>, Session> sessions;
  std::size_t submission_count = 0;

  std::mutex locks_mutex;
  std::map<std::string, std::unique_ptr<std::mutex>> student_locks;

  std::mutex grades_mutex;
  std::vector<StoredGrade> grades;

  fs::path exercises_dir() const { return dir / "exercises"; }
  fs::path rules_dir() const { return dir / "rules"; }
  fs::path quizzes_dir() const { return dir / "quizzes"; }
  fs::path bank_path() const { return dir / "bank.questions.json"; }
  fs::path bank_usage_path() const { return dir / "bank_usage.json"; }
  fs::path sessions_path() const { return dir / "sessions.json"; }
  fs::path submissions_path() const { return dir / "submissions.ndjson"; }
  fs::path grades_path() const { return dir / "grades.json"; }

  std::mutex& student_lock(const std::string& student_id) {
    std::lock_guard guard(locks_mutex);
    auto& slot = student_locks[student_id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
  }

  // ---- loading --------------------------------------------------------

  /// Throws rules::KbError.
  std::shared_ptr<const rules::KnowledgeBase> build_kb(const std::map<std::string, std::string>& uploads) const {
    std::vector<rules::RuleDocument> docs = base_rules;
    for (const auto& [name, text] : uploads) docs.push_back({name, text});
    return std::make_shared<const rules::KnowledgeBase>(rules::load_knowledge_base(docs));
  }

  void load() {
    dir = config.data_dir;
    for (const fs::path& d : {dir, exercises_dir(), rules_dir(), quizzes_dir()}) fs::create_directories(d);
    store = std::make_unique<perf::PerformanceStore>(dir / "events.ndjson");

    for (const fs::path& file : files_ending_with(config.kb_paths, ".rules.json")) {
      base_rules.push_back({file.filename().string(), read_text(file)});
    }
    for (const fs::path& file : files_ending_with({rules_dir()}, ".rules.json")) {
      std::string name = file.filename().string();
      uploaded_rules[name.substr(0, name.size() - std::string_view(".rules.json").size())] = read_text(file);
    }
    try {
      kb = build_kb(uploaded_rules);
    } catch (const rules::KbError& e) {
      throw ConfigError(std::string("knowledge base: ") + e.what());
    }

    bool seed_exercises = fs::is_empty(exercises_dir());
    std::vector<fs::path> exercise_files =
        files_ending_with(seed_exercises ? config.exercise_paths : std::vector<fs::path>{exercises_dir()},
                          ".exercise.json");
    for (const fs::path& file : exercise_files) {
      try {
        codec::Exercise ex = codec::parse_exercise(read_text(file), kb->tag_vocabulary());
        if (!safe_id(ex.id)) throw ConfigError("exercise id '" + ex.id + "' is not usable as a file name");
        if (seed_exercises) {
          write_atomically(exercises_dir() / (ex.id + ".exercise.json"), codec::serialize_exercise(ex));
        }
        std::string id = ex.id;
        exercises.insert_or_assign(std::move(id), std::move(ex));
      } catch (const codec::CodecError& e) {
        throw ConfigError(file.string() + ": " + e.what());
      }
    }

    try {
      if (fs::exists(bank_path())) {
        bank = itest::parse_questions(read_text(bank_path()));
        if (fs::exists(bank_usage_path())) {
          json usage = json::parse(read_text(bank_usage_path()));
          for (const auto& [id, ts] : usage.items()) {
            if (auto* q = bank.find_mutable(id)) q->last_used_at = ts.get<perf::Timestamp>();
          }
        }
      } else {
        for (const fs::path& file : files_ending_with(config.bank_paths, ".questions.json")) {
          itest::QuestionBank seed = itest::parse_questions(read_text(file));
          for (const auto& [_, q] : seed.questions()) bank.add(q);
        }
        save_bank();
      }
    } catch (const itest::ItestError& e) {
      throw ConfigError(std::string("question bank: ") + e.what());
    } catch (const json::exception& e) {
      throw ConfigError(std::string("question bank usage: ") + e.what());
    }

    try {
      for (const fs::path& file : files_ending_with({quizzes_dir()}, ".json")) {
        json doc = json::parse(read_text(file));
        StoredQuiz stored;
        stored.quiz = quiz_from_json(doc.at("quiz"));
        for (const json& q : doc.at("snapshot")) stored.snapshot.add(itest::parse_question(q.dump()));
        stored.grade = doc.at("grade");
        std::string id = stored.quiz.id;
        quizzes.emplace(std::move(id), std::move(stored));
      }
      if (fs::exists(sessions_path())) {
        for (const json& j : json::parse(read_text(sessions_path()))) {
          Session s = session_from_json(j);
          sessions[{s.student_id, s.exercise_id}] = s;
        }
      }
      if (fs::exists(submissions_path())) {
        std::ifstream in(submissions_path());
        for (std::string line; std::getline(in, line);) submission_count += line.empty() ? 0 : 1;
      }
      if (fs::exists(grades_path())) {
        for (const json& j : json::parse(read_text(grades_path()))) grades.push_back(grade_from_json(j));
      }
    } catch (const json::exception& e) {
      throw ConfigError("data directory " + dir.string() + " is corrupt: " + e.what());
    } catch (const itest::ItestError& e) {
      throw ConfigError("quiz snapshot: " + std::string(e.what()));
    }
  }

  // ---- persistence (callers hold the matching mutex) -------------------

  void save_bank() const {
    write_atomically(bank_path(), itest::serialize_questions(bank));
    json usage = json::object();
    for (const auto& [id, q] : bank.questions()) {
      if (q.last_used_at) usage[id] = *q.last_used_at;
    }
    write_atomically(bank_usage_path(), usage.dump(2) + "\n");
  }

  void save_quiz(const StoredQuiz& quiz) const {
    write_atomically(quizzes_dir() / (quiz.quiz.id + ".json"), stored_quiz_json(quiz).dump(2) + "\n");
  }

  void save_sessions() const {
    json all = json::array();
    for (const auto& [_, s] : sessions) all.push_back(session_json(s));
    write_atomically(sessions_path(), all.dump(2) + "\n");
  }

  void save_grades() const {
    json all = json::array();
    for (const StoredGrade& g : grades) all.push_back(grade_json(g));
    write_atomically(grades_path(), all.dump(2) + "\n");
  }

  // ---- shared helpers ---------------------------------------------------

  itest::StudentModel student_model(const std::string& student_id) const {
    return itest::build_student_model(student_id, store->events_of(student_id), lessons_total());
  }

  void record(const std::string& student_id, perf::EventPayload payload) {
    store->record(perf::LearningEvent{student_id, clock(), std::move(payload)});
  }

  /// Starts the session on first contact; returns a copy.
  Session touch_session(const std::string& student_id, const std::string& exercise_id) {
    std::lock_guard guard(sessions_mutex);
    auto [it, inserted] = sessions.try_emplace({student_id, exercise_id});
    if (inserted) {
      it->second = Session{student_id, exercise_id, clock(), 0, false, std::nullopt};
      save_sessions();
    }
    return it->second;
  }

  Caller authenticate(const HttpRequest& request) const {
    constexpr std::string_view kPrefix = "Bearer ";
    std::string_view header = request.authorization;
    if (!header.starts_with(kPrefix)) throw ApiError{401, "Unauthorized", "missing bearer token"};
    std::string token(header.substr(kPrefix.size()));
    if (!config.teacher_token.empty() && token == config.teacher_token) return {Role::Teacher, ""};
    if (auto it = config.student_tokens.find(token); it != config.student_tokens.end()) {
      return {Role::Student, it->second};
    }
    throw ApiError{401, "Unauthorized", "invalid token"};
  }

  static void require_student(const Caller& caller) {
    if (caller.role != Role::Student) throw ApiError{403, "Forbidden", "this endpoint needs a student token"};
  }

  static void require_teacher(const Caller& caller) {
    if (caller.role != Role::Teacher) throw ApiError{403, "Forbidden", "this endpoint needs the teacher token"};
  }

  // ---- student endpoints -----------------------------------------------

  json get_exercise(const Caller& caller, const std::string& id) {
    json doc;
    {
      std::shared_lock guard(content_mutex);
      auto it = exercises.find(id);
      if (it == exercises.end()) throw not_found("exercise", id);
      doc = json::parse(codec::serialize_exercise(it->second));
    }
    doc.erase("reference_solution");
    json out = {{"exercise", std::move(doc)}};
    if (caller.role == Role::Student) out["session"] = session_json(touch_session(caller.student_id, id));
    return out;
  }

  json submit(const Caller& caller, const std::string& exercise_id, const std::string& body) {
    require_student(caller);
    const std::string& student = caller.student_id;
    std::lock_guard student_guard(student_lock(student));

    codec::Exercise exercise;
    std::shared_ptr<const rules::KnowledgeBase> kb_snapshot;
    {
      std::shared_lock guard(content_mutex);
      auto it = exercises.find(exercise_id);
      if (it == exercises.end()) throw not_found("exercise", exercise_id);
      exercise = it->second;
      kb_snapshot = kb;
    }

    json request = parse_object(body);
    if (!request.contains("solution")) throw malformed("'solution' is required");
    const json& solution = request["solution"];
    std::string document = solution.is_string() ? solution.get<std::string>() : solution.dump();

    Session session = touch_session(student, exercise_id);
    if (session.completed) {
      throw ApiError{409, "SessionCompleted",
                     "exercise '" + exercise_id + "' is already completed; a teacher can reset the session"};
    }

    model::Program program;
    try {
      program = codec::parse_solution(document);
    } catch (const codec::CodecError& e) {
      throw ApiError{422, std::string(e.code_name()), e.what(), to_json(e)};
    }

    interp::RunLimits limits;
    limits.max_steps = config.max_steps;
    limits.max_output_bytes = config.max_output_bytes;
    limits.stdin_script = exercise.stdin_script;
    if (request.contains("stdin")) {
      if (!request["stdin"].is_string()) throw malformed("'stdin' must be a string");
      limits.stdin_script = interp::split_stdin(request["stdin"].get<std::string>());
    }

    feedback::FeedbackKind kind = exercise.feedback_kind.value_or(config.default_feedback);
    double level = itest::learning_level(student_model(student).averages, config.itest);
    Evaluation evaluation;
    try {
      evaluation = evaluate_solution(program, exercise, *kb_snapshot, kind, level, limits);
    } catch (const InvalidSubmission& e) {
      throw ApiError{422, "InvalidProgram", e.what(), {{"defects", to_json(e.report())}}};
    }

    perf::Timestamp now = clock();
    std::int64_t elapsed = std::max<std::int64_t>(0, now - session.started_at);
    json out = to_json(evaluation);
    out["learning_score"] = nullptr;
    if (evaluation.completed) {
      int score = perf::learning_score(elapsed, session.feedback_shown_count, exercise.scoring_limits);
      session.completed = true;
      session.learning_score = score;
      record(student, perf::ExerciseCompleted{exercise_id, elapsed, session.feedback_shown_count, score});
      out["learning_score"] = score;
    } else {
      auto shown = static_cast<std::int64_t>(evaluation.feedback.size());
      session.feedback_shown_count += shown;
      record(student, perf::FeedbackShown{exercise_id, shown});
    }

    std::string id;
    {
      std::lock_guard guard(sessions_mutex);
      sessions[{student, exercise_id}] = session;
      save_sessions();
      id = "sub-" + std::to_string(++submission_count);
    }
    out["id"] = id;
    out["student_id"] = student;
    out["exercise_id"] = exercise_id;
    out["submitted_at"] = now;
    out["elapsed_seconds"] = elapsed;
    out["session"] = session_json(session);

    json stored = out;
    stored["program"] = json::parse(codec::serialize_solution(program));
    append_line(submissions_path(), stored.dump());
    return out;
  }

  json view_lesson(const Caller& caller, const std::string& lesson_id) {
    require_student(caller);
    if (codec::find_lesson(lesson_id) == nullptr) throw not_found("lesson", lesson_id);
    record(caller.student_id, perf::PageView{lesson_id});
    return {{"lesson_id", lesson_id}, {"recorded", true}};
  }

  json start_quiz(const Caller& caller, const std::string& lesson_id) {
    require_student(caller);
    if (codec::find_lesson(lesson_id) == nullptr) throw not_found("lesson", lesson_id);
    itest::StudentModel model = student_model(caller.student_id);
    double level = itest::learning_level(model.averages, config.itest);

    std::lock_guard guard(bank_mutex);
    std::string id = "quiz-" + std::to_string(quizzes.size() + 1);
    StoredQuiz stored;
    try {
      stored.quiz = itest::assemble_quiz(bank, model, lesson_id, config.itest, id, clock());
    } catch (const itest::ItestError& e) {
      throw ApiError{404, std::string(itest::itest_error_code_name(e.code())), e.what()};
    }
    for (const std::string& qid : stored.quiz.question_ids) stored.snapshot.add(*bank.find(qid));
    stored.grade = nullptr;
    itest::update_priorities(bank, stored.quiz, config.itest);
    save_quiz(stored);
    save_bank();
    json out = quiz_for_student(stored);
    out["learning_level"] = level;
    out["target_difficulty"] = itest::difficulty_band(level);
    quizzes.emplace(id, std::move(stored));
    return out;
  }

  json get_quiz(const Caller& caller, const std::string& quiz_id) {
    std::lock_guard guard(bank_mutex);
    auto it = quizzes.find(quiz_id);
    if (it == quizzes.end() || (caller.role == Role::Student && it->second.quiz.student_id != caller.student_id)) {
      throw not_found("quiz", quiz_id);
    }
    json out = quiz_for_student(it->second);
    out["grade"] = it->second.grade;
    return out;
  }

  json answer_quiz(const Caller& caller, const std::string& quiz_id, const std::string& body) {
    require_student(caller);
    std::lock_guard guard(bank_mutex);
    auto it = quizzes.find(quiz_id);
    if (it == quizzes.end() || it->second.quiz.student_id != caller.student_id) throw not_found("quiz", quiz_id);
    StoredQuiz& stored = it->second;
    if (!stored.grade.is_null()) throw ApiError{409, "AlreadyGraded", "quiz '" + quiz_id + "' is already graded"};

    json request = parse_object(body);
    if (!request.contains("answers") || !request["answers"].is_object()) {
      throw ApiError{422, "MalformedAnswers", "'answers' must map question ids to choice indices"};
    }
    std::map<std::string, int, std::less<>> answers;
    for (const auto& [qid, choice] : request["answers"].items()) {
      if (!choice.is_number_integer()) {
        throw ApiError{422, "MalformedAnswers", "answer for '" + qid + "' must be an integer choice index"};
      }
      answers[qid] = choice.get<int>();
    }

    itest::QuizGrade grade;
    try {
      grade = itest::grade_quiz(stored.quiz, answers, stored.snapshot);
    } catch (const itest::ItestError& e) {
      throw ApiError{422, std::string(itest::itest_error_code_name(e.code())), e.what()};
    }
    json results = json::array();
    for (const auto& r : grade.results) {
      results.push_back({{"question_id", r.question_id},
                         {"chosen_index", r.chosen_index ? json(*r.chosen_index) : json(nullptr)},
                         {"correct_index", r.correct_index},
                         {"correct", r.correct}});
    }
    json out = {{"quiz_id", quiz_id},
                {"score", grade.score},
                {"correct_count", grade.correct_count},
                {"total", stored.quiz.question_ids.size()},
                {"results", std::move(results)}};
    record(caller.student_id, perf::QuizScored{quiz_id, grade.score});
    stored.grade = out;
    save_quiz(stored);
    return out;
  }

  json get_model(const Caller& caller, const std::string& student_id) {
    if (caller.role == Role::Student && caller.student_id != student_id) {
      throw ApiError{403, "Forbidden", "students may only read their own model"};
    }
    itest::StudentModel model = student_model(student_id);
    double level = itest::learning_level(model.averages, config.itest);
    json history = json::array();
    for (const auto& [quiz, score] : model.quiz_history) history.push_back({{"quiz_id", quiz}, {"score", score}});
    return {{"student_id", student_id},
            {"averages", to_json(model.averages)},
            {"learning_level", level},
            {"difficulty_band", itest::difficulty_band(level)},
            {"completed_ctutor_exercises", model.completed_ctutor_exercises},
            {"quiz_history", std::move(history)}};
  }

  json create_exam(const std::string& body) {
    json request = parse_object(body);
    std::vector<std::string> lessons;
    if (request.contains("lesson_ids")) {
      if (!request["lesson_ids"].is_array()) throw malformed("'lesson_ids' must be an array of lesson ids");
      for (const json& l : request["lesson_ids"]) {
        if (!l.is_string() || codec::find_lesson(l.get<std::string>()) == nullptr) {
          throw not_found("lesson", l.is_string() ? l.get<std::string>() : l.dump());
        }
        lessons.push_back(l.get<std::string>());
      }
    } else if (request.contains("term")) {
      if (!request["term"].is_number_integer()) throw malformed("'term' must be an integer");
      int term = request["term"].get<int>();
      for (const codec::Lesson& l : codec::lesson_catalog()) {
        if (l.term == term) lessons.push_back(l.id);
      }
      if (lessons.empty()) throw not_found("term", std::to_string(term));
    } else {
      throw malformed("give 'term' or 'lesson_ids'");
    }
    itest::ExamPolicy policy;
    if (request.contains("per_difficulty")) {
      if (!request["per_difficulty"].is_number_integer() || request["per_difficulty"].get<int>() <= 0) {
        throw malformed("'per_difficulty' must be a positive integer");
      }
      policy.per_difficulty = request["per_difficulty"].get<int>();
    }

    std::lock_guard guard(bank_mutex);
    std::vector<std::string> ids;
    try {
      ids = itest::assemble_exam(bank, lessons, policy);
    } catch (const itest::ItestError& e) {
      throw ApiError{422, std::string(itest::itest_error_code_name(e.code())), e.what(),
                     {{"needed", e.needed()}, {"available", e.available()}}};
    }
    json questions = json::array();
    for (const std::string& id : ids) questions.push_back(question_for_student(*bank.find(id)));
    return {{"lesson_ids", lessons}, {"question_ids", ids}, {"questions", std::move(questions)}};
  }

  // ---- teacher endpoints -----------------------------------------------

  codec::Exercise parse_exercise_body(const std::string& body) const {
    std::shared_lock guard(content_mutex);
    try {
      codec::Exercise ex = codec::parse_exercise(body, kb->tag_vocabulary());
      if (!safe_id(ex.id)) throw malformed("exercise id may only use letters, digits, '-', '_' and '.'");
      return ex;
    } catch (const codec::CodecError& e) {
      throw ApiError{422, std::string(e.code_name()), e.what(), to_json(e)};
    }
  }

  json put_exercise(codec::Exercise ex, bool must_be_new) {
    std::unique_lock guard(content_mutex);
    if (must_be_new && exercises.count(ex.id) != 0) {
      throw ApiError{409, "DuplicateExercise", "exercise '" + ex.id + "' already exists"};
    }
    std::string text = codec::serialize_exercise(ex);
    write_atomically(exercises_dir() / (ex.id + ".exercise.json"), text);
    std::string id = ex.id;
    exercises.insert_or_assign(id, std::move(ex));
    return json::parse(text);
  }

  HttpResponse admin(const Caller& caller, const HttpRequest& request, const std::vector<std::string>& seg);

  json kb_stats() const {
    std::shared_lock guard(content_mutex);
    return kb_stats_json(*kb);
  }

  json averages_report() const {
    std::set<std::string> students;
    for (const auto& [_, id] : config.student_tokens) students.insert(id);
    for (const perf::LearningEvent& e : store->all_events()) students.insert(e.student_id);
    json rows = json::array();
    for (const std::string& id : students) {
      perf::StudentAverages avg = store->averages(id, lessons_total());
      json row = to_json(avg);
      row["student_id"] = id;
      row["learning_level"] = itest::learning_level(avg, config.itest);
      rows.push_back(std::move(row));
    }
    return {{"students", std::move(rows)}};
  }

  json cohort(const std::map<std::string, std::string>& query) {
    std::map<std::string, std::vector<double>> by_group;
    {
      std::lock_guard guard(grades_mutex);
      for (const StoredGrade& g : grades) by_group[g.group].push_back(g.record.term_grade);
    }
    std::string first, second;
    auto f = query.find("first"), s = query.find("second");
    if (f != query.end() && s != query.end()) {
      first = f->second;
      second = s->second;
    } else if (by_group.size() == 2) {
      first = by_group.begin()->first;
      second = std::next(by_group.begin())->first;
    } else {
      throw malformed("name the two groups with ?first=&second= (stored groups: " +
                      std::to_string(by_group.size()) + ")");
    }
    if (by_group.count(first) == 0) throw not_found("group", first);
    if (by_group.count(second) == 0) throw not_found("group", second);
    try {
      return to_json(grading::cohort_report(first, by_group[first], second, by_group[second], config.grading));
    } catch (const grading::GradingError& e) {
      throw ApiError{422, std::string(grading::grading_error_code_name(e.code())), e.what()};
    }
  }
};

HttpResponse TutorService::State::admin(const Caller& caller, const HttpRequest& request,
                                        const std::vector<std::string>& seg) {
  require_teacher(caller);
  const std::string& method = request.method;
  auto ok = [](json body, int status = 200) { return HttpResponse{status, body.dump()}; };
  std::size_t n = seg.size();
  const std::string resource = n > 2 ? seg[2] : "";

  if (resource == "exercises") {
    if (n == 3 && method == "GET") {
      std::shared_lock guard(content_mutex);
      json list = json::array();
      for (const auto& [id, ex] : exercises) list.push_back({{"id", id}, {"lesson_id", ex.lesson_id}});
      return ok(list);
    }
    if (n == 3 && method == "POST") return ok(put_exercise(parse_exercise_body(request.body), true), 201);
    if (n == 4) {
      const std::string& id = seg[3];
      if (method == "GET") {
        std::shared_lock guard(content_mutex);
        auto it = exercises.find(id);
        if (it == exercises.end()) throw not_found("exercise", id);
        return ok(json::parse(codec::serialize_exercise(it->second)));
      }
      if (method == "PUT") {
        codec::Exercise ex = parse_exercise_body(request.body);
        if (ex.id != id) throw malformed("document id '" + ex.id + "' does not match the path");
        return ok(put_exercise(std::move(ex), false));
      }
      if (method == "DELETE") {
        std::unique_lock guard(content_mutex);
        if (exercises.erase(id) == 0) throw not_found("exercise", id);
        fs::remove(exercises_dir() / (id + ".exercise.json"));
        return {204, ""};
      }
    }
  }

  if (resource == "questions") {
    std::lock_guard guard(bank_mutex);
    auto parse = [&] {
      try {
        return itest::parse_question(request.body);
      } catch (const itest::ItestError& e) {
        throw ApiError{422, std::string(itest::itest_error_code_name(e.code())), e.what()};
      }
    };
    if (n == 3 && method == "GET") {
      json list = json::array();
      auto lesson = request.query.find("lesson_id");
      for (const auto& [id, q] : bank.questions()) {
        if (lesson != request.query.end() && q.lesson_id != lesson->second) continue;
        json doc = question_document(q);
        doc["last_used_at"] = q.last_used_at ? json(*q.last_used_at) : json(nullptr);
        list.push_back(std::move(doc));
      }
      return ok(list);
    }
    if (n == 3 && method == "POST") {
      itest::QuestionRecord q = parse();
      if (codec::find_lesson(q.lesson_id) == nullptr) throw not_found("lesson", q.lesson_id);
      try {
        bank.add(q);
      } catch (const itest::ItestError& e) {
        throw ApiError{409, std::string(itest::itest_error_code_name(e.code())), e.what()};
      }
      save_bank();
      return ok(question_document(q), 201);
    }
    if (n == 4) {
      const std::string& id = seg[3];
      if (method == "GET") {
        const itest::QuestionRecord* q = bank.find(id);
        if (q == nullptr) throw not_found("question", id);
        return ok(question_document(*q));
      }
      if (method == "PUT") {
        itest::QuestionRecord q = parse();
        if (q.id != id) throw malformed("document id '" + q.id + "' does not match the path");
        if (codec::find_lesson(q.lesson_id) == nullptr) throw not_found("lesson", q.lesson_id);
        bank.upsert(q);
        save_bank();
        return ok(question_document(q));
      }
      if (method == "DELETE") {
        if (bank.find(id) == nullptr) throw not_found("question", id);
        bank.remove(id);
        save_bank();
        return {204, ""};
      }
    }
  }

  if (resource == "rules") {
    if (n == 3 && method == "GET") {
      std::shared_lock guard(content_mutex);
      json list = json::array();
      for (const rules::RuleDocument& d : base_rules) list.push_back({{"name", d.name}, {"source", "config"}});
      for (const auto& [name, _] : uploaded_rules) list.push_back({{"name", name}, {"source", "upload"}});
      return ok({{"documents", std::move(list)}, {"kb_stats", kb_stats_json(*kb)}});
    }
    bool create = n == 3 && method == "POST";
    bool replace = n == 4 && method == "PUT";
    if (create || replace) {
      std::unique_lock guard(content_mutex);
      std::string name;
      if (replace) {
        name = seg[3];
      } else if (auto it = request.query.find("name"); it != request.query.end()) {
        name = it->second;
      } else {
        for (std::size_t i = uploaded_rules.size() + 1;; ++i) {
          name = "upload-" + std::to_string(i);
          if (uploaded_rules.count(name) == 0) break;
        }
      }
      if (!safe_id(name)) throw malformed("rule document name may only use letters, digits, '-', '_' and '.'");
      if (create && uploaded_rules.count(name) != 0) {
        throw ApiError{409, "DuplicateDocument", "rule document '" + name + "' already exists"};
      }
      std::map<std::string, std::string> candidate = uploaded_rules;
      candidate[name] = request.body;
      std::shared_ptr<const rules::KnowledgeBase> rebuilt;
      try {
        rebuilt = build_kb(candidate);
      } catch (const rules::KbError& e) {
        throw ApiError{422, std::string(e.code_name()), e.what(), {{"document", e.document()}, {"rule_id", e.rule_id()}}};
      }
      write_atomically(rules_dir() / (name + ".rules.json"), request.body);
      uploaded_rules = std::move(candidate);
      kb = std::move(rebuilt);
      return ok({{"name", name}, {"kb_stats", kb_stats_json(*kb)}}, create ? 201 : 200);
    }
    if (n == 4 && method == "DELETE") {
      std::unique_lock guard(content_mutex);
      const std::string& name = seg[3];
      if (uploaded_rules.count(name) == 0) throw not_found("uploaded rule document", name);
      std::map<std::string, std::string> candidate = uploaded_rules;
      candidate.erase(name);
      try {
        kb = build_kb(candidate);
      } catch (const rules::KbError& e) {
        throw ApiError{422, std::string(e.code_name()), e.what()};
      }
      uploaded_rules = std::move(candidate);
      fs::remove(rules_dir() / (name + ".rules.json"));
      return {204, ""};
    }
  }

  if (resource == "activities" && n == 3 && method == "POST") {
    json body = parse_object(request.body);
    std::string student = string_field(body, "student_id");
    std::string kind = string_field(body, "kind");
    double points = number_field(body, "points");
    const grading::ActivityPoints& caps = config.grading.activity_caps;
    double cap = kind == "homework" ? caps.homework
                 : kind == "forum"  ? caps.forum
                 : kind == "chat"   ? caps.chat
                 : kind == perf::kPageViewScoreActivity ? 100.0
                                                        : -1.0;
    if (cap < 0) throw malformed("unknown activity kind '" + kind + "'");
    if (points < 0 || points > cap) {
      throw ApiError{422, "ActivityOverCap", kind + " points must lie in [0, " + json(cap).dump() + "]"};
    }
    record(student, perf::ActivityPoint{kind, points});
    return ok({{"student_id", student}, {"kind", kind}, {"points", points}}, 201);
  }

  if (resource == "grades") {
    if (n == 3 && method == "GET") {
      std::lock_guard guard(grades_mutex);
      json list = json::array();
      for (const StoredGrade& g : grades) list.push_back(grade_json(g));
      return ok(list);
    }
    if (n == 3 && method == "POST") {
      json body = parse_object(request.body);
      std::string student = string_field(body, "student_id");
      std::string group = string_field(body, "group");
      double visa = number_field(body, "visa");
      double final_exam = number_field(body, "final_exam");
      StoredGrade stored{group, {}};
      try {
        stored.record = grading::grade_student(student, visa, final_exam,
                                               grading::activity_averages(store->events_of(student)), config.grading);
      } catch (const grading::GradingError& e) {
        throw ApiError{422, std::string(grading::grading_error_code_name(e.code())), e.what()};
      }
      std::lock_guard guard(grades_mutex);
      auto same = [&](const StoredGrade& g) { return g.group == group && g.record.student_id == student; };
      if (auto it = std::find_if(grades.begin(), grades.end(), same); it != grades.end()) {
        *it = stored;
      } else {
        grades.push_back(stored);
      }
      save_grades();
      return ok(grade_json(stored), 201);
    }
  }

  if (resource == "sessions" && n == 5 && method == "DELETE") {
    std::lock_guard student_guard(student_lock(seg[3]));
    std::lock_guard guard(sessions_mutex);
    if (sessions.erase({seg[3], seg[4]}) == 0) throw not_found("session", seg[3] + "/" + seg[4]);
    save_sessions();
    return {204, ""};
  }

  if (resource == "reports" && n == 4 && method == "GET") {
    if (seg[3] == "averages") return ok(averages_report());
    if (seg[3] == "kb_stats") return ok(kb_stats());
    if (seg[3] == "cohort") return ok(cohort(request.query));
  }

  throw ApiError{404, "NotFound", "no route for " + method + " " + request.path};
}

TutorService::TutorService(ServiceConfig config, Clock clock) : state_(std::make_unique<State>()) {
  state_->config = std::move(config);
  state_->clock = std::move(clock);
  state_->load();
}

TutorService::~TutorService() = default;

const ServiceConfig& TutorService::config() const { return state_->config; }

std::vector<perf::LearningEvent> TutorService::events() const { return state_->store->all_events(); }

HttpResponse TutorService::handle(const HttpRequest& request) {
  State& s = *state_;
  auto ok = [](json body, int status = 200) { return HttpResponse{status, body.dump()}; };
  try {
    std::vector<std::string> seg = split_path(request.path);
    if (seg.empty() || seg[0] != "api") throw ApiError{404, "NotFound", "no route for " + request.path};
    Caller caller = s.authenticate(request);
    const std::string& method = request.method;
    std::size_t n = seg.size();
    const std::string resource = n > 1 ? seg[1] : "";

    if (resource == "admin") return s.admin(caller, request, seg);
    if (resource == "exercises" && n == 3 && method == "GET") return ok(s.get_exercise(caller, seg[2]));
    if (resource == "exercises" && n == 4 && seg[3] == "submissions" && method == "POST") {
      return ok(s.submit(caller, seg[2], request.body));
    }
    if (resource == "lessons" && n == 4 && method == "POST") {
      if (seg[3] == "views") return ok(s.view_lesson(caller, seg[2]), 201);
      if (seg[3] == "quizzes") return ok(s.start_quiz(caller, seg[2]), 201);
    }
    if (resource == "quizzes" && n == 3 && method == "GET") return ok(s.get_quiz(caller, seg[2]));
    if (resource == "quizzes" && n == 4 && seg[3] == "answers" && method == "POST") {
      return ok(s.answer_quiz(caller, seg[2], request.body));
    }
    if (resource == "students" && n == 4 && seg[3] == "model" && method == "GET") {
      return ok(s.get_model(caller, seg[2]));
    }
    if (resource == "exams" && n == 2 && method == "POST") return ok(s.create_exam(request.body), 201);
    throw ApiError{404, "NotFound", "no route for " + method + " " + request.path};
  } catch (const ApiError& e) {
    json error = {{"code", e.code}, {"message", e.message}};
    error.update(e.details);
    return {e.status, json{{"error", std::move(error)}}.dump()};
  } catch (const std::exception& e) {
    return {500, json{{"error", {{"code", "InternalError"}, {"message", e.what()}}}}.dump()};
  }
}

}  // namespace tutor::service
