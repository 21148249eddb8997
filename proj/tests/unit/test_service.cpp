#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <random>
#include <thread>

#include "../support/support.hpp"
#include "tutor/grading/grading.hpp"
#include "tutor/service/pipeline.hpp"
#include "tutor/service/service.hpp"

using namespace tutor;
using namespace tutor::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kTeacher = "teacher-secret";
constexpr const char* kAlice = "alice-token";
constexpr const char* kBob = "bob-token";

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path = fs::temp_directory_path() /
           ("tutor-service-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct Reply {
  int status;
  json body;
};

ServiceConfig make_config(const fs::path& dir, std::vector<fs::path> banks) {
  ServiceConfig config;
  config.data_dir = dir;
  config.kb_paths = {testing::data_dir() / "kb"};
  config.exercise_paths = {testing::data_dir() / "exercises"};
  config.bank_paths = std::move(banks);
  config.teacher_token = kTeacher;
  config.student_tokens = {{kAlice, "alice"}, {kBob, "bob"}};
  return config;
}

/// A service over a fresh data directory with a hand-driven clock.
struct Harness {
  TempDir tmp;
  perf::Timestamp now = 1'700'000'000;
  std::vector<fs::path> banks;
  std::unique_ptr<TutorService> service;

  explicit Harness(std::vector<fs::path> bank_files = {testing::fixture_dir() / "cli" / "bank10.questions.json"})
      : banks(std::move(bank_files)) {
    restart();
  }

  void restart() {
    service.reset();
    service = std::make_unique<TutorService>(make_config(tmp.path, banks), [this] { return now; });
  }

  Reply call(const std::string& method, const std::string& path, const char* token, const json& body = nullptr,
             std::map<std::string, std::string> query = {}) {
    HttpRequest request;
    request.method = method;
    request.path = path;
    request.query = std::move(query);
    if (token != nullptr) request.authorization = std::string("Bearer ") + token;
    if (!body.is_null()) request.body = body.is_string() ? body.get<std::string>() : body.dump();
    HttpResponse response = service->handle(request);
    return {response.status, response.body.empty() ? json(nullptr) : json::parse(response.body)};
  }
};

json solution(const std::string& name) {
  return json::parse(testing::read_file(testing::data_dir() / "solutions" / (name + ".sol.json")));
}

/// sum-range with "%f" for an int argument: one DataTypes violation.
json mistyped_sum_range() {
  json doc = solution("sum-range");
  for (json& block : doc["blocks"][1]["children"]) {
    if (block["id"] == "out") block["attrs"]["format"] = "%f\n";
  }
  return doc;
}

std::map<std::string, int> bank10_answers() {
  std::map<std::string, int> out;
  json bank = json::parse(testing::read_file(testing::fixture_dir() / "cli" / "bank10.questions.json"));
  for (const json& q : bank) out[q["id"].get<std::string>()] = q["correct_index"].get<int>();
  return out;
}

template <class Payload>
std::size_t count_events(const TutorService& service) {
  std::size_t n = 0;
  for (const perf::LearningEvent& e : service.events()) n += std::holds_alternative<Payload>(e.payload) ? 1 : 0;
  return n;
}

}  // namespace

TEST_SUITE("tutor_service") {
  TEST_CASE("authentication and routing") {
    Harness h;
    CHECK(h.call("GET", "/api/exercises/hello", nullptr).status == 401);
    Reply bad = h.call("GET", "/api/exercises/hello", "nope");
    CHECK(bad.status == 401);
    CHECK(bad.body["error"]["code"] == "Unauthorized");
    CHECK(h.call("GET", "/api/admin/exercises", kAlice).status == 403);
    CHECK(h.call("POST", "/api/exercises/hello/submissions", kTeacher, json{{"solution", solution("hello")}}).status ==
          403);
    CHECK(h.call("GET", "/api/nowhere", kAlice).status == 404);
    CHECK(h.call("GET", "/api/students/bob/model", kAlice).status == 403);
    CHECK(h.call("GET", "/api/students/bob/model", kTeacher).status == 200);
  }

  TEST_CASE("exercise documents hide the reference solution and open a session") {
    Harness h;
    Reply r = h.call("GET", "/api/exercises/sum-range", kAlice);
    REQUIRE(r.status == 200);
    CHECK_FALSE(r.body["exercise"].contains("reference_solution"));
    CHECK(r.body["exercise"]["lesson_id"] == "T1-10");
    CHECK(r.body["session"]["started_at"] == h.now);
    h.now += 50;
    // A second read keeps the original start.
    CHECK(h.call("GET", "/api/exercises/sum-range", kAlice).body["session"]["started_at"] == h.now - 50);
    Reply admin = h.call("GET", "/api/admin/exercises/sum-range", kTeacher);
    CHECK(admin.body.contains("reference_solution"));
  }

  TEST_CASE("a clean submission after 120 s without feedback scores 90") {
    Harness h;
    h.call("GET", "/api/exercises/sum-range", kAlice);
    h.now += 120;
    Reply r = h.call("POST", "/api/exercises/sum-range/submissions", kAlice, json{{"solution", solution("sum-range")}});
    REQUIRE(r.status == 200);
    CHECK(r.body["completed"] == true);
    CHECK(r.body["learning_score"] == 90);
    CHECK(r.body["elapsed_seconds"] == 120);
    CHECK(r.body["violations"].empty());
    CHECK(r.body["runtime"]["stdout"] == "55\n");
    CHECK(r.body["output_check"]["equal"] == true);
    CHECK(r.body["id"] == "sub-1");

    Reply again =
        h.call("POST", "/api/exercises/sum-range/submissions", kAlice, json{{"solution", solution("sum-range")}});
    CHECK(again.status == 409);
    CHECK(again.body["error"]["code"] == "SessionCompleted");

    CHECK(h.call("DELETE", "/api/admin/sessions/alice/sum-range", kTeacher).status == 204);
    Reply fresh =
        h.call("POST", "/api/exercises/sum-range/submissions", kAlice, json{{"solution", solution("sum-range")}});
    CHECK(fresh.status == 200);
    CHECK(fresh.body["learning_score"] == 100);
    CHECK(h.call("DELETE", "/api/admin/sessions/alice/sum-range", kAlice).status == 403);
  }

  TEST_CASE("an ill-typed submission returns violations and counts its feedback") {
    Harness h;
    h.call("GET", "/api/exercises/sum-range", kAlice);
    h.now += 60;
    Reply r = h.call("POST", "/api/exercises/sum-range/submissions", kAlice, json{{"solution", mistyped_sum_range()}});
    REQUIRE(r.status == 200);
    CHECK(r.body["completed"] == false);
    CHECK(r.body["learning_score"].is_null());
    REQUIRE(r.body["violations"].size() == 1);
    CHECK(r.body["violations"][0]["category"] == "DataTypes");
    CHECK(r.body["category_summary"]["DataTypes"] == 1);
    CHECK(r.body["runtime"].is_null());
    auto shown = static_cast<std::int64_t>(r.body["feedback"].size());
    CHECK(shown >= 1);
    CHECK(r.body["session"]["feedback_shown_count"] == shown);

    h.now += 240;
    Reply fixed = h.call("POST", "/api/exercises/sum-range/submissions", kAlice, json{{"solution", solution("sum-range")}});
    REQUIRE(fixed.status == 200);
    CHECK(fixed.body["completed"] == true);
    CHECK(fixed.body["learning_score"] == perf::learning_score(300, shown, codec::ScoringLimits{600, 10}));
  }

  TEST_CASE("submission errors") {
    Harness h;
    CHECK(h.call("POST", "/api/exercises/missing/submissions", kAlice, json{{"solution", solution("hello")}}).status ==
          404);
    Reply syntax = h.call("POST", "/api/exercises/hello/submissions", kAlice, json{{"solution", "{\"blocks\": ["}});
    CHECK(syntax.status == 422);
    CHECK(syntax.body["error"].contains("code"));
    CHECK(h.call("POST", "/api/exercises/hello/submissions", kAlice, json{{"stdin", ""}}).status == 422);
    CHECK(h.call("POST", "/api/exercises/hello/submissions", kAlice, json("not json")).status == 422);
    // A loop is not among hello's allowed layers.
    Reply layered = h.call("POST", "/api/exercises/hello/submissions", kAlice, json{{"solution", solution("sum-range")}});
    CHECK(layered.status == 422);
    CHECK(layered.body["error"]["code"] == "InvalidProgram");
    CHECK_FALSE(layered.body["error"]["defects"].empty());
  }

  TEST_CASE("quiz assembly, grading and the student model") {
    Harness h;
    Reply quiz = h.call("POST", "/api/lessons/T1-07/quizzes", kAlice);
    REQUIRE(quiz.status == 201);
    REQUIRE(quiz.body["questions"].size() == 10);
    for (const json& q : quiz.body["questions"]) CHECK_FALSE(q.contains("correct_index"));
    std::string id = quiz.body["id"];

    std::map<std::string, int> key = bank10_answers();
    json answers = json::object();
    int wrong = 0;
    for (const json& qid : quiz.body["question_ids"]) {
      int correct = key.at(qid.get<std::string>());
      answers[qid.get<std::string>()] = wrong < 3 ? (correct + 1) % 5 : correct;
      ++wrong;
    }
    Reply graded = h.call("POST", "/api/quizzes/" + id + "/answers", kAlice, json{{"answers", answers}});
    REQUIRE(graded.status == 200);
    CHECK(graded.body["score"] == 70);
    CHECK(graded.body["correct_count"] == 7);
    CHECK(h.call("POST", "/api/quizzes/" + id + "/answers", kAlice, json{{"answers", answers}}).status == 409);
    CHECK(h.call("GET", "/api/quizzes/" + id, kAlice).body["graded"] == true);
    CHECK(h.call("GET", "/api/quizzes/" + id, kBob).status == 404);

    Reply model = h.call("GET", "/api/students/alice/model", kAlice);
    REQUIRE(model.status == 200);
    CHECK(model.body["averages"]["avg_quiz_score"] == doctest::Approx(70));
    REQUIRE(model.body["quiz_history"].size() == 1);
    CHECK(model.body["quiz_history"][0]["quiz_id"] == id);

    Reply second = h.call("POST", "/api/lessons/T1-07/quizzes", kAlice);
    REQUIRE(second.status == 201);
    std::string second_id = second.body["id"];
    Reply typed = h.call("POST", "/api/quizzes/" + second_id + "/answers", kAlice,
                         json{{"answers", {{second.body["question_ids"][0].get<std::string>(), "b"}}}});
    CHECK(typed.status == 422);
    CHECK(typed.body["error"]["code"] == "MalformedAnswers");
    CHECK(h.call("POST", "/api/quizzes/" + second_id + "/answers", kAlice, json{{"answers", json::array()}}).status ==
          422);
    Reply stranger =
        h.call("POST", "/api/quizzes/" + second_id + "/answers", kAlice, json{{"answers", {{"zz-unknown", 0}}}});
    CHECK(stranger.status == 422);
  }

  TEST_CASE("quiz use updates bank usage") {
    Harness h;
    Reply quiz = h.call("POST", "/api/lessons/T1-07/quizzes", kAlice);
    REQUIRE(quiz.status == 201);
    Reply questions = h.call("GET", "/api/admin/questions", kTeacher, nullptr, {{"lesson_id", "T1-07"}});
    REQUIRE(questions.status == 200);
    std::set<std::string> used(quiz.body["question_ids"].begin(), quiz.body["question_ids"].end());
    for (const json& q : questions.body) {
      bool in_quiz = used.count(q["id"].get<std::string>()) == 1;
      CHECK(in_quiz == (q["last_used_at"] == h.now));
    }
  }

  TEST_CASE("grading uses the snapshot taken at assembly") {
    Harness h;
    Reply quiz = h.call("POST", "/api/lessons/T1-07/quizzes", kAlice);
    REQUIRE(quiz.status == 201);
    std::map<std::string, int> key = bank10_answers();
    for (const auto& [qid, correct] : key) {
      json doc = h.call("GET", "/api/admin/questions/" + qid, kTeacher).body;
      doc["correct_index"] = (correct + 1) % 5;
      REQUIRE(h.call("PUT", "/api/admin/questions/" + qid, kTeacher, doc).status == 200);
    }
    json answers = json::object();
    for (const json& qid : quiz.body["question_ids"]) answers[qid.get<std::string>()] = key.at(qid.get<std::string>());
    Reply graded =
        h.call("POST", "/api/quizzes/" + quiz.body["id"].get<std::string>() + "/answers", kAlice, json{{"answers", answers}});
    REQUIRE(graded.status == 200);
    CHECK(graded.body["score"] == 100);
  }

  TEST_CASE("quiz and exam errors") {
    Harness h;
    Reply empty = h.call("POST", "/api/lessons/T2-01/quizzes", kAlice);
    CHECK(empty.status == 404);
    CHECK(empty.body["error"]["code"] == "EmptyBankForLesson");
    CHECK(h.call("POST", "/api/lessons/T9-99/quizzes", kAlice).status == 404);
    Reply exam = h.call("POST", "/api/exams", kTeacher, json{{"lesson_ids", {"T1-07"}}});
    CHECK(exam.status == 422);
    CHECK(exam.body["error"]["code"] == "InsufficientQuestions");
    CHECK(exam.body["error"].contains("needed"));
    CHECK(exam.body["error"].contains("available"));
    CHECK(h.call("POST", "/api/exams", kTeacher, json::object()).status == 422);
  }

  TEST_CASE("a term exam from the starter banks") {
    Harness h({testing::data_dir() / "banks"});
    Reply exam = h.call("POST", "/api/exams", kAlice, json{{"term", 1}});
    REQUIRE(exam.status == 201);
    CHECK(exam.body["lesson_ids"].size() == 14);
    CHECK_FALSE(exam.body["questions"].empty());
    std::set<std::string> ids;
    for (const json& q : exam.body["questions"]) {
      CHECK_FALSE(q.contains("correct_index"));
      CHECK(q["lesson_id"].get<std::string>().rfind("T1-", 0) == 0);
      ids.insert(q["id"].get<std::string>());
    }
    CHECK(ids.size() == exam.body["questions"].size());
  }

  TEST_CASE("question authoring") {
    Harness h;
    json q = {{"id", "new-1"},
              {"lesson_id", "T1-07"},
              {"stem", "Which?"},
              {"choices", {"a", "b", "c", "d"}},
              {"correct_index", 0},
              {"difficulty", 2},
              {"choice_priority", 50},
              {"answering_time_seconds", 60}};
    CHECK(h.call("POST", "/api/admin/questions", kTeacher, q).status == 422);
    q["choices"].push_back("e");
    CHECK(h.call("POST", "/api/admin/questions", kTeacher, q).status == 201);
    CHECK(h.call("POST", "/api/admin/questions", kTeacher, q).status == 409);
    CHECK(h.call("GET", "/api/admin/questions/new-1", kTeacher).body["choices"].size() == 5);
    CHECK(h.call("DELETE", "/api/admin/questions/new-1", kTeacher).status == 204);
    CHECK(h.call("GET", "/api/admin/questions/new-1", kTeacher).status == 404);
  }

  TEST_CASE("exercise authoring") {
    Harness h;
    json doc = json::parse(testing::read_file(testing::fixture_dir() / "cli" / "open.exercise.json"));
    CHECK(h.call("POST", "/api/admin/exercises", kTeacher, doc).status == 201);
    CHECK(h.call("POST", "/api/admin/exercises", kTeacher, doc).status == 409);
    CHECK(h.call("GET", "/api/exercises/open", kAlice).status == 200);
    doc["problem_tags"] = {"not-a-tag"};
    CHECK(h.call("PUT", "/api/admin/exercises/open", kTeacher, doc).status == 422);
    CHECK(h.call("DELETE", "/api/admin/exercises/open", kTeacher).status == 204);
    CHECK(h.call("GET", "/api/exercises/open", kAlice).status == 404);
  }

  TEST_CASE("rule uploads are validated against the whole knowledge base") {
    Harness h;
    json syntax = json::parse(testing::read_file(testing::data_dir() / "kb" / "syntax.rules.json"));
    json dup = {{"version", "x"}, {"rules", {syntax["rules"][0]}}};
    Reply rejected = h.call("POST", "/api/admin/rules", kTeacher, dup, {{"name", "dup"}});
    CHECK(rejected.status == 422);
    CHECK(rejected.body["error"]["code"] == "DuplicateRuleId");
    CHECK(rejected.body["error"]["rule_id"] == syntax["rules"][0]["id"]);

    json fresh = syntax["rules"][0];
    fresh["id"] = "SX-extra-copy";
    Reply added = h.call("POST", "/api/admin/rules", kTeacher, json{{"version", "x"}, {"rules", {fresh}}},
                         {{"name", "extra"}});
    REQUIRE(added.status == 201);
    CHECK(added.body["kb_stats"]["total"] == 59);
    CHECK(h.call("GET", "/api/admin/reports/kb_stats", kTeacher).body["total"] == 59);
    CHECK(h.call("DELETE", "/api/admin/rules/extra", kTeacher).status == 204);
    CHECK(h.call("GET", "/api/admin/reports/kb_stats", kTeacher).body["total"] == 58);
  }

  TEST_CASE("activities, grades and the cohort report") {
    Harness h;
    CHECK(h.call("POST", "/api/admin/activities", kTeacher, json{{"student_id", "s1"}, {"kind", "homework"}, {"points", 99}})
              .status == 422);
    CHECK(h.call("POST", "/api/admin/activities", kTeacher, json{{"student_id", "s1"}, {"kind", "gym"}, {"points", 1}})
              .status == 422);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> score(20, 100);
    for (int i = 0; i < 12; ++i) {
      std::string student = "s" + std::to_string(i);
      std::string group = i % 2 == 0 ? "control" : "experimental";
      REQUIRE(h.call("POST", "/api/admin/activities", kTeacher,
                     json{{"student_id", student}, {"kind", "homework"}, {"points", i % 3}})
                  .status == 201);
      Reply g = h.call("POST", "/api/admin/grades", kTeacher,
                       json{{"student_id", student}, {"group", group}, {"visa", score(rng)}, {"final_exam", score(rng)}});
      REQUIRE(g.status == 201);
    }
    Reply grades = h.call("GET", "/api/admin/grades", kTeacher);
    REQUIRE(grades.body.size() == 12);
    std::vector<double> control, experimental;
    for (const json& g : grades.body) {
      (g["group"] == "control" ? control : experimental).push_back(g["term_grade"].get<double>());
    }
    grading::CohortReport oracle = grading::cohort_report("control", control, "experimental", experimental);

    Reply cohort = h.call("GET", "/api/admin/reports/cohort", kTeacher);
    REQUIRE(cohort.status == 200);
    CHECK(cohort.body["first"]["name"] == "control");
    CHECK(cohort.body["first"]["n"] == 6);
    CHECK(cohort.body["first"]["mean"] == doctest::Approx(oracle.first.mean));
    CHECK(cohort.body["tests"][0]["t"] == doctest::Approx(oracle.equal_variances.t));
    CHECK(cohort.body["tests"][1]["df"] == doctest::Approx(oracle.welch.df));
    CHECK(cohort.body["first"]["histogram"].size() == 10);
    CHECK(h.call("GET", "/api/admin/reports/cohort", kTeacher, nullptr, {{"first", "control"}, {"second", "x"}}).status ==
          404);
  }

  TEST_CASE("the event log mirrors completions and graded quizzes") {
    Harness h;
    std::size_t completions = 0, graded = 0;
    std::map<std::string, int> key = bank10_answers();
    for (const char* token : {kAlice, kBob}) {
      for (const char* ex : {"hello", "sum-range", "max-of-two"}) {
        Reply wrong = h.call("POST", std::string("/api/exercises/") + ex + "/submissions", token,
                             json{{"solution", mistyped_sum_range()}});
        completions += wrong.status == 200 && wrong.body["completed"] == true ? 1 : 0;
        h.now += 30;
        Reply right = h.call("POST", std::string("/api/exercises/") + ex + "/submissions", token,
                             json{{"solution", solution(ex)}});
        completions += right.status == 200 && right.body["completed"] == true ? 1 : 0;
      }
      for (int i = 0; i < 2; ++i) {
        Reply quiz = h.call("POST", "/api/lessons/T1-07/quizzes", token);
        REQUIRE(quiz.status == 201);
        json answers = json::object();
        for (const json& qid : quiz.body["question_ids"]) answers[qid.get<std::string>()] = 0;
        Reply r = h.call("POST", "/api/quizzes/" + quiz.body["id"].get<std::string>() + "/answers", token,
                         json{{"answers", answers}});
        graded += r.status == 200 ? 1 : 0;
      }
    }
    CHECK(completions == 6);
    CHECK(graded == 4);
    CHECK(count_events<perf::ExerciseCompleted>(*h.service) == completions);
    CHECK(count_events<perf::QuizScored>(*h.service) == graded);
  }

  TEST_CASE("identical request sequences give identical responses") {
    auto run = [] {
      Harness h;
      std::vector<std::string> bodies;
      bodies.push_back(h.call("GET", "/api/exercises/max-of-two", kAlice).body.dump());
      h.now += 45;
      bodies.push_back(
          h.call("POST", "/api/exercises/max-of-two/submissions", kAlice, json{{"solution", mistyped_sum_range()}})
              .body.dump());
      bodies.push_back(h.call("POST", "/api/exercises/max-of-two/submissions", kAlice,
                              json{{"solution", solution("max-of-two")}, {"stdin", "3 8"}})
                           .body.dump());
      for (int i = 0; i < 3; ++i) {
        h.now += 10;
        bodies.push_back(h.call("POST", "/api/lessons/T1-07/quizzes", kAlice).body.dump());
      }
      bodies.push_back(h.call("GET", "/api/students/alice/model", kAlice).body.dump());
      return bodies;
    };
    CHECK(run() == run());
  }

  TEST_CASE("state survives a restart") {
    Harness h;
    h.call("GET", "/api/exercises/hello", kAlice);
    h.now += 20;
    REQUIRE(h.call("POST", "/api/exercises/hello/submissions", kAlice, json{{"solution", solution("hello")}})
                .body["completed"] == true);
    Reply quiz = h.call("POST", "/api/lessons/T1-07/quizzes", kAlice);
    std::string quiz_id = quiz.body["id"];
    json answers = json::object();
    for (const json& qid : quiz.body["question_ids"]) answers[qid.get<std::string>()] = 1;
    REQUIRE(h.call("POST", "/api/quizzes/" + quiz_id + "/answers", kAlice, json{{"answers", answers}}).status == 200);
    json syntax = json::parse(testing::read_file(testing::data_dir() / "kb" / "syntax.rules.json"));
    json fresh = syntax["rules"][0];
    fresh["id"] = "SX-extra-copy";
    REQUIRE(h.call("POST", "/api/admin/rules", kTeacher, json{{"version", "x"}, {"rules", {fresh}}}, {{"name", "extra"}})
                .status == 201);
    json model_before = h.call("GET", "/api/students/alice/model", kAlice).body;
    std::size_t events_before = h.service->events().size();

    h.restart();
    CHECK(h.service->events().size() == events_before);
    CHECK(h.call("GET", "/api/students/alice/model", kAlice).body == model_before);
    CHECK(h.call("POST", "/api/exercises/hello/submissions", kAlice, json{{"solution", solution("hello")}}).status == 409);
    CHECK(h.call("GET", "/api/quizzes/" + quiz_id, kAlice).body["graded"] == true);
    CHECK(h.call("POST", "/api/quizzes/" + quiz_id + "/answers", kAlice, json{{"answers", answers}}).status == 409);
    CHECK(h.call("GET", "/api/admin/reports/kb_stats", kTeacher).body["total"] == 59);
    Reply next = h.call("POST", "/api/exercises/sum-range/submissions", kAlice, json{{"solution", solution("sum-range")}});
    CHECK(next.body["id"] == "sub-2");
    CHECK(h.call("POST", "/api/lessons/T1-07/quizzes", kAlice).body["id"] == "quiz-2");
  }

  TEST_CASE("config documents") {
    ServiceConfig c = parse_config(R"({"port": 9000, "data_dir": "store", "kb_paths": ["kb"],
                                       "auth": {"teacher_token": "t", "student_tokens": {"s": "alice"}}})",
                                   "/srv/tutor");
    CHECK(c.port == 9000);
    CHECK(c.data_dir == fs::path("/srv/tutor/store"));
    CHECK(c.kb_paths == std::vector<fs::path>{"/srv/tutor/kb"});
    CHECK(c.student_tokens.at("s") == "alice");
    CHECK_THROWS_AS(parse_config(R"({"prot": 9000})", "/"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"port": "x"})", "/"), ConfigError);
    CHECK_THROWS_AS(parse_config("[", "/"), ConfigError);

    ServiceConfig shipped = load_config(testing::data_dir() / "service.example.json");
    CHECK(shipped.kb_paths == std::vector<fs::path>{testing::data_dir() / "kb"});
    CHECK(shipped.grading.activity_caps == grading::ActivityPoints{25, 10, 5});
    CHECK(shipped.student_tokens.size() == 1);
  }

  TEST_CASE("HTTP round trip") {
    Harness h;
    HttpServer server(*h.service);
    int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread worker([&] { server.listen(); });

    httplib::Client client("127.0.0.1", port);
    client.set_bearer_token_auth(kAlice);
    auto got = client.Get("/api/exercises/hello");
    auto posted = client.Post("/api/exercises/hello/submissions", json{{"solution", solution("hello")}}.dump(),
                              "application/json");
    httplib::Client anonymous("127.0.0.1", port);
    auto denied = anonymous.Get("/api/exercises/hello");
    server.stop();
    worker.join();

    REQUIRE(got);
    CHECK(got->status == 200);
    CHECK(json::parse(got->body)["exercise"]["id"] == "hello");
    REQUIRE(posted);
    CHECK(posted->status == 200);
    CHECK(json::parse(posted->body)["completed"] == true);
    REQUIRE(denied);
    CHECK(denied->status == 401);
  }
}
