// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "../support/naive_oracle.hpp"
#include "../support/program_gen.hpp"
#include "../support/support.hpp"
#include "tutor/codec/solution_codec.hpp"
#include "tutor/grading/grading.hpp"
#include "tutor/interp/interpreter.hpp"
#include "tutor/itest/itest.hpp"
#include "tutor/perf/performance_store.hpp"
#include "tutor/rules/engine.hpp"

using namespace tutor;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kTTol = 0.02;
constexpr double kSeTol = 0.005;
constexpr double kMeanDiffTol = 0.02;
constexpr double kCiTol = 0.02;
constexpr double kWelchDfTol = 0.2;
constexpr double kPMax = 0.001;
constexpr double kFigureSeconds = 1.0;
constexpr double kLevelTol = 1e-9;
constexpr double kGradeTol = 1e-9;
constexpr int kOraclePrograms = 500;
constexpr double kOracleSeconds = 60.0;
constexpr int kFuzzInputs = 10000;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!passed) detail << "; ";
      detail << what;
      passed = false;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int digits = 5) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

const rules::KnowledgeBase& starter_kb() {
  static const rules::KnowledgeBase kb = rules::load_knowledge_base_files({testing::data_dir() / "kb"});
  return kb;
}

codec::Exercise exercise_with(std::set<std::string> tags) {
  codec::Exercise e;
  e.problem_tags = std::move(tags);
  return e;
}

// ---- criteria ---------------------------------------------------------------

Outcome figure6() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  grading::SampleStats control{60, 55.69, 14.20, 55.69};
  grading::SampleStats experimental{60, 79.50, 15.35, 79.50};
  auto eq = grading::t_test_independent(control, experimental, grading::Variance::EqualVariances);
  auto welch = grading::t_test_independent(control, experimental, grading::Variance::WelchUnequal);
  double elapsed = seconds_since(start);

  o.require(std::abs(eq.t - (-8.823)) <= kTTol, "t=" + fmt(eq.t, 3));
  o.require(eq.df == 118.0, "df=" + fmt(eq.df, 3));
  o.require(std::abs(eq.std_error_difference - 2.70009) <= kSeTol, "SE=" + fmt(eq.std_error_difference));
  o.require(std::abs(eq.mean_difference - (-23.82167)) <= kMeanDiffTol, "mean diff=" + fmt(eq.mean_difference));
  o.require(std::abs(eq.ci95.first - (-29.16858)) <= kCiTol, "CI lower=" + fmt(eq.ci95.first));
  o.require(std::abs(eq.ci95.second - (-18.47475)) <= kCiTol, "CI upper=" + fmt(eq.ci95.second));
  o.require(eq.p_two_tailed < kPMax, "p=" + std::to_string(eq.p_two_tailed));
  o.require(std::abs(welch.df - 117.294) <= kWelchDfTol, "Welch df=" + fmt(welch.df, 3));
  o.require(elapsed < kFigureSeconds, "took " + fmt(elapsed, 3) + " s");
  if (o.passed) {
    o.detail << "t=" << fmt(eq.t, 3) << " df=" << fmt(eq.df, 0) << " SE=" << fmt(eq.std_error_difference)
             << " diff=" << fmt(eq.mean_difference) << " CI=(" << fmt(eq.ci95.first) << ", " << fmt(eq.ci95.second)
             << ") p=" << eq.p_two_tailed << " Welch df=" << fmt(welch.df, 3);
  }
  return o;
}

Outcome learning_level_formula() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> score(0, 100);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    double pv = score(rng), aq = score(rng), ac = score(rng);
    double level = itest::learning_level(perf::StudentAverages{pv, aq, ac});
    worst = std::max(worst, std::abs(level - (0.10 * pv + 0.40 * aq + 0.50 * ac)));
  }
  o.require(worst <= kLevelTol, "max error " + std::to_string(worst));
  if (o.passed) o.detail << "1000 triples, max error " << worst;
  return o;
}

Outcome grading_rules() {
  Outcome o;
  auto a = grading::term_grade(50, 75);
  o.require(std::abs(a.grade - 70) <= kGradeTol && a.passed, "term_grade(50,75)=" + fmt(a.grade, 3));
  auto b = grading::term_grade(0, 74);
  o.require(std::abs(b.grade - 59.2) <= kGradeTol && !b.passed, "term_grade(0,74)=" + fmt(b.grade, 3));
  auto at = grading::term_grade(60, 60);
  o.require(at.grade == 60 && at.passed, "60 does not pass");
  auto below = grading::term_grade(60, 59.99);
  o.require(!below.passed, "59.992 passes");

  auto over_cap = [](grading::ActivityPoints points) {
    try {
      grading::adjusted_final(50, points);
    } catch (const grading::GradingError& e) {
      return e.code() == grading::GradingError::Code::ActivityOverCap;
    }
    return false;
  };
  o.require(grading::adjusted_final(50, {25, 10, 5}) == 90, "caps 25/10/5 not accepted");
  o.require(over_cap({25.01, 0, 0}) && over_cap({0, 10.01, 0}) && over_cap({0, 0, 5.01}), "caps not enforced");

  bool monotone = true;
  for (int v = 0; v <= 100; ++v) {
    for (int f = 0; f <= 100; ++f) {
      auto g = grading::term_grade(v, f);
      if (v > 0 && g.grade < grading::term_grade(v - 1, f).grade) monotone = false;
      if (f > 0 && g.grade < grading::term_grade(v, f - 1).grade) monotone = false;
      if (g.passed != (g.grade >= 60)) monotone = false;
    }
  }
  o.require(monotone, "not monotone on the 101x101 grid");
  if (o.passed) o.detail << "examples, pass boundary, caps and 101x101 monotonicity";
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::vector<json> docs;
  for (const auto& path : testing::files_with_suffix(testing::data_dir() / "kb", ".rules.json")) {
    docs.push_back(json::parse(testing::read_file(path)));
  }
  const std::vector<json> rule_json = testing::rules_of(docs);
  const std::vector<std::string> vocabulary(starter_kb().tag_vocabulary().begin(), starter_kb().tag_vocabulary().end());

  std::mt19937_64 rng(4040);
  auto start = std::chrono::steady_clock::now();
  int mismatches = 0;
  std::size_t violations = 0;
  for (int i = 0; i < kOraclePrograms; ++i) {
    model::Program program = testing::random_program(rng, 8);
    std::set<std::string> tags;
    for (const std::string& t : vocabulary) {
      if (rng() % 2) tags.insert(t);
    }
    std::vector<testing::OracleViolation> engine;
    for (const rules::Violation& v : rules::evaluate(program, exercise_with(tags), starter_kb())) {
      engine.push_back({v.constraint_id, std::string(rules::rule_category_name(v.category)), v.bindings});
    }
    auto oracle = testing::naive_evaluate(rule_json, program, tags);
    if (engine != oracle) ++mismatches;
    violations += oracle.size();
  }
  double elapsed = seconds_since(start);
  o.require(mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(kOraclePrograms) + " programs differ");
  o.require(violations > 0, "no violations at all (vacuous)");
  o.require(elapsed < kOracleSeconds, "took " + fmt(elapsed, 1) + " s");
  if (o.passed) {
    o.detail << kOraclePrograms << " programs, " << violations << " violations matched, " << fmt(elapsed, 2) << " s";
  }
  return o;
}

Outcome category_coverage() {
  Outcome o;
  const rules::KnowledgeBase& kb = starter_kb();
  o.require(kb.size() >= 40, "only " + std::to_string(kb.size()) + " rules");
  for (const auto& [category, count] : rules::kb_stats(kb)) {
    o.require(count > 0, std::string(rules::rule_category_name(category)) + " is empty");
  }

  std::map<std::string, int> per_category;
  int fixtures = 0;
  for (const auto& path : testing::files_with_suffix(testing::fixture_dir() / "golden", ".expected.json")) {
    json expected = json::parse(testing::read_file(path));
    std::string stem = path.filename().string();
    stem.resize(stem.size() - std::string(".expected.json").size());
    auto program = codec::parse_solution(testing::read_file(path.parent_path() / (stem + ".sol.json")));
    std::vector<std::pair<std::string, std::vector<std::string>>> actual, wanted;
    for (const auto& v : rules::evaluate(program, exercise_with(expected["tags"].get<std::set<std::string>>()), kb)) {
      actual.emplace_back(v.constraint_id, v.block_ids());
    }
    for (const json& v : expected["violations"]) wanted.emplace_back(v["id"], v["blocks"]);
    o.require(actual == wanted, stem + " differs");
    ++fixtures;
    per_category[stem.substr(0, 2)]++;
  }
  for (const char* prefix : {"sm", "mr", "pt", "mm", "fl", "fn", "dt", "sx"}) {
    o.require(per_category[prefix] >= 2, std::string("fewer than 2 golden fixtures for ") + prefix);
  }
  if (o.passed) o.detail << kb.size() << " rules in 8 categories, " << fixtures << " golden fixtures exact";
  return o;
}

itest::QuestionBank simulation_bank() {
  std::mt19937_64 rng(77);
  std::vector<itest::QuestionRecord> questions;
  auto add = [&](const std::string& id, const std::string& lesson, int priority) {
    itest::QuestionRecord q;
    q.id = id;
    q.lesson_id = lesson;
    q.stem = "Stem " + id;
    q.choices = {"a", "b", "c", "d", "e"};
    q.correct_index = static_cast<int>(rng() % 5);
    q.difficulty = 1 + static_cast<int>(rng() % 5);
    q.choice_priority = priority;
    q.answering_time_seconds = 60;
    questions.push_back(q);
  };
  for (int i = 0; i < 24; ++i) {
    int priority = i == 0 ? 3 : i == 1 ? 99 : i == 2 ? 100 : static_cast<int>(rng() % 101);
    add("L1-" + std::to_string(100 + i), "T1-05", priority);
  }
  for (int i = 0; i < 5; ++i) add("L2-" + std::to_string(100 + i), "T1-06", 50);
  return itest::QuestionBank(questions);
}

Outcome chooser_properties() {
  Outcome o;
  itest::ItestConfig config;
  itest::StudentModel student;
  student.student_id = "s";
  student.averages = {40, 55, 70};

  auto run_rounds = [&](itest::QuestionBank bank, bool check_dynamics) {
    std::vector<std::string> ids;
    for (int round = 1; round <= 3; ++round) {
      itest::Quiz quiz = itest::assemble_quiz(bank, student, "T1-05", config, "r" + std::to_string(round), round);
      std::map<std::string, int> before;
      for (const auto& [id, q] : bank.questions()) before[id] = q.choice_priority;
      itest::update_priorities(bank, quiz, config);
      std::set<std::string> used(quiz.question_ids.begin(), quiz.question_ids.end());
      for (const auto& [id, q] : bank.questions()) {
        int expected = used.count(id) != 0       ? std::max(0, before[id] - 10)
                       : q.lesson_id == "T1-05" ? std::min(100, before[id] + 1)
                                                : before[id];
        if (check_dynamics && q.choice_priority != expected) {
          o.require(false, "round " + std::to_string(round) + ": " + id + " priority " +
                               std::to_string(q.choice_priority) + ", expected " + std::to_string(expected));
        }
        if (check_dynamics && used.count(id) != 0 && q.last_used_at != round) o.require(false, id + " last_used_at");
      }
      ids.insert(ids.end(), quiz.question_ids.begin(), quiz.question_ids.end());
    }
    return ids;
  };

  const itest::QuestionBank initial = simulation_bank();
  std::vector<std::string> reference = run_rounds(initial, true);
  int differing = 0;
  for (int trial = 0; trial < 100; ++trial) differing += run_rounds(initial, false) != reference ? 1 : 0;
  o.require(differing == 0, std::to_string(differing) + " of 100 trials differ");

  const std::vector<std::pair<double, int>> bands = {{0, 1}, {19.99, 1}, {20, 2}, {79.99, 4}, {80, 5}, {100, 5}};
  for (auto [level, band] : bands) {
    o.require(itest::difficulty_band(level) == band, "band(" + fmt(level, 2) + ")");
  }
  if (o.passed) o.detail << "100 identical trials, 3-round priority dynamics, 6 band boundaries";
  return o;
}

Outcome learning_score_properties() {
  Outcome o;
  bool boundaries = true, monotone = true;
  for (auto [T, F] : std::vector<std::pair<std::int64_t, std::int64_t>>{{600, 10}, {90, 7}, {1, 1}, {3600, 3}}) {
    codec::ScoringLimits limits{T, F};
    if (perf::learning_score(0, 0, limits) != 100 || perf::learning_score(T, F, limits) != 0) boundaries = false;
    for (std::int64_t t = 0; t <= 2 * T; t += std::max<std::int64_t>(1, T / 50)) {
      for (std::int64_t f = 0; f <= 2 * F; ++f) {
        int s = perf::learning_score(t, f, limits);
        if (s < 0 || s > 100) monotone = false;
        if (s < perf::learning_score(t + 1, f, limits) || s < perf::learning_score(t, f + 1, limits)) monotone = false;
      }
    }
  }
  o.require(boundaries, "boundary cases");
  o.require(monotone, "not monotone non-increasing on the grid");
  if (o.passed) o.detail << "(0,0)->100, (T,F)->0, monotone on 4 limit grids";
  return o;
}

Outcome interpreter_behaviour() {
  Outcome o;
  fs::path sandbox = fs::temp_directory_path() / ("tutor_acceptance_canary_" + std::to_string(std::random_device{}()));
  fs::create_directories(sandbox);
  {
    std::ofstream canary(sandbox / "canary.txt");
    canary << "untouched";
  }
  fs::path previous = fs::current_path();
  fs::current_path(sandbox);

  auto programs = testing::files_with_suffix(testing::fixture_dir() / "programs", ".sol.json");
  o.require(programs.size() == 10, std::to_string(programs.size()) + " fixture programs");
  int matched = 0;
  for (const auto& path : programs) {
    std::string stem = path.string().substr(0, path.string().size() - std::string(".sol.json").size());
    interp::RunLimits limits;
    if (fs::exists(stem + ".stdin")) limits.stdin_script = interp::split_stdin(testing::read_file(stem + ".stdin"));
    auto outcome = interp::run(codec::parse_solution(testing::read_file(path)), limits);
    bool ok = outcome.status == interp::RunStatus::Completed && outcome.stdout_text == testing::read_file(stem + ".stdout");
    if (ok) ++matched;
    o.require(ok, path.filename().string() + " output differs");
  }

  std::string absolute = (sandbox / "canary.txt").string();
  auto writer = interp::run(codec::parse_solution(
      R"({"blocks": [{"id": "main", "kind": "function_def", "attrs": {"name": "main", "return_type": "int"}, "children": [
          {"id": "d", "kind": "declaration", "attrs": {"name": "f", "type": "FILE*"}},
          {"id": "o1", "kind": "file_op", "attrs": {"op": "open", "handle": "f", "path": "canary.txt", "mode": "w"}},
          {"id": "w1", "kind": "file_op", "attrs": {"op": "write", "handle": "f", "format": "overwritten"}},
          {"id": "c1", "kind": "file_op", "attrs": {"op": "close", "handle": "f"}},
          {"id": "o2", "kind": "file_op", "attrs": {"op": "open", "handle": "f", "path": ")" +
      absolute + R"(", "mode": "a"}},
          {"id": "w2", "kind": "file_op", "attrs": {"op": "write", "handle": "f", "format": "more"}},
          {"id": "c2", "kind": "file_op", "attrs": {"op": "close", "handle": "f"}},
          {"id": "r", "kind": "return", "attrs": {"value": "0"}}]}]})"));
  fs::current_path(previous);
  o.require(writer.status == interp::RunStatus::Completed, "file writer did not complete");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(sandbox)) ++entries;
  o.require(entries == 1 && testing::read_file(sandbox / "canary.txt") == "untouched", "real file system touched");
  fs::remove_all(sandbox);

  interp::RunLimits tight;
  tight.max_steps = 5000;
  auto loop = interp::run(codec::parse_solution(
                              R"({"blocks": [{"id": "main", "kind": "function_def", "attrs": {"name": "main", "return_type": "int"},
                                  "children": [{"id": "w", "kind": "while_loop", "attrs": {"cond": "1"}}]}]})"),
                          tight);
  o.require(loop.status == interp::RunStatus::StepLimitExceeded && loop.steps_used == 5000,
            "infinite loop stopped after " + std::to_string(loop.steps_used) + " steps");
  if (o.passed) o.detail << matched << " fixtures byte-exact, loop halted at 5000 steps, canary intact";
  return o;
}

Outcome codec_behaviour() {
  Outcome o;
  auto files = testing::files_with_suffix(testing::fixture_dir(), ".sol.json");
  auto shipped = testing::files_with_suffix(testing::data_dir(), ".sol.json");
  files.insert(files.end(), shipped.begin(), shipped.end());
  for (const auto& path : files) {
    model::Program p = codec::parse_solution(testing::read_file(path));
    std::string once = codec::serialize_solution(p);
    model::Program again = codec::parse_solution(once);
    o.require(again == p && codec::serialize_solution(again) == once, path.filename().string() + " does not round-trip");
  }

  std::mt19937_64 rng(10000);
  std::uniform_int_distribution<int> byte(0, 255);
  const std::string seed = testing::read_file(testing::fixture_dir() / "programs" / "04_array_sort.sol.json");
  int escaped = 0, accepted = 0;
  for (int i = 0; i < kFuzzInputs; ++i) {
    std::string doc;
    if (i % 2 == 0) {
      doc.resize(std::uniform_int_distribution<std::size_t>(0, 256)(rng));
      for (char& c : doc) c = static_cast<char>(byte(rng));
    } else {
      doc = seed;
      int edits = 1 + static_cast<int>(rng() % 8);
      for (int k = 0; k < edits; ++k) {
        doc[std::uniform_int_distribution<std::size_t>(0, doc.size() - 1)(rng)] = static_cast<char>(byte(rng));
      }
    }
    try {
      codec::parse_solution(doc);
      ++accepted;
    } catch (const codec::CodecError&) {
    } catch (...) {
      ++escaped;
    }
  }
  o.require(escaped == 0, std::to_string(escaped) + " inputs raised something other than CodecError");
  if (o.passed) {
    o.detail << files.size() << " fixtures round-trip, " << kFuzzInputs << " fuzz inputs (" << accepted
             << " accepted) without a crash";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"figure6-reproduction", figure6},
      {"learning-level-formula", learning_level_formula},
      {"grading", grading_rules},
      {"constraint-oracle-equivalence", oracle_equivalence},
      {"category-coverage", category_coverage},
      {"chooser-properties", chooser_properties},
      {"learning-score", learning_score_properties},
      {"interpreter", interpreter_behaviour},
      {"codec", codec_behaviour},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome.passed = false;
      outcome.detail << "threw: " << e.what();
    }
    std::cout << (outcome.passed ? "PASS " : "FAIL ") << name << ": " << outcome.detail.str() << std::endl;
    failed += outcome.passed ? 0 : 1;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed;
}
