// Authoring and operations tool: batch evaluation, KB linting, quiz
// simulation, cohort reports and the HTTP service.
//
// Exit status: 0 success (no violations), 1 findings, 2 input errors.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "tutor/codec/lessons.hpp"
#include "tutor/service/pipeline.hpp"
#include "tutor/service/service.hpp"

namespace {

using namespace tutor;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kInputError = 2;

/// Input problems that end the run with exit status 2.
struct InputError {
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError{"cannot read " + path};
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

rules::KnowledgeBase load_kb(const std::vector<std::string>& paths) {
  std::vector<std::filesystem::path> files(paths.begin(), paths.end());
  for (const auto& f : files) {
    if (!std::filesystem::exists(f)) throw InputError{"no such knowledge base path: " + f.string()};
  }
  try {
    return rules::load_knowledge_base_files(files);
  } catch (const rules::KbError& e) {
    throw InputError{std::string(e.code_name()) + ": " + e.what()};
  }
}

bool structured(const std::string& format) { return format == "structured"; }

struct Common {
  std::vector<std::string> kb = {"data/kb"};
  std::string format = "text";
  std::optional<std::int64_t> seed;  // reserved
};

// ---- eval ------------------------------------------------------------------

struct EvalOptions {
  std::string exercise_path;
  std::string solution_path;
  std::optional<std::string> stdin_path;
  std::optional<std::string> feedback;
  double level = 50;
};

int cmd_eval(const Common& common, const EvalOptions& opt) {
  rules::KnowledgeBase kb = load_kb(common.kb);
  codec::Exercise exercise;
  model::Program program;
  try {
    exercise = codec::parse_exercise(read_file(opt.exercise_path), kb.tag_vocabulary());
  } catch (const codec::CodecError& e) {
    throw InputError{opt.exercise_path + ": " + e.what()};
  }
  try {
    program = codec::parse_solution(read_file(opt.solution_path));
  } catch (const codec::CodecError& e) {
    throw InputError{opt.solution_path + ": " + e.what()};
  }

  feedback::FeedbackKind kind = exercise.feedback_kind.value_or(feedback::FeedbackKind::Elaborated);
  if (opt.feedback) kind = *feedback::feedback_kind_from_name(*opt.feedback);
  interp::RunLimits limits;
  limits.stdin_script = exercise.stdin_script;
  if (opt.stdin_path) limits.stdin_script = interp::split_stdin(read_file(*opt.stdin_path));

  service::Evaluation result;
  try {
    result = service::evaluate_solution(program, exercise, kb, kind, opt.level, limits);
  } catch (const service::InvalidSubmission& e) {
    throw InputError{opt.solution_path + ": invalid program\n" + e.report().to_string()};
  }
  bool findings = !result.violations.empty() || !result.type_errors.empty();

  if (structured(common.format)) {
    json out = service::to_json(result);
    out["exercise_id"] = exercise.id;
    std::cout << out.dump(2) << "\n";
    return findings ? kFindings : kOk;
  }

  std::cout << "exercise " << exercise.id << "\n";
  std::cout << result.violations.size() << (result.violations.size() == 1 ? " violation" : " violations") << "\n";
  std::cout << "categories:";
  for (const auto& [category, count] : feedback::summarize(result.violations)) {
    std::cout << " " << rules::rule_category_name(category) << ":" << count;
  }
  std::cout << "\n";
  for (rules::RuleCategory category : rules::kAllRuleCategories) {
    for (const rules::Violation& v : result.violations) {
      if (v.category != category) continue;
      std::cout << "  [" << rules::rule_category_name(category) << "] " << v.constraint_id;
      std::vector<std::string> blocks = v.block_ids();
      if (!blocks.empty()) {
        std::cout << " at";
        for (const std::string& b : blocks) std::cout << " " << b;
      }
      std::cout << "\n";
    }
  }
  for (const model::TypeDiagnostic& d : result.type_errors) {
    std::cout << "type error at " << d.block_id << " (" << d.field << "): " << d.message << "\n";
  }
  std::cout << "feedback (" << feedback::feedback_kind_name(kind) << "):\n";
  for (const feedback::FeedbackMessage& m : result.feedback) std::cout << "  - " << m.text << "\n";
  if (result.runtime) {
    const interp::RuntimeOutcome& run = *result.runtime;
    std::cout << "run: " << interp::run_status_name(run.status) << " after " << run.steps_used << " steps\n";
    if (run.status == interp::RunStatus::RuntimeError) {
      std::cout << "error at " << run.error_block_id << ": " << run.error_message << "\n";
    }
    std::cout << "--- stdout ---\n" << run.stdout_text;
    if (!run.stdout_text.empty() && run.stdout_text.back() != '\n') std::cout << "\n";
    std::cout << "--------------\n";
  }
  if (result.output_check) {
    if (result.output_check->equal) {
      std::cout << "output matches the expected output\n";
    } else {
      std::cout << "output differs at byte " << result.output_check->first_difference << ": expected \""
                << result.output_check->expected_context << "\", got \"" << result.output_check->actual_context
                << "\"\n";
    }
  }
  std::cout << (result.completed ? "completed" : "not completed") << "\n";
  return findings ? kFindings : kOk;
}

// ---- lint-kb / kb-stats -----------------------------------------------------

int cmd_lint_kb(const Common& common) {
  rules::KnowledgeBase kb = load_kb(common.kb);
  std::vector<std::string> warnings;
  for (const rules::Constraint& c : kb.constraints()) {
    if (c.description.empty()) warnings.push_back(c.id + ": no description");
    if (!c.feedback.correct) warnings.push_back(c.id + ": no 'correct' feedback template");
    if (c.feedback.elaborated.count("standard") == 0) warnings.push_back(c.id + ": no standard elaborated text");
    if (!c.enabled) warnings.push_back(c.id + ": disabled by default");
  }
  for (const auto& [category, count] : rules::kb_stats(kb)) {
    if (count == 0) warnings.push_back(std::string("category ") + std::string(rules::rule_category_name(category)) + " has no rules");
  }
  if (structured(common.format)) {
    std::cout << json{{"version", kb.version()}, {"rules", kb.size()}, {"warnings", warnings}}.dump(2) << "\n";
  } else {
    std::cout << kb.size() << " rules, version " << kb.version() << "\n";
    for (const std::string& w : warnings) std::cout << "warning: " << w << "\n";
    std::cout << warnings.size() << (warnings.size() == 1 ? " warning" : " warnings") << "\n";
  }
  return warnings.empty() ? kOk : kFindings;
}

int cmd_kb_stats(const Common& common) {
  rules::KnowledgeBase kb = load_kb(common.kb);
  if (structured(common.format)) {
    std::cout << service::kb_stats_json(kb).dump(2) << "\n";
    return kOk;
  }
  for (const auto& [category, count] : rules::kb_stats(kb)) {
    std::string name(rules::rule_category_name(category));
    std::cout << name << std::string(name.size() < 20 ? 20 - name.size() : 1, ' ') << count << "\n";
  }
  std::cout << "total" << std::string(15, ' ') << kb.size() << "\n";
  return kOk;
}

// ---- quiz-sim -------------------------------------------------------------

struct QuizSimOptions {
  std::string bank_path;
  std::optional<std::string> model_path;
  std::string lesson;
  int repetitions = 1;
  std::optional<double> level;
};

itest::StudentModel read_student_model(const std::string& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw InputError{path + ": expected a JSON object"};
  itest::StudentModel model;
  model.student_id = doc.value("student_id", "student");
  auto component = [&](const char* key) -> std::optional<double> {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    if (!doc[key].is_number()) throw InputError{path + ": '" + key + "' must be a number"};
    double v = doc[key].get<double>();
    if (v < 0 || v > 100) throw InputError{path + ": '" + key + "' must lie in [0, 100]"};
    return v;
  };
  model.averages.page_view_score = component("page_view_score");
  model.averages.avg_quiz_score = component("avg_quiz_score");
  model.averages.avg_ctutor_score = component("avg_ctutor_score");
  return model;
}

int cmd_quiz_sim(const Common& common, const QuizSimOptions& opt) {
  itest::QuestionBank bank;
  try {
    bank = itest::parse_questions(read_file(opt.bank_path));
  } catch (const itest::ItestError& e) {
    throw InputError{opt.bank_path + ": " + e.what()};
  }
  if (codec::find_lesson(opt.lesson) == nullptr) throw InputError{"unknown lesson '" + opt.lesson + "'"};
  if (bank.of_lesson(opt.lesson).empty()) throw InputError{"the bank has no questions for lesson " + opt.lesson};
  if (opt.repetitions < 1) throw InputError{"-n must be at least 1"};

  itest::StudentModel student;
  if (opt.model_path) student = read_student_model(*opt.model_path);
  if (opt.level) {
    if (*opt.level < 0 || *opt.level > 100) throw InputError{"--level must lie in [0, 100]"};
    student.averages = {*opt.level, *opt.level, *opt.level};
  }
  itest::ItestConfig config;
  double level = itest::learning_level(student.averages, config);

  json rounds = json::array();
  for (int r = 1; r <= opt.repetitions; ++r) {
    itest::Quiz quiz = itest::assemble_quiz(bank, student, opt.lesson, config, "sim-" + std::to_string(r), r);
    itest::update_priorities(bank, quiz, config);
    json priorities = json::object();
    for (const itest::QuestionRecord* q : bank.of_lesson(opt.lesson)) priorities[q->id] = q->choice_priority;
    rounds.push_back({{"round", r}, {"question_ids", quiz.question_ids},
                      {"total_time_seconds", quiz.total_time_seconds}, {"priorities", std::move(priorities)}});
  }

  if (structured(common.format)) {
    std::cout << json{{"lesson_id", opt.lesson}, {"learning_level", level},
                      {"target_difficulty", itest::difficulty_band(level)}, {"rounds", rounds}}
                     .dump(2)
              << "\n";
    return kOk;
  }
  std::cout << "lesson " << opt.lesson << ", learning level " << level << ", target difficulty "
            << itest::difficulty_band(level) << "\n";
  for (const json& round : rounds) {
    std::cout << "round " << round["round"].get<int>() << ":";
    for (const json& id : round["question_ids"]) std::cout << " " << id.get<std::string>();
    std::cout << "\n  priorities:";
    for (const auto& [id, p] : round["priorities"].items()) std::cout << " " << id << "=" << p.get<int>();
    std::cout << "\n";
  }
  return kOk;
}

// ---- report -----------------------------------------------------------------

struct ReportOptions {
  std::string path;
  std::optional<std::string> first;
  std::optional<std::string> second;
};

int cmd_report(const Common& common, const ReportOptions& opt) {
  json doc = json::parse(read_file(opt.path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw InputError{opt.path + ": expected a JSON object"};
  bool raw = doc.contains("groups");
  if (!raw && !doc.contains("summaries")) throw InputError{opt.path + ": expected 'groups' or 'summaries'"};
  const json& groups = raw ? doc["groups"] : doc["summaries"];
  if (!groups.is_object()) throw InputError{opt.path + ": groups must be an object"};

  std::vector<std::string> names;
  for (const auto& [name, _] : groups.items()) names.push_back(name);
  std::string first = opt.first.value_or(names.size() == 2 ? names[0] : "");
  std::string second = opt.second.value_or(names.size() == 2 ? names[1] : "");
  if (first.empty() || second.empty()) throw InputError{"name the groups with --first and --second"};
  for (const std::string& g : {first, second}) {
    if (!groups.contains(g)) throw InputError{"no group '" + g + "' in " + opt.path};
  }

  grading::CohortReport report;
  try {
    if (raw) {
      report = grading::cohort_report(first, groups[first].get<std::vector<double>>(), second,
                                      groups[second].get<std::vector<double>>());
    } else {
      auto summary = [&](const json& s) {
        return grading::SampleStats{s.at("n").get<std::size_t>(), s.at("mean").get<double>(),
                                    s.at("stdev").get<double>(), s.value("median", s.at("mean").get<double>())};
      };
      report = grading::cohort_report_from_summaries(first, summary(groups[first]), second, summary(groups[second]));
    }
  } catch (const json::exception& e) {
    throw InputError{opt.path + ": " + e.what()};
  } catch (const grading::GradingError& e) {
    throw InputError{std::string(grading::grading_error_code_name(e.code())) + ": " + e.what()};
  }
  if (structured(common.format)) {
    std::cout << service::to_json(report).dump(2) << "\n";
  } else {
    std::cout << grading::format_cohort_report(report);
  }
  return kOk;
}

// ---- serve --------------------------------------------------------------------

int cmd_serve(const std::string& config_path) {
  try {
    service::ServiceConfig config = service::load_config(config_path);
    service::TutorService tutor(config);
    std::cerr << "listening on " << config.host << ":" << config.port << "\n";
    service::serve_http(tutor, config.host, config.port);
  } catch (const service::ConfigError& e) {
    throw InputError{e.what()};
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tutor authoring and operations tool"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool kb) {
    if (kb) sub->add_option("--kb", common.kb, "Rule files or directories")->expected(1, -1);
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"text", "structured"}));
    sub->add_option("--seed", common.seed, "Reserved");
  };

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a solution against an exercise");
  eval_cmd->add_option("exercise", eval.exercise_path, "Exercise document")->required();
  eval_cmd->add_option("solution", eval.solution_path, "Solution document")->required();
  eval_cmd->add_option("--feedback", eval.feedback, "Feedback kind")
      ->check(CLI::IsMember({"response", "correct", "elaborated", "adapted"}));
  eval_cmd->add_option("--level", eval.level, "Learning level for adapted feedback")->check(CLI::Range(0.0, 100.0));
  eval_cmd->add_option("--stdin", eval.stdin_path, "File with whitespace-separated input tokens");
  add_common(eval_cmd, true);

  CLI::App* lint_cmd = app.add_subcommand("lint-kb", "Load the knowledge base and report authoring gaps");
  add_common(lint_cmd, true);
  CLI::App* stats_cmd = app.add_subcommand("kb-stats", "Rule count per category");
  add_common(stats_cmd, true);

  QuizSimOptions sim;
  CLI::App* sim_cmd = app.add_subcommand("quiz-sim", "Assemble successive quizzes and trace priorities");
  sim_cmd->add_option("bank", sim.bank_path, "Question bank document")->required();
  sim_cmd->add_option("student", sim.model_path, "Student model document");
  sim_cmd->add_option("--lesson", sim.lesson, "Lesson id")->required();
  sim_cmd->add_option("-n", sim.repetitions, "Number of quizzes");
  sim_cmd->add_option("--level", sim.level, "Fixed learning level (overrides the model)");
  add_common(sim_cmd, false);

  ReportOptions report;
  CLI::App* report_cmd = app.add_subcommand("report", "Cohort comparison of term grades");
  report_cmd->add_option("grades", report.path, "Grades document")->required();
  report_cmd->add_option("--first", report.first, "First group");
  report_cmd->add_option("--second", report.second, "Second group");
  add_common(report_cmd, false);

  std::string config_path;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", config_path, "Config file (default: $TUTOR_CONFIG)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    if (code != 0 && app.get_subcommands().empty()) std::cerr << app.help();
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (eval_cmd->parsed()) return cmd_eval(common, eval);
    if (lint_cmd->parsed()) return cmd_lint_kb(common);
    if (stats_cmd->parsed()) return cmd_kb_stats(common);
    if (sim_cmd->parsed()) return cmd_quiz_sim(common, sim);
    if (report_cmd->parsed()) return cmd_report(common, report);
    if (serve_cmd->parsed()) return cmd_serve(config_path);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
