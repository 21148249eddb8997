#include "tutor/service/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>
#include <string_view>

namespace tutor::service {

namespace {

using nlohmann::json;

void only_keys(const json& object, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : object.items()) {
    bool known = false;
    for (std::string_view k : allowed) known = known || key == k;
    if (!known) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& object, const char* key, T& out, std::string_view where) {
  if (!object.contains(key)) return;
  try {
    out = object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type");
  }
}

std::vector<std::filesystem::path> read_paths(const json& root, const char* key, const std::filesystem::path& base) {
  std::vector<std::string> raw;
  read(root, key, raw, "config");
  std::vector<std::filesystem::path> out;
  for (const std::string& p : raw) {
    std::filesystem::path path(p);
    out.push_back(path.is_absolute() ? path : base / path);
  }
  return out;
}

}  // namespace

ServiceConfig parse_config(const std::string& document, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(root, "config",
            {"host", "port", "data_dir", "kb_paths", "exercise_paths", "bank_paths", "feedback_kind", "itest",
             "grading", "run_limits", "auth"});

  ServiceConfig config;
  read(root, "host", config.host, "config");
  read(root, "port", config.port, "config");
  if (config.port < 0 || config.port > 65535) throw ConfigError("config.port: outside 0..65535");
  if (root.contains("data_dir")) {
    std::string dir;
    read(root, "data_dir", dir, "config");
    std::filesystem::path path(dir);
    config.data_dir = path.is_absolute() ? path : base_dir / path;
  } else {
    config.data_dir = base_dir / config.data_dir;
  }
  config.kb_paths = read_paths(root, "kb_paths", base_dir);
  config.exercise_paths = read_paths(root, "exercise_paths", base_dir);
  config.bank_paths = read_paths(root, "bank_paths", base_dir);

  if (root.contains("feedback_kind")) {
    std::string name;
    read(root, "feedback_kind", name, "config");
    auto kind = feedback::feedback_kind_from_name(name);
    if (!kind) throw ConfigError("config.feedback_kind: unknown kind '" + name + "'");
    config.default_feedback = *kind;
  }

  if (root.contains("itest")) {
    const json& it = root["itest"];
    only_keys(it, "config.itest",
              {"weight_pv", "weight_quiz", "weight_ctutor", "default_level", "questions_per_quiz",
               "priority_decrease", "priority_increase"});
    read(it, "weight_pv", config.itest.weight_pv, "config.itest");
    read(it, "weight_quiz", config.itest.weight_quiz, "config.itest");
    read(it, "weight_ctutor", config.itest.weight_ctutor, "config.itest");
    read(it, "default_level", config.itest.default_level, "config.itest");
    read(it, "questions_per_quiz", config.itest.questions_per_quiz, "config.itest");
    read(it, "priority_decrease", config.itest.priority_decrease, "config.itest");
    read(it, "priority_increase", config.itest.priority_increase, "config.itest");
  }
  try {
    itest::validate_config(config.itest);
  } catch (const itest::ItestError& e) {
    throw ConfigError(std::string("config.itest: ") + e.what());
  }

  if (root.contains("grading")) {
    const json& g = root["grading"];
    only_keys(g, "config.grading",
              {"visa_weight", "final_weight", "pass_threshold", "activity_caps", "adjusted_final_cap"});
    read(g, "visa_weight", config.grading.visa_weight, "config.grading");
    read(g, "final_weight", config.grading.final_weight, "config.grading");
    read(g, "pass_threshold", config.grading.pass_threshold, "config.grading");
    read(g, "adjusted_final_cap", config.grading.adjusted_final_cap, "config.grading");
    if (g.contains("activity_caps")) {
      const json& caps = g["activity_caps"];
      only_keys(caps, "config.grading.activity_caps", {"homework", "forum", "chat"});
      read(caps, "homework", config.grading.activity_caps.homework, "config.grading.activity_caps");
      read(caps, "forum", config.grading.activity_caps.forum, "config.grading.activity_caps");
      read(caps, "chat", config.grading.activity_caps.chat, "config.grading.activity_caps");
    }
  }
  try {
    grading::validate_policy(config.grading);
  } catch (const grading::GradingError& e) {
    throw ConfigError(std::string("config.grading: ") + e.what());
  }

  if (root.contains("run_limits")) {
    const json& limits = root["run_limits"];
    only_keys(limits, "config.run_limits", {"max_steps", "max_output_bytes"});
    read(limits, "max_steps", config.max_steps, "config.run_limits");
    read(limits, "max_output_bytes", config.max_output_bytes, "config.run_limits");
  }
  if (config.max_steps <= 0 || config.max_output_bytes <= 0) throw ConfigError("config.run_limits: must be positive");

  if (root.contains("auth")) {
    const json& auth = root["auth"];
    only_keys(auth, "config.auth", {"teacher_token", "student_tokens"});
    read(auth, "teacher_token", config.teacher_token, "config.auth");
    read(auth, "student_tokens", config.student_tokens, "config.auth");
  }
  for (const auto& [token, student] : config.student_tokens) {
    if (token.empty() || student.empty()) throw ConfigError("config.auth.student_tokens: empty token or student id");
    if (token == config.teacher_token) throw ConfigError("config.auth: a student token equals the teacher token");
  }
  return config;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::filesystem::path file = path;
  if (file.empty()) {
    const char* env = std::getenv("TUTOR_CONFIG");
    if (env == nullptr || *env == '\0') throw ConfigError("no config file given and TUTOR_CONFIG is not set");
    file = env;
  }
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::filesystem::absolute(file).parent_path());
}

}  // namespace tutor::service
