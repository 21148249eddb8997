#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tutor/feedback/feedback_kind.hpp"
#include "tutor/grading/grading.hpp"
#include "tutor/interp/interpreter.hpp"
#include "tutor/itest/itest.hpp"

namespace tutor::service {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "tutor-data";
  /// Read-only rule sources; teacher uploads live under data_dir/rules.
  std::vector<std::filesystem::path> kb_paths;
  /// Seed content copied into an empty data directory on first start.
  std::vector<std::filesystem::path> exercise_paths;
  std::vector<std::filesystem::path> bank_paths;
  feedback::FeedbackKind default_feedback = feedback::FeedbackKind::Elaborated;
  itest::ItestConfig itest;
  grading::GradingPolicy grading;
  std::int64_t max_steps = 100000;
  std::int64_t max_output_bytes = 65536;
  std::string teacher_token;
  /// Bearer token → student id.
  std::map<std::string, std::string> student_tokens;
};

/// Parses a JSON config document; relative paths resolve against `base_dir`.
/// Throws ConfigError.
ServiceConfig parse_config(const std::string& document, const std::filesystem::path& base_dir);

/// Reads `path`, or the file named by TUTOR_CONFIG when `path` is empty.
ServiceConfig load_config(const std::filesystem::path& path = {});

}  // namespace tutor::service
