#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/model/program.hpp"

namespace tutor::interp {

struct RunLimits {
  std::int64_t max_steps = 100000;
  std::int64_t max_output_bytes = 65536;
  /// Whitespace-free input tokens consumed by scanf blocks.
  std::vector<std::string> stdin_script;
};

enum class RunStatus { Completed, StepLimitExceeded, RuntimeError };

std::string_view run_status_name(RunStatus status);

struct RuntimeOutcome {
  RunStatus status = RunStatus::Completed;
  /// Set for RuntimeError only.
  std::string error_message;
  std::string error_block_id;
  std::string stdout_text;
  std::int64_t steps_used = 0;
  /// Virtual files by path, as left when the program stopped.
  std::map<std::string, std::string> virtual_files;

  friend bool operator==(const RuntimeOutcome&, const RuntimeOutcome&) = default;
};

/// The program failed validation or type checking, or the limits are not
/// positive. Never produced for faults during execution.
class InvalidProgram : public std::runtime_error {
 public:
  InvalidProgram(const std::string& message, std::vector<std::string> problems)
      : std::runtime_error(message), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Executes `program` from its entry function. Deterministic; touches no
/// real files. Throws InvalidProgram.
RuntimeOutcome run(const model::Program& program, const RunLimits& limits = {});

/// Splits raw stdin text into tokens on ASCII whitespace.
std::vector<std::string> split_stdin(std::string_view text);

struct OutputComparison {
  bool equal = true;
  /// First differing byte offset; equals the shorter length when one output
  /// is a prefix of the other. Meaningless when equal.
  std::size_t first_difference = 0;
  /// Up to kContextBytes either side of the mismatch.
  std::string expected_context;
  std::string actual_context;
};

inline constexpr std::size_t kContextBytes = 16;

OutputComparison compare_output(const RuntimeOutcome& outcome, std::string_view expected_stdout);

}  // namespace tutor::interp
