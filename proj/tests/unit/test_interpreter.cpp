#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "../support/program_gen.hpp"
#include "../support/support.hpp"
#include "tutor/codec/solution_codec.hpp"
#include "tutor/interp/interpreter.hpp"

using namespace tutor;
using interp::RunStatus;

namespace {

/// `body` is a JSON list of blocks placed inside `int main()`.
model::Program main_with(const std::string& body, const std::string& prelude = "") {
  std::string doc = R"({"blocks": [)" + prelude + (prelude.empty() ? "" : ",") +
                    R"({"id": "main", "kind": "function_def", "attrs": {"name": "main", "return_type": "int"},
                         "children": )" + body + "}]}";
  return codec::parse_solution(doc);
}

interp::RuntimeOutcome run_main(const std::string& body, interp::RunLimits limits = {}) {
  return interp::run(main_with(body), limits);
}

std::string out(const std::string& id, const std::string& format, const std::vector<std::string>& args = {}) {
  std::string attrs = R"("format": ")" + format + "\"";
  if (!args.empty()) {
    std::string list;
    for (const std::string& a : args) list += (list.empty() ? "\"" : ", \"") + a + "\"";
    attrs += R"(, "args": [)" + list + "]";
  }
  return R"({"id": ")" + id + R"(", "kind": "output", "attrs": {)" + attrs + "}}";
}

std::string decl(const std::string& id, const std::string& name, const std::string& type, const std::string& init = "") {
  std::string attrs = R"("name": ")" + name + R"(", "type": ")" + type + "\"";
  if (!init.empty()) attrs += R"(, "init": ")" + init + "\"";
  return R"({"id": ")" + id + R"(", "kind": "declaration", "attrs": {)" + attrs + "}}";
}

std::string assign(const std::string& id, const std::string& target, const std::string& value) {
  return R"({"id": ")" + id + R"(", "kind": "assignment", "attrs": {"target": ")" + target + R"(", "value": ")" +
         value + R"("}})";
}

}  // namespace

TEST_SUITE("interpreter") {
  TEST_CASE("reference programs reproduce their expected output byte for byte") {
    auto programs = testing::files_with_suffix(testing::fixture_dir() / "programs", ".sol.json");
    REQUIRE(programs.size() == 10);
    for (const auto& path : programs) {
      std::string stem = path.string().substr(0, path.string().size() - std::string(".sol.json").size());
      CAPTURE(stem);
      interp::RunLimits limits;
      if (std::filesystem::exists(stem + ".stdin")) limits.stdin_script = interp::split_stdin(testing::read_file(stem + ".stdin"));
      auto outcome = interp::run(codec::parse_solution(testing::read_file(path)), limits);
      CHECK(outcome.status == RunStatus::Completed);
      CHECK(outcome.error_message == "");
      auto cmp = interp::compare_output(outcome, testing::read_file(stem + ".stdout"));
      CHECK(cmp.equal);
    }
  }

  TEST_CASE("runs are deterministic") {
    auto program = codec::parse_solution(testing::read_file(testing::fixture_dir() / "programs" / "06_dynamic_memory.sol.json"));
    CHECK(interp::run(program) == interp::run(program));
  }

  TEST_CASE("infinite loops stop at exactly the step limit") {
    interp::RunLimits limits;
    limits.max_steps = 1000;
    for (const char* loop : {R"({"id": "w", "kind": "while_loop", "attrs": {"cond": "1"}})",
                             R"({"id": "f", "kind": "for_loop", "attrs": {}})",
                             R"({"id": "d", "kind": "do_while_loop", "attrs": {"cond": "1"}})"}) {
      auto outcome = run_main(std::string("[") + loop + "]", limits);
      CHECK(outcome.status == RunStatus::StepLimitExceeded);
      CHECK(outcome.steps_used == 1000);
    }
  }

  TEST_CASE("step accounting") {
    // decl, while entry, 4 condition checks, 3 bodies, return
    auto outcome = run_main("[" + decl("d", "i", "int", "0") +
                            R"(, {"id": "w", "kind": "while_loop", "attrs": {"cond": "i < 3"}, "children": [)" +
                            assign("a", "i", "i + 1") + R"(]}, {"id": "r", "kind": "return", "attrs": {"value": "0"}}])");
    CHECK(outcome.status == RunStatus::Completed);
    CHECK(outcome.steps_used == 10);

    interp::RunLimits tight;
    tight.max_steps = 9;
    auto stopped = interp::run(main_with("[" + decl("d", "i", "int", "0") +
                                         R"(, {"id": "w", "kind": "while_loop", "attrs": {"cond": "i < 3"}, "children": [)" +
                                         assign("a", "i", "i + 1") + R"(]}, {"id": "r", "kind": "return", "attrs": {"value": "0"}}])"),
                               tight);
    CHECK(stopped.status == RunStatus::StepLimitExceeded);
    CHECK(stopped.steps_used == 9);
  }

  TEST_CASE("integer wraparound, truncating division and char arithmetic") {
    auto outcome = run_main("[" + decl("a", "big", "int", "2147483647") + "," + assign("b", "big", "big + 1") + "," +
                            decl("c", "ch", "char", "'y'") + "," + assign("d", "ch", "ch + 200") + "," +
                            out("o", "%d %d %d %d %f %c %d", {"big", "7 / 2", "-7 / 2", "-7 % 3", "7 / 2.0", "'a' + 1", "ch"}) + "]");
    CHECK(outcome.status == RunStatus::Completed);
    CHECK(outcome.stdout_text == "-2147483648 3 -3 -1 3.5 b 65");
  }

  TEST_CASE("runtime faults name the offending block") {
    struct Case {
      std::string body;
      std::string block;
      std::string message;
    };
    std::vector<Case> cases = {
        {"[" + decl("d", "x", "int", "0") + "," + out("o", "%d", {"10 / x"}) + "]", "o", "division by zero"},
        {"[" + decl("d", "p", "int*") + "," + assign("a", "*p", "1") + "]", "a", "NULL pointer dereference"},
        {"[" + decl("d", "v", "int[3]") + "," + assign("a", "v[3]", "1") + "]", "a", "out of bounds"},
        {"[" + decl("d", "p", "int*") + R"(, {"id": "m", "kind": "mem_alloc", "attrs": {"target": "p", "elem_type": "int", "count": "2"}},
            {"id": "f1", "kind": "mem_free", "attrs": {"target": "p"}},
            {"id": "f2", "kind": "mem_free", "attrs": {"target": "p"}}])",
         "f2", "freed twice"},
        {"[" + decl("d", "p", "int*") + R"(, {"id": "m", "kind": "mem_alloc", "attrs": {"target": "p", "elem_type": "int", "count": "2"}},
            {"id": "f1", "kind": "mem_free", "attrs": {"target": "p"}}, )" +
             out("o", "%d", {"p[0]"}) + "]",
         "o", "freed"},
        {"[" + decl("d", "p", "int*") + R"(, {"id": "m", "kind": "mem_alloc", "attrs": {"target": "p", "elem_type": "int", "count": "2"}},
            {"id": "f1", "kind": "mem_free", "attrs": {"target": "p + 1"}}])",
         "f1", ""},
        {"[" + decl("d", "f", "FILE*") + R"(, {"id": "w", "kind": "file_op", "attrs": {"op": "write", "handle": "f", "format": "x"}}])",
         "w", "NULL"},
        {"[" + out("o", "%d", {"2.5"}) + "]", "o", "%d expects an int"},
    };
    for (const Case& c : cases) {
      CAPTURE(c.body);
      auto outcome = run_main(c.body);
      CHECK(outcome.status == RunStatus::RuntimeError);
      CHECK(outcome.error_block_id == c.block);
      CHECK(outcome.error_message.find(c.message) != std::string::npos);
    }
  }

  TEST_CASE("unbounded recursion hits the call depth limit") {
    auto program = codec::parse_solution(R"json({"blocks": [
      {"id": "f", "kind": "function_def", "attrs": {"name": "f", "return_type": "int", "params": [{"name": "n", "type": "int"}]}, "children": [
        {"id": "r", "kind": "return", "attrs": {"value": "f(n + 1)"}}]},
      {"id": "main", "kind": "function_def", "attrs": {"name": "main", "return_type": "int"}, "children": [
        {"id": "c", "kind": "function_call", "attrs": {"call": "f(0)"}}]}]})json");
    auto outcome = interp::run(program);
    CHECK(outcome.status == RunStatus::RuntimeError);
    CHECK(outcome.error_message.find("call depth") != std::string::npos);
    CHECK(outcome.error_block_id == "r");
  }

  TEST_CASE("output beyond the byte limit is truncated and reported") {
    interp::RunLimits limits;
    limits.max_output_bytes = 10;
    auto outcome = run_main(R"([{"id": "w", "kind": "while_loop", "attrs": {"cond": "1"}, "children": [)" +
                                out("o", "abc") + "]}]",
                            limits);
    CHECK(outcome.status == RunStatus::RuntimeError);
    CHECK(outcome.stdout_text == "abcabcabca");
    CHECK(outcome.error_block_id == "o");
  }

  TEST_CASE("input: exhausted stdin leaves targets unchanged") {
    interp::RunLimits limits;
    limits.stdin_script = {"4"};
    auto outcome = run_main("[" + decl("a", "x", "int", "1") + "," + decl("b", "y", "int", "2") +
                                R"(, {"id": "in", "kind": "input", "attrs": {"targets": ["x", "y"]}}, )" +
                                out("o", "%d %d", {"x", "y"}) + "]",
                            limits);
    CHECK(outcome.stdout_text == "4 2");
  }

  TEST_CASE("virtual files: modes and missing files") {
    auto outcome = run_main("[" + decl("d", "f", "FILE*") + "," + decl("x", "x", "int", "7") +
                            R"(, {"id": "o1", "kind": "file_op", "attrs": {"op": "open", "handle": "f", "path": "nope.txt", "mode": "r"}},
                              {"id": "i", "kind": "if", "attrs": {"cond": "f == NULL"}, "children": [)" +
                            out("p", "missing ") + R"(]},
                              {"id": "o2", "kind": "file_op", "attrs": {"op": "open", "handle": "f", "path": "log.txt", "mode": "a"}},
                              {"id": "w", "kind": "file_op", "attrs": {"op": "write", "handle": "f", "format": "%d;", "args": ["x"]}},
                              {"id": "c", "kind": "file_op", "attrs": {"op": "close", "handle": "f"}},
                              {"id": "o3", "kind": "file_op", "attrs": {"op": "open", "handle": "f", "path": "log.txt", "mode": "r"}},
                              {"id": "w2", "kind": "file_op", "attrs": {"op": "write", "handle": "f", "format": "x"}}])");
    CHECK(outcome.stdout_text == "missing ");
    CHECK(outcome.status == RunStatus::RuntimeError);
    CHECK(outcome.error_block_id == "w2");
    CHECK(outcome.virtual_files == std::map<std::string, std::string>{{"log.txt", "7;"}});
  }

  TEST_CASE("file operations never touch the real file system") {
    namespace fs = std::filesystem;
    fs::path sandbox = fs::temp_directory_path() / "tutor_interp_canary";
    fs::remove_all(sandbox);
    fs::create_directories(sandbox);
    {
      std::ofstream canary(sandbox / "canary.txt");
      canary << "untouched";
    }
    fs::path previous = fs::current_path();
    fs::current_path(sandbox);
    std::string absolute = (sandbox / "canary.txt").string();
    auto outcome = run_main("[" + decl("d", "f", "FILE*") +
                            R"(, {"id": "o1", "kind": "file_op", "attrs": {"op": "open", "handle": "f", "path": "canary.txt", "mode": "w"}},
                              {"id": "w1", "kind": "file_op", "attrs": {"op": "write", "handle": "f", "format": "overwritten"}},
                              {"id": "c1", "kind": "file_op", "attrs": {"op": "close", "handle": "f"}},
                              {"id": "o2", "kind": "file_op", "attrs": {"op": "open", "handle": "f", "path": ")" +
                            absolute + R"(", "mode": "a"}},
                              {"id": "w2", "kind": "file_op", "attrs": {"op": "write", "handle": "f", "format": "more"}},
                              {"id": "o3", "kind": "file_op", "attrs": {"op": "open", "handle": "f", "path": "new.txt", "mode": "w"}}])");
    auto fixture = interp::run(
        codec::parse_solution(testing::read_file(testing::fixture_dir() / "programs" / "05_virtual_file.sol.json")));
    fs::current_path(previous);

    CHECK(outcome.status == RunStatus::Completed);
    CHECK(outcome.virtual_files.at("canary.txt") == "overwritten");
    CHECK(outcome.virtual_files.at(absolute) == "more");
    CHECK(fixture.virtual_files.at("scores.txt") == "40 2\n");
    CHECK(testing::read_file(sandbox / "canary.txt") == "untouched");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(sandbox)) ++entries;
    CHECK(entries == 1);
    fs::remove_all(sandbox);
  }

  TEST_CASE("ill-formed programs and limits are rejected before running") {
    CHECK_THROWS_AS(run_main("[" + assign("a", "x", "1") + "]"), interp::InvalidProgram);
    interp::RunLimits zero;
    zero.max_steps = 0;
    CHECK_THROWS_AS(run_main("[]", zero), interp::InvalidProgram);
    CHECK_THROWS_AS(interp::run(codec::parse_solution(R"({"blocks": []})")), interp::InvalidProgram);
  }

  TEST_CASE("split_stdin and compare_output") {
    CHECK(interp::split_stdin("  ada 3\n\t-1 ") == std::vector<std::string>{"ada", "3", "-1"});
    CHECK(interp::split_stdin("").empty());

    interp::RuntimeOutcome outcome;
    outcome.stdout_text = "15";
    auto cmp = interp::compare_output(outcome, "14");
    CHECK_FALSE(cmp.equal);
    CHECK(cmp.first_difference == 1);
    CHECK(cmp.expected_context == "14");
    CHECK(cmp.actual_context == "15");

    outcome.stdout_text = "";
    CHECK(interp::compare_output(outcome, "").equal);
    auto prefix = interp::compare_output(outcome, "x");
    CHECK_FALSE(prefix.equal);
    CHECK(prefix.first_difference == 0);
  }

  TEST_CASE("generated programs either are rejected up front or stop cleanly") {
    std::mt19937_64 rng(20261016);
    interp::RunLimits limits;
    limits.max_steps = 2000;
    int executed = 0;
    for (int i = 0; i < 400; ++i) {
      model::Program program = testing::random_program(rng, 8);
      try {
        auto outcome = interp::run(program, limits);
        ++executed;
        CHECK(outcome.steps_used <= limits.max_steps);
        CHECK(outcome.stdout_text.size() <= static_cast<std::size_t>(limits.max_output_bytes));
        CHECK((outcome.status == RunStatus::RuntimeError) == !outcome.error_message.empty());
      } catch (const interp::InvalidProgram& e) {
        CHECK_FALSE(std::string(e.what()).empty());
      }
    }
    MESSAGE("executed " << executed << " of 400 generated programs");
  }
}
