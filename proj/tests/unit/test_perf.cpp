#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "tutor/perf/performance_store.hpp"

using namespace tutor;
using perf::LearningEvent;

namespace {

/// Nearest integer to 100·(½(1 − t/T)⁺ + ½(1 − f/F)⁺) found by scanning
/// candidates and comparing exact cross-multiplied distances; ties go up.
int oracle_score(std::int64_t t, std::int64_t f, std::int64_t T, std::int64_t F) {
  std::int64_t tl = std::max<std::int64_t>(0, T - t);
  std::int64_t fl = std::max<std::int64_t>(0, F - f);
  // score = 100 * (tl*F + fl*T) / (2*T*F) = num / den
  std::int64_t num = 100 * (tl * F + fl * T);
  std::int64_t den = 2 * T * F;
  int best = 0;
  for (int k = 1; k <= 100; ++k) {
    // |num/den - k| <= |num/den - best|  <=>  |num - k*den| <= |num - best*den|
    if (std::llabs(num - k * den) <= std::llabs(num - best * den)) best = k;
  }
  return best;
}

LearningEvent quiz(const std::string& student, double score, perf::Timestamp at = 0) {
  return LearningEvent{student, at, perf::QuizScored{"q" + std::to_string(at), score}};
}

LearningEvent view(const std::string& student, const std::string& lesson) {
  return LearningEvent{student, 0, perf::PageView{lesson}};
}

LearningEvent completed(const std::string& student, int score) {
  return LearningEvent{student, 0, perf::ExerciseCompleted{"ex", 10, 1, score}};
}

}  // namespace

TEST_SUITE("performance_store") {
  TEST_CASE("learning score examples") {
    codec::ScoringLimits limits{600, 10};
    CHECK(perf::learning_score(0, 0, limits) == 100);
    CHECK(perf::learning_score(600, 10, limits) == 0);
    CHECK(perf::learning_score(300, 0, limits) == 75);
    CHECK(perf::learning_score(120, 0, limits) == 90);
    CHECK(perf::learning_score(5000, 500, limits) == 0);
    CHECK(perf::learning_score(0, 10, limits) == 50);
    // 100·(0.5·0.99 + 0.5) = 99.5 rounds up
    CHECK(perf::learning_score(6, 0, limits) == 100);
    CHECK_THROWS_AS(perf::learning_score(0, 0, {0, 10}), std::invalid_argument);
    CHECK_THROWS_AS(perf::learning_score(-1, 0, limits), std::invalid_argument);
  }

  TEST_CASE("learning score matches the exact oracle, stays in range and is monotone") {
    for (auto [T, F] : {std::pair<std::int64_t, std::int64_t>{600, 10}, {90, 7}, {1, 1}, {3600, 3}}) {
      codec::ScoringLimits limits{T, F};
      for (std::int64_t t = 0; t <= T + 5; t += std::max<std::int64_t>(1, T / 97)) {
        for (std::int64_t f = 0; f <= F + 3; ++f) {
          int s = perf::learning_score(t, f, limits);
          CHECK(s == oracle_score(t, f, T, F));
          CHECK(s >= 0);
          CHECK(s <= 100);
          CHECK(perf::learning_score(t + 1, f, limits) <= s);
          CHECK(perf::learning_score(t, f + 1, limits) <= s);
        }
      }
    }
  }

  TEST_CASE("record and read back per student in insertion order") {
    perf::PerformanceStore store;
    std::vector<LearningEvent> a = {view("A", "T1-01"), quiz("A", 60, 1), completed("A", 90)};
    for (const auto& e : a) store.record(e);
    CHECK(store.events_of("A") == a);
    CHECK(store.events_of("B").empty());
    CHECK(store.size() == 3);
  }

  TEST_CASE("invalid events are rejected and not recorded") {
    perf::PerformanceStore store;
    CHECK_THROWS_AS(store.record(quiz("A", 101)), perf::InvalidEvent);
    CHECK_THROWS_AS(store.record(completed("A", -1)), perf::InvalidEvent);
    CHECK_THROWS_AS(store.record(LearningEvent{"A", 0, perf::FeedbackShown{"ex", -2}}), perf::InvalidEvent);
    CHECK_THROWS_AS(store.record(LearningEvent{"A", 0, perf::ExerciseCompleted{"ex", -5, 0, 50}}), perf::InvalidEvent);
    CHECK_THROWS_AS(store.record(LearningEvent{"A", 0, perf::ActivityPoint{"page_view_score", 120}}), perf::InvalidEvent);
    CHECK_THROWS_AS(store.record(LearningEvent{"", 0, perf::PageView{"T1-01"}}), perf::InvalidEvent);
    CHECK(store.size() == 0);
  }

  TEST_CASE("averages") {
    CHECK(perf::averages_of({}, 14) == perf::StudentAverages{});

    std::vector<LearningEvent> views;
    for (int i = 1; i <= 7; ++i) views.push_back(view("A", "T1-" + std::to_string(i)));
    views.push_back(view("A", "T1-1"));  // repeat view of a lesson counts once
    auto pv = perf::averages_of(views, 14);
    CHECK(pv.page_view_score == 50.0);
    CHECK_FALSE(pv.avg_quiz_score);
    CHECK_FALSE(pv.avg_ctutor_score);

    auto aq = perf::averages_of({quiz("A", 60, 1), quiz("A", 80, 2)}, 14);
    CHECK(aq.avg_quiz_score == 70.0);
    CHECK_FALSE(aq.page_view_score);

    auto ac = perf::averages_of({completed("A", 90), completed("A", 75)}, 14);
    CHECK(ac.avg_ctutor_score == 82.5);

    // 1 of 8 lessons is 12.5%, rounded up
    CHECK(perf::averages_of({view("A", "x")}, 8).page_view_score == 13.0);
    CHECK(perf::averages_of({view("A", "x"), view("A", "y")}, 1).page_view_score == 100.0);
    CHECK_THROWS_AS(perf::averages_of({}, 0), std::invalid_argument);
  }

  TEST_CASE("teacher-set page view score overrides the automatic ratio") {
    std::vector<LearningEvent> events = {view("A", "T1-01"),
                                         LearningEvent{"A", 5, perf::ActivityPoint{"page_view_score", 40}},
                                         LearningEvent{"A", 9, perf::ActivityPoint{"page_view_score", 85}},
                                         LearningEvent{"A", 7, perf::ActivityPoint{"page_view_score", 10}},
                                         LearningEvent{"A", 8, perf::ActivityPoint{"homework", 20}}};
    CHECK(perf::averages_of(events, 14).page_view_score == 85.0);
  }

  TEST_CASE("averages are invariant under event permutation") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> score(0, 100);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int round = 0; round < 50; ++round) {
      std::vector<LearningEvent> events;
      for (int i = 0; i < 30; ++i) {
        switch (pick(rng)) {
          case 0:
            events.push_back(quiz("A", score(rng), i));
            break;
          case 1:
            events.push_back(completed("A", static_cast<int>(score(rng))));
            break;
          case 2:
            events.push_back(view("A", "L" + std::to_string(i % 9)));
            break;
          default:
            events.push_back(LearningEvent{"A", i % 4, perf::ActivityPoint{"page_view_score", score(rng)}});
        }
      }
      auto expected = perf::averages_of(events, 14);
      for (int k = 0; k < 5; ++k) {
        std::shuffle(events.begin(), events.end(), rng);
        CHECK(perf::averages_of(events, 14) == expected);
      }
    }
  }

  TEST_CASE("events survive an encode/decode round trip") {
    std::vector<LearningEvent> events = {
        view("A", "T1-01"), quiz("B", 66.67, 3), completed("C", 42),
        LearningEvent{"D", 9, perf::FeedbackShown{"ex1", 3}},
        LearningEvent{"E", 1700000000, perf::ActivityPoint{"forum", 7.5}}};
    for (const auto& e : events) CHECK(perf::decode_event(perf::encode_event(e)) == e);
    CHECK_THROWS_AS(perf::decode_event("{not json"), perf::InvalidEvent);
    CHECK_THROWS_AS(perf::decode_event(R"({"student_id": "a", "timestamp": 0, "kind": "nap"})"), perf::InvalidEvent);
  }

  TEST_CASE("the event log persists across store instances") {
    auto path = std::filesystem::temp_directory_path() / "tutor_perf_log_test.ndjson";
    std::filesystem::remove(path);
    {
      perf::PerformanceStore store(path);
      store.record(quiz("A", 50, 1));
      store.record(view("B", "T2-03"));
    }
    perf::PerformanceStore reopened(path);
    CHECK(reopened.size() == 2);
    CHECK(reopened.events_of("A") == std::vector<LearningEvent>{quiz("A", 50, 1)});
    reopened.record(quiz("A", 70, 2));
    CHECK(reopened.averages("A", 14).avg_quiz_score == 60.0);

    {
      std::ofstream corrupt(path, std::ios::app);
      corrupt << "garbage\n";
    }
    CHECK_THROWS_AS(perf::PerformanceStore{path}, perf::StoreError);
    std::filesystem::remove(path);
  }
}
