#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tutor/codec/solution_codec.hpp"

namespace tutor::perf {

/// Seconds since the Unix epoch.
using Timestamp = std::int64_t;

struct PageView {
  std::string lesson_id;
  friend bool operator==(const PageView&, const PageView&) = default;
};

struct FeedbackShown {
  std::string exercise_id;
  std::int64_t count = 0;
  friend bool operator==(const FeedbackShown&, const FeedbackShown&) = default;
};

struct ExerciseCompleted {
  std::string exercise_id;
  std::int64_t elapsed_seconds = 0;
  std::int64_t feedback_count = 0;
  int learning_score = 0;
  friend bool operator==(const ExerciseCompleted&, const ExerciseCompleted&) = default;
};

struct QuizScored {
  std::string quiz_id;
  double score = 0;
  friend bool operator==(const QuizScored&, const QuizScored&) = default;
};

/// Teacher-entered points: "homework", "forum", "chat", or the page-view
/// score override kPageViewScoreActivity.
struct ActivityPoint {
  std::string kind;
  double points = 0;
  friend bool operator==(const ActivityPoint&, const ActivityPoint&) = default;
};

inline constexpr std::string_view kPageViewScoreActivity = "page_view_score";

using EventPayload = std::variant<PageView, FeedbackShown, ExerciseCompleted, QuizScored, ActivityPoint>;

struct LearningEvent {
  std::string student_id;
  Timestamp timestamp = 0;
  EventPayload payload;
  friend bool operator==(const LearningEvent&, const LearningEvent&) = default;
};

/// Wire name of the payload kind: page_view, feedback_shown,
/// exercise_completed, quiz_scored, activity_point.
std::string_view event_kind_name(const EventPayload& payload);

class InvalidEvent : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws InvalidEvent when a score is outside [0,100], a count or duration
/// is negative, or an identifier is empty.
void validate_event(const LearningEvent& event);

/// One-line JSON record, and its inverse (throws InvalidEvent).
std::string encode_event(const LearningEvent& event);
LearningEvent decode_event(std::string_view line);

/// Bounds that keep learning_score's exact arithmetic within 64 bits.
inline constexpr std::int64_t kMaxTimeLimitSeconds = 100'000'000;
inline constexpr std::int64_t kMaxFeedbackLimit = 1'000'000;

/// CTutor learning score for a completed exercise; both criteria weigh
/// half and decay linearly to zero at the teacher-set limit. Computed in
/// exact integer arithmetic, halves round up. Throws std::invalid_argument
/// for limits outside [1, max] or negative inputs.
int learning_score(std::int64_t elapsed_seconds, std::int64_t feedback_count, const codec::ScoringLimits& limits);

struct StudentAverages {
  std::optional<double> page_view_score;
  std::optional<double> avg_quiz_score;
  std::optional<double> avg_ctutor_score;
  friend bool operator==(const StudentAverages&, const StudentAverages&) = default;
};

/// Averages over one student's events. A teacher-set page-view score (the
/// latest by timestamp, larger value on ties) replaces the automatic
/// distinct-lesson ratio. Independent of event order.
StudentAverages averages_of(const std::vector<LearningEvent>& events, int lessons_total);

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only learning event log, optionally persisted as one JSON record
/// per line. Thread-safe; readers see a consistent prefix of the log.
class PerformanceStore {
 public:
  PerformanceStore() = default;
  /// Replays `log_path` if it exists and appends new events to it. Throws
  /// StoreError on unreadable or malformed logs.
  explicit PerformanceStore(std::filesystem::path log_path);

  PerformanceStore(const PerformanceStore&) = delete;
  PerformanceStore& operator=(const PerformanceStore&) = delete;

  /// Throws InvalidEvent; on failure nothing is recorded.
  void record(const LearningEvent& event);

  std::vector<LearningEvent> events_of(std::string_view student_id) const;
  std::vector<LearningEvent> all_events() const;
  std::size_t size() const;

  StudentAverages averages(std::string_view student_id, int lessons_total) const;

 private:
  mutable std::shared_mutex mutex_;
  std::optional<std::filesystem::path> log_path_;
  std::vector<LearningEvent> events_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_student_;
};

}  // namespace tutor::perf
