#include "tutor/perf/performance_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

namespace tutor::perf {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidEvent(message);
}

bool is_score(double v) { return std::isfinite(v) && v >= 0 && v <= 100; }

/// Mean of `values` summed in sorted order so the result does not depend on
/// insertion order.
std::optional<double> mean(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

std::string_view event_kind_name(const EventPayload& payload) {
  static constexpr std::string_view kNames[] = {"page_view", "feedback_shown", "exercise_completed", "quiz_scored",
                                                "activity_point"};
  return kNames[payload.index()];
}

void validate_event(const LearningEvent& event) {
  require(!event.student_id.empty(), "student_id must not be empty");
  require(event.timestamp >= 0, "timestamp must not be negative");
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PageView>) {
          require(!p.lesson_id.empty(), "page_view needs a lesson_id");
        } else if constexpr (std::is_same_v<T, FeedbackShown>) {
          require(!p.exercise_id.empty(), "feedback_shown needs an exercise_id");
          require(p.count >= 0, "feedback count must not be negative");
        } else if constexpr (std::is_same_v<T, ExerciseCompleted>) {
          require(!p.exercise_id.empty(), "exercise_completed needs an exercise_id");
          require(p.elapsed_seconds >= 0, "elapsed_seconds must not be negative");
          require(p.feedback_count >= 0, "feedback_count must not be negative");
          require(p.learning_score >= 0 && p.learning_score <= 100, "learning_score must be within [0,100]");
        } else if constexpr (std::is_same_v<T, QuizScored>) {
          require(!p.quiz_id.empty(), "quiz_scored needs a quiz_id");
          require(is_score(p.score), "quiz score must be within [0,100]");
        } else {
          require(!p.kind.empty(), "activity_point needs a kind");
          require(std::isfinite(p.points) && p.points >= 0, "activity points must not be negative");
          require(p.kind != kPageViewScoreActivity || p.points <= 100, "page view score must be within [0,100]");
        }
      },
      event.payload);
}

std::string encode_event(const LearningEvent& event) {
  json j = {{"student_id", event.student_id}, {"timestamp", event.timestamp}, {"kind", event_kind_name(event.payload)}};
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PageView>) {
          j["lesson_id"] = p.lesson_id;
        } else if constexpr (std::is_same_v<T, FeedbackShown>) {
          j["exercise_id"] = p.exercise_id;
          j["count"] = p.count;
        } else if constexpr (std::is_same_v<T, ExerciseCompleted>) {
          j["exercise_id"] = p.exercise_id;
          j["elapsed_seconds"] = p.elapsed_seconds;
          j["feedback_count"] = p.feedback_count;
          j["learning_score"] = p.learning_score;
        } else if constexpr (std::is_same_v<T, QuizScored>) {
          j["quiz_id"] = p.quiz_id;
          j["score"] = p.score;
        } else {
          j["activity"] = p.kind;
          j["points"] = p.points;
        }
      },
      event.payload);
  return j.dump();
}

LearningEvent decode_event(std::string_view line) {
  try {
    json j = json::parse(line);
    LearningEvent e;
    e.student_id = j.at("student_id").get<std::string>();
    e.timestamp = j.at("timestamp").get<Timestamp>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "page_view") {
      e.payload = PageView{j.at("lesson_id").get<std::string>()};
    } else if (kind == "feedback_shown") {
      e.payload = FeedbackShown{j.at("exercise_id").get<std::string>(), j.at("count").get<std::int64_t>()};
    } else if (kind == "exercise_completed") {
      e.payload = ExerciseCompleted{j.at("exercise_id").get<std::string>(), j.at("elapsed_seconds").get<std::int64_t>(),
                                    j.at("feedback_count").get<std::int64_t>(), j.at("learning_score").get<int>()};
    } else if (kind == "quiz_scored") {
      e.payload = QuizScored{j.at("quiz_id").get<std::string>(), j.at("score").get<double>()};
    } else if (kind == "activity_point") {
      e.payload = ActivityPoint{j.at("activity").get<std::string>(), j.at("points").get<double>()};
    } else {
      throw InvalidEvent("unknown event kind '" + kind + "'");
    }
    validate_event(e);
    return e;
  } catch (const json::exception& ex) {
    throw InvalidEvent(std::string("malformed event record: ") + ex.what());
  }
}

int learning_score(std::int64_t elapsed_seconds, std::int64_t feedback_count, const codec::ScoringLimits& limits) {
  if (limits.time_limit_seconds <= 0 || limits.feedback_limit <= 0) {
    throw std::invalid_argument("scoring limits must be positive");
  }
  if (limits.time_limit_seconds > kMaxTimeLimitSeconds || limits.feedback_limit > kMaxFeedbackLimit) {
    throw std::invalid_argument("scoring limits are too large");
  }
  if (elapsed_seconds < 0 || feedback_count < 0) throw std::invalid_argument("elapsed time and feedback count must not be negative");
  const std::int64_t t_limit = limits.time_limit_seconds;
  const std::int64_t f_limit = limits.feedback_limit;
  const std::int64_t time_left = t_limit - std::min(elapsed_seconds, t_limit);
  const std::int64_t feedback_left = f_limit - std::min(feedback_count, f_limit);
  // 100 * (time_left/T + feedback_left/F) / 2, rounded half up
  const std::int64_t numerator = 100 * (time_left * f_limit + feedback_left * t_limit);
  const std::int64_t denominator = 2 * t_limit * f_limit;
  return static_cast<int>((2 * numerator + denominator) / (2 * denominator));
}

StudentAverages averages_of(const std::vector<LearningEvent>& events, int lessons_total) {
  if (lessons_total < 1) throw std::invalid_argument("lessons_total must be at least 1");
  std::set<std::string> lessons;
  std::vector<double> quiz_scores;
  std::vector<double> ctutor_scores;
  std::optional<std::pair<Timestamp, double>> override_pv;
  for (const LearningEvent& e : events) {
    if (const auto* v = std::get_if<PageView>(&e.payload)) {
      lessons.insert(v->lesson_id);
    } else if (const auto* q = std::get_if<QuizScored>(&e.payload)) {
      quiz_scores.push_back(q->score);
    } else if (const auto* c = std::get_if<ExerciseCompleted>(&e.payload)) {
      ctutor_scores.push_back(c->learning_score);
    } else if (const auto* a = std::get_if<ActivityPoint>(&e.payload); a && a->kind == kPageViewScoreActivity) {
      auto candidate = std::make_pair(e.timestamp, a->points);
      if (!override_pv || *override_pv < candidate) override_pv = candidate;
    }
  }
  StudentAverages out;
  if (override_pv) {
    out.page_view_score = override_pv->second;
  } else if (!lessons.empty()) {
    // round(100 * viewed / total), halves up
    auto viewed = static_cast<std::int64_t>(lessons.size());
    std::int64_t percent = (200 * viewed + lessons_total) / (2 * std::int64_t{lessons_total});
    out.page_view_score = static_cast<double>(std::min<std::int64_t>(100, percent));
  }
  out.avg_quiz_score = mean(std::move(quiz_scores));
  out.avg_ctutor_score = mean(std::move(ctutor_scores));
  return out;
}

PerformanceStore::PerformanceStore(std::filesystem::path log_path) : log_path_(std::move(log_path)) {
  if (!std::filesystem::exists(*log_path_)) return;
  std::ifstream in(*log_path_);
  if (!in) throw StoreError("cannot read event log " + log_path_->string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      LearningEvent e = decode_event(line);
      by_student_[e.student_id].push_back(events_.size());
      events_.push_back(std::move(e));
    } catch (const InvalidEvent& ex) {
      throw StoreError(log_path_->string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
}

void PerformanceStore::record(const LearningEvent& event) {
  validate_event(event);
  std::unique_lock lock(mutex_);
  if (log_path_) {
    std::ofstream out(*log_path_, std::ios::app);
    out << encode_event(event) << '\n';
    out.flush();
    if (!out) throw StoreError("cannot append to event log " + log_path_->string());
  }
  by_student_[event.student_id].push_back(events_.size());
  events_.push_back(event);
}

std::vector<LearningEvent> PerformanceStore::events_of(std::string_view student_id) const {
  std::shared_lock lock(mutex_);
  std::vector<LearningEvent> out;
  if (auto it = by_student_.find(student_id); it != by_student_.end()) {
    out.reserve(it->second.size());
    for (std::size_t i : it->second) out.push_back(events_[i]);
  }
  return out;
}

std::vector<LearningEvent> PerformanceStore::all_events() const {
  std::shared_lock lock(mutex_);
  return events_;
}

std::size_t PerformanceStore::size() const {
  std::shared_lock lock(mutex_);
  return events_.size();
}

StudentAverages PerformanceStore::averages(std::string_view student_id, int lessons_total) const {
  return averages_of(events_of(student_id), lessons_total);
}

}  // namespace tutor::perf
