#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tutor/perf/performance_store.hpp"

namespace tutor::grading {

struct ActivityPoints {
  double homework = 0;
  double forum = 0;
  double chat = 0;
  friend bool operator==(const ActivityPoints&, const ActivityPoints&) = default;
};

struct GradingPolicy {
  double visa_weight = 0.20;
  double final_weight = 0.80;
  double pass_threshold = 60;
  ActivityPoints activity_caps{25, 10, 5};
  double adjusted_final_cap = 100;
};

class GradingError : public std::runtime_error {
 public:
  enum class Code { InvalidPolicy, OutOfRange, ActivityOverCap, TooFewSamples, DegenerateVariance };
  GradingError(Code code, const std::string& message) : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

std::string_view grading_error_code_name(GradingError::Code code);

/// Throws InvalidPolicy unless weights are non-negative and sum to 1 and
/// caps are non-negative.
void validate_policy(const GradingPolicy& policy);

/// Final exam plus activity points, capped. Throws ActivityOverCap or
/// OutOfRange.
double adjusted_final(double final_exam, const ActivityPoints& activities, const GradingPolicy& policy = {});

struct TermGrade {
  double grade = 0;
  bool passed = false;
};

/// Throws OutOfRange for inputs outside [0,100].
TermGrade term_grade(double visa, double adjusted_final, const GradingPolicy& policy = {});

struct GradeRecord {
  std::string student_id;
  double visa = 0;
  double final_exam = 0;
  ActivityPoints activity_averages;
  double adjusted_final = 0;
  double term_grade = 0;
  bool passed = false;
};

GradeRecord grade_student(std::string student_id, double visa, double final_exam, const ActivityPoints& activities,
                          const GradingPolicy& policy = {});

/// Mean ActivityPoint value per activity kind ("homework", "forum", "chat");
/// zero for kinds without events.
ActivityPoints activity_averages(const std::vector<perf::LearningEvent>& events);

struct SampleStats {
  std::size_t n = 0;
  double mean = 0;
  /// Sample standard deviation (n − 1 denominator).
  double stdev = 0;
  double median = 0;
};

/// Throws TooFewSamples for fewer than two values.
SampleStats describe(std::vector<double> samples);

enum class Variance { EqualVariances, WelchUnequal };

std::string_view variance_name(Variance variant);

struct TTestResult {
  double t = 0;
  double df = 0;
  double p_two_tailed = 1;
  double mean_difference = 0;
  double std_error_difference = 0;
  std::pair<double, double> ci95;
  Variance variant = Variance::EqualVariances;
};

/// Independent two-sample t-test of a − b. Throws TooFewSamples or
/// DegenerateVariance (standard error of zero).
TTestResult t_test_independent(const SampleStats& a, const SampleStats& b, Variance variant);

/// I_x(a, b) by continued fraction, relative accuracy about 1e-14.
double regularized_incomplete_beta(double a, double b, double x);
/// P(T ≤ t) for Student's t with `df` > 0 degrees of freedom.
double student_t_cdf(double t, double df);
/// Inverse of student_t_cdf for p in (0, 1).
double student_t_quantile(double p, double df);

/// Counts of term grades in ten-point bins [0,10) … [90,100].
std::array<std::size_t, 10> grade_histogram(const std::vector<double>& grades);

struct CohortReport {
  std::string first_name;
  std::string second_name;
  SampleStats first;
  SampleStats second;
  std::size_t first_passed = 0;
  std::size_t second_passed = 0;
  TTestResult equal_variances;
  TTestResult welch;
  std::array<std::size_t, 10> first_histogram{};
  std::array<std::size_t, 10> second_histogram{};
  /// False for reports built from summaries: medians, pass counts and
  /// histograms are then unknown.
  bool has_grades = false;
};

/// Statistics of two groups of term grades; pass counts use `policy`.
CohortReport cohort_report(std::string first_name, const std::vector<double>& first_grades, std::string second_name,
                           const std::vector<double>& second_grades, const GradingPolicy& policy = {});

/// Same report from summary statistics alone (no pass counts or histograms).
CohortReport cohort_report_from_summaries(std::string first_name, const SampleStats& first, std::string second_name,
                                          const SampleStats& second);

/// Plain-text export: a group summary block followed by the independent
/// samples test table and the grade histogram.
std::string format_cohort_report(const CohortReport& report);

}  // namespace tutor::grading
