#include "tutor/grading/grading.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace tutor::grading {

namespace {

void require(bool ok, GradingError::Code code, const std::string& message) {
  if (!ok) throw GradingError(code, message);
}

bool in_percent_range(double v) { return std::isfinite(v) && v >= 0 && v <= 100; }

/// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEpsilon = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1;
  const double qam = a - 1;
  double c = 1;
  double d = 1 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1) < kEpsilon) break;
  }
  return h;
}

/// P(|T| ≥ |t|).
double two_tailed_p(double t, double df) {
  if (!std::isfinite(t)) return 0;
  return regularized_incomplete_beta(df / 2, 0.5, df / (df + t * t));
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string_view grading_error_code_name(GradingError::Code code) {
  switch (code) {
    case GradingError::Code::InvalidPolicy:
      return "InvalidPolicy";
    case GradingError::Code::OutOfRange:
      return "OutOfRange";
    case GradingError::Code::ActivityOverCap:
      return "ActivityOverCap";
    case GradingError::Code::TooFewSamples:
      return "TooFewSamples";
    case GradingError::Code::DegenerateVariance:
      return "DegenerateVariance";
  }
  return "Unknown";
}

void validate_policy(const GradingPolicy& p) {
  using C = GradingError::Code;
  require(p.visa_weight >= 0 && p.final_weight >= 0, C::InvalidPolicy, "weights must not be negative");
  require(std::abs(p.visa_weight + p.final_weight - 1.0) <= 1e-9, C::InvalidPolicy, "weights must sum to 1");
  require(in_percent_range(p.pass_threshold), C::InvalidPolicy, "pass_threshold must be within [0,100]");
  require(p.activity_caps.homework >= 0 && p.activity_caps.forum >= 0 && p.activity_caps.chat >= 0, C::InvalidPolicy,
          "activity caps must not be negative");
  require(in_percent_range(p.adjusted_final_cap), C::InvalidPolicy, "adjusted_final_cap must be within [0,100]");
}

double adjusted_final(double final_exam, const ActivityPoints& a, const GradingPolicy& policy) {
  using C = GradingError::Code;
  require(in_percent_range(final_exam), C::OutOfRange, "final exam must be within [0,100]");
  auto check = [](double value, double cap, const char* name) {
    require(std::isfinite(value) && value >= 0, C::OutOfRange, std::string(name) + " average must not be negative");
    require(value <= cap, C::ActivityOverCap,
            std::string(name) + " average " + fixed(value, 2) + " exceeds its cap of " + fixed(cap, 0));
  };
  check(a.homework, policy.activity_caps.homework, "homework");
  check(a.forum, policy.activity_caps.forum, "forum");
  check(a.chat, policy.activity_caps.chat, "chat");
  return std::min(policy.adjusted_final_cap, final_exam + a.homework + a.forum + a.chat);
}

TermGrade term_grade(double visa, double adjusted, const GradingPolicy& policy) {
  require(in_percent_range(visa), GradingError::Code::OutOfRange, "visa must be within [0,100]");
  require(in_percent_range(adjusted), GradingError::Code::OutOfRange, "adjusted final must be within [0,100]");
  double grade = policy.visa_weight * visa + policy.final_weight * adjusted;
  // Absorb representation error so that e.g. 0.2·50 + 0.8·75 is exactly 70.
  double snapped = std::round(grade * 1e9) / 1e9;
  return TermGrade{snapped, snapped >= policy.pass_threshold};
}

GradeRecord grade_student(std::string student_id, double visa, double final_exam, const ActivityPoints& activities,
                          const GradingPolicy& policy) {
  validate_policy(policy);
  GradeRecord r;
  r.student_id = std::move(student_id);
  r.visa = visa;
  r.final_exam = final_exam;
  r.activity_averages = activities;
  r.adjusted_final = adjusted_final(final_exam, activities, policy);
  TermGrade g = term_grade(visa, r.adjusted_final, policy);
  r.term_grade = g.grade;
  r.passed = g.passed;
  return r;
}

ActivityPoints activity_averages(const std::vector<perf::LearningEvent>& events) {
  std::array<std::vector<double>, 3> values;
  for (const perf::LearningEvent& e : events) {
    const auto* a = std::get_if<perf::ActivityPoint>(&e.payload);
    if (a == nullptr) continue;
    if (a->kind == "homework") values[0].push_back(a->points);
    if (a->kind == "forum") values[1].push_back(a->points);
    if (a->kind == "chat") values[2].push_back(a->points);
  }
  auto mean = [](std::vector<double>& v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  return ActivityPoints{mean(values[0]), mean(values[1]), mean(values[2])};
}

SampleStats describe(std::vector<double> samples) {
  require(samples.size() >= 2, GradingError::Code::TooFewSamples, "at least two samples are needed");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  SampleStats s;
  s.n = samples.size();
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0;
  for (double v : samples) ss += (v - s.mean) * (v - s.mean);
  s.stdev = std::sqrt(ss / (n - 1));
  std::size_t mid = samples.size() / 2;
  s.median = samples.size() % 2 == 1 ? samples[mid] : (samples[mid - 1] + samples[mid]) / 2;
  return s;
}

std::string_view variance_name(Variance variant) {
  return variant == Variance::EqualVariances ? "equal_variances" : "welch_unequal";
}

TTestResult t_test_independent(const SampleStats& a, const SampleStats& b, Variance variant) {
  using C = GradingError::Code;
  require(a.n >= 2 && b.n >= 2, C::TooFewSamples, "each group needs at least two samples");
  const auto na = static_cast<double>(a.n);
  const auto nb = static_cast<double>(b.n);
  const double va = a.stdev * a.stdev;
  const double vb = b.stdev * b.stdev;
  TTestResult r;
  r.variant = variant;
  r.mean_difference = a.mean - b.mean;
  if (variant == Variance::EqualVariances) {
    double pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2);
    r.std_error_difference = std::sqrt(pooled) * std::sqrt(1 / na + 1 / nb);
    r.df = na + nb - 2;
  } else {
    const double qa = va / na;
    const double qb = vb / nb;
    r.std_error_difference = std::sqrt(qa + qb);
    r.df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1) + qb * qb / (nb - 1));
  }
  require(r.std_error_difference > 0 && std::isfinite(r.std_error_difference), C::DegenerateVariance,
          "standard error of the difference is zero");
  r.t = r.mean_difference / r.std_error_difference;
  r.p_two_tailed = std::clamp(two_tailed_p(r.t, r.df), 0.0, 1.0);
  const double margin = student_t_quantile(0.975, r.df) * r.std_error_difference;
  r.ci95 = {r.mean_difference - margin, r.mean_difference + margin};
  return r;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw std::domain_error("incomplete beta needs positive parameters");
  if (!(x >= 0 && x <= 1)) throw std::domain_error("incomplete beta needs x in [0,1]");
  if (x == 0) return 0;
  if (x == 1) return 1;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2)) return front * beta_continued_fraction(a, b, x) / a;
  return 1 - front * beta_continued_fraction(b, a, 1 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0)) throw std::domain_error("degrees of freedom must be positive");
  if (std::isnan(t)) return t;
  const double tail = two_tailed_p(t, df) / 2;
  return t < 0 ? tail : 1 - tail;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0 && p < 1)) throw std::domain_error("quantile needs p in (0,1)");
  if (p == 0.5) return 0;
  double lo = -1;
  double hi = 1;
  while (student_t_cdf(lo, df) > p) lo *= 2;
  while (student_t_cdf(hi, df) < p) hi *= 2;
  for (int i = 0; i < 400 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++i) {
    const double mid = lo + (hi - lo) / 2;
    if (student_t_cdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2;
}

std::array<std::size_t, 10> grade_histogram(const std::vector<double>& grades) {
  std::array<std::size_t, 10> bins{};
  for (double g : grades) {
    require(in_percent_range(g), GradingError::Code::OutOfRange, "grades must be within [0,100]");
    bins[std::min<std::size_t>(9, static_cast<std::size_t>(g / 10))]++;
  }
  return bins;
}

CohortReport cohort_report(std::string first_name, const std::vector<double>& first_grades, std::string second_name,
                           const std::vector<double>& second_grades, const GradingPolicy& policy) {
  CohortReport r = cohort_report_from_summaries(std::move(first_name), describe(first_grades), std::move(second_name),
                                                describe(second_grades));
  for (double g : first_grades) r.first_passed += g >= policy.pass_threshold ? 1 : 0;
  for (double g : second_grades) r.second_passed += g >= policy.pass_threshold ? 1 : 0;
  r.first_histogram = grade_histogram(first_grades);
  r.second_histogram = grade_histogram(second_grades);
  r.has_grades = true;
  return r;
}

CohortReport cohort_report_from_summaries(std::string first_name, const SampleStats& first, std::string second_name,
                                          const SampleStats& second) {
  CohortReport r;
  r.first_name = std::move(first_name);
  r.second_name = std::move(second_name);
  r.first = first;
  r.second = second;
  r.equal_variances = t_test_independent(first, second, Variance::EqualVariances);
  r.welch = t_test_independent(first, second, Variance::WelchUnequal);
  return r;
}

std::string format_cohort_report(const CohortReport& report) {
  std::string out = "Group summary\n";
  out += pad_right("group", 16) + pad("n", 6) + pad("mean", 10) + pad("stdev", 10);
  if (report.has_grades) out += pad("median", 10) + pad("passed", 8);
  out += "\n";
  auto group_row = [&](const std::string& name, const SampleStats& s, std::size_t passed) {
    out += pad_right(name, 16) + pad(std::to_string(s.n), 6) + pad(fixed(s.mean, 2), 10) + pad(fixed(s.stdev, 2), 10);
    if (report.has_grades) out += pad(fixed(s.median, 2), 10) + pad(std::to_string(passed), 8);
    out += "\n";
  };
  group_row(report.first_name, report.first, report.first_passed);
  group_row(report.second_name, report.second, report.second_passed);

  out += "\nIndependent samples t-test (" + report.first_name + " - " + report.second_name + ")\n";
  out += pad_right("variances", 12) + pad("t", 10) + pad("df", 10) + pad("p (2-tailed)", 14) + pad("mean diff", 12) +
         pad("std. error", 12) + pad("95% CI lower", 14) + pad("95% CI upper", 14) + "\n";
  auto test_row = [&](const std::string& label, const TTestResult& t) {
    out += pad_right(label, 12) + pad(fixed(t.t, 3), 10) + pad(fixed(t.df, 3), 10) + pad(fixed(t.p_two_tailed, 3), 14) +
           pad(fixed(t.mean_difference, 5), 12) + pad(fixed(t.std_error_difference, 5), 12) +
           pad(fixed(t.ci95.first, 5), 14) + pad(fixed(t.ci95.second, 5), 14) + "\n";
  };
  test_row("equal", report.equal_variances);
  test_row("unequal", report.welch);
  if (!report.has_grades) return out;

  out += "\nGrade histogram\n" + pad_right("range", 10) + pad(report.first_name, 16) + pad(report.second_name, 16) + "\n";
  for (std::size_t i = 0; i < 10; ++i) {
    std::string range = std::to_string(i * 10) + "-" + std::to_string(i == 9 ? 100 : i * 10 + 9);
    out += pad_right(range, 10) + pad(std::to_string(report.first_histogram[i]), 16) +
           pad(std::to_string(report.second_histogram[i]), 16) + "\n";
  }
  return out;
}

}  // namespace tutor::grading
