#pragma once

#include "eegloc/points.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace eegloc {

/// Per-label Euclidean position error in mm.
using PositionErrors = std::map<std::string, double>;

struct DetectionReport {
  PositionErrors per_label_pe_mm;
  int fn_count = 0;
  int fp_count = 0;
  double accuracy_pct = 0.0;
  double mean_pe_mm = 0.0;
  double median_pe_mm = 0.0;
  double max_pe_mm = 0.0;
  int n_channels = 0;
  double threshold_mm = 10.0;
};

/// Label sets must match exactly; LabelMismatch lists the differences.
PositionErrors position_errors(const LabeledPoints& detected, const LabeledPoints& truth);

/// An electrode fails when PE >= threshold_mm. Every failure is both a
/// missed true electrode and a spurious report, so FN = FP.
DetectionReport detection_stats(const PositionErrors& pe, double threshold_mm = 10.0);

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p_two_sided = 1.0;
};

/// Regularised incomplete beta I_x(a, b) (continued fraction).
double incomplete_beta(double a, double b, double x);

/// Student-t CDF with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Paired t-test on a - b.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct MethodComparison {
  double mean_a_mm = 0.0;
  double mean_b_mm = 0.0;
  double median_a_mm = 0.0;
  double median_b_mm = 0.0;
  double mean_delta_mm = 0.0;  // mean of (b - a)
  PositionErrors delta_mm;     // b - a per label
  TTestResult ttest;           // on a - b
  std::string verdict;         // "a_better", "b_better", "no_difference"
};

/// Compares two error maps label by label (a = UTE pipeline, b = baseline).
/// When every paired difference is identical the t statistic is infinite
/// (p = 0), or zero with p = 1 when the difference is zero.
MethodComparison compare_methods(const PositionErrors& a, const PositionErrors& b,
                                 double alpha = 0.05);

nlohmann::json report_to_json(const DetectionReport& r);
DetectionReport report_from_json(const nlohmann::json& j);
nlohmann::json comparison_to_json(const MethodComparison& c);

}  // namespace eegloc
