#include "eegloc/evaluation.hpp"

#include "eegloc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace eegloc {
namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_same_labels(const std::set<std::string>& a, const std::set<std::string>& b,
                       const char* stage) {
  if (a == b) return;
  std::string diff;
  for (const auto& l : a)
    if (!b.count(l)) diff += (diff.empty() ? "" : ", ") + l;
  for (const auto& l : b)
    if (!a.count(l)) diff += (diff.empty() ? "" : ", ") + l;
  throw Error(Errc::LabelMismatch, stage, "labels differ: " + diff);
}

// Continued fraction for the incomplete beta, evaluated with the modified
// Lentz method.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  const double ab = a + b, a1 = a + 1.0, am1 = a - 1.0;
  double c = 1.0;
  double d = 1.0 - ab * x / a1;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((am1 + m2) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + num / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (ab + m) * x / ((a + m2) * (a1 + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + num / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double step = d * c;
    h *= step;
    if (std::abs(step - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

PositionErrors position_errors(const LabeledPoints& detected, const LabeledPoints& truth) {
  const char* stage = "position_errors";
  std::map<std::string, WorldPoint> det, gt;
  for (const auto& p : detected)
    if (!det.emplace(p.label, p.position).second)
      throw Error(Errc::DuplicateLabel, stage, "detected label '" + p.label + "' repeated");
  for (const auto& p : truth)
    if (!gt.emplace(p.label, p.position).second)
      throw Error(Errc::DuplicateLabel, stage, "truth label '" + p.label + "' repeated");
  std::set<std::string> a, b;
  for (const auto& [l, _] : det) a.insert(l);
  for (const auto& [l, _] : gt) b.insert(l);
  check_same_labels(a, b, stage);
  PositionErrors out;
  for (const auto& [label, p] : det) out[label] = (p - gt.at(label)).norm();
  return out;
}

DetectionReport detection_stats(const PositionErrors& pe, double threshold_mm) {
  if (pe.empty()) throw Error(Errc::EmptyInput, "detection_stats", "no position errors");
  if (!(threshold_mm > 0.0)) {
    throw Error(Errc::InvalidArgument, "detection_stats", "threshold_mm must be > 0");
  }
  DetectionReport r;
  r.per_label_pe_mm = pe;
  r.threshold_mm = threshold_mm;
  r.n_channels = static_cast<int>(pe.size());
  std::vector<double> values;
  for (const auto& [_, v] : pe) {
    values.push_back(v);
    if (v >= threshold_mm) ++r.fn_count;
  }
  r.fp_count = r.fn_count;
  r.accuracy_pct = 100.0 * (r.n_channels - r.fn_count) / r.n_channels;
  r.mean_pe_mm = mean(values);
  r.median_pe_mm = median(values);
  r.max_pe_mm = *std::max_element(values.begin(), values.end());
  return r;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(Errc::InvalidArgument, "incomplete_beta", "need a, b > 0 and x in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw Error(Errc::InvalidArgument, "student_t_cdf", "df must be > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  const char* stage = "paired_t_test";
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(Errc::LengthMismatch, stage,
                "need two equally long samples of size >= 2 (got " + std::to_string(a.size()) +
                    " and " + std::to_string(b.size()) + ")");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  if (std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; })) {
    throw Error(Errc::ZeroVariance, stage, "all paired differences are equal");
  }
  const double n = static_cast<double>(d.size());
  const double m = mean(d);
  double ss = 0.0;
  for (double v : d) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / (n - 1.0));
  TTestResult r;
  r.df = static_cast<int>(d.size()) - 1;
  r.t = m / (sd / std::sqrt(n));
  r.p_two_sided = incomplete_beta(0.5 * r.df, 0.5, r.df / (r.df + r.t * r.t));
  return r;
}

MethodComparison compare_methods(const PositionErrors& a, const PositionErrors& b, double alpha) {
  const char* stage = "compare_methods";
  std::set<std::string> la, lb;
  for (const auto& [l, _] : a) la.insert(l);
  for (const auto& [l, _] : b) lb.insert(l);
  check_same_labels(la, lb, stage);
  if (a.empty()) throw Error(Errc::EmptyInput, stage, "no labels to compare");

  std::vector<double> va, vb;
  MethodComparison c;
  for (const auto& [label, pe] : a) {
    va.push_back(pe);
    vb.push_back(b.at(label));
    c.delta_mm[label] = b.at(label) - pe;
  }
  c.mean_a_mm = mean(va);
  c.mean_b_mm = mean(vb);
  c.median_a_mm = median(va);
  c.median_b_mm = median(vb);
  c.mean_delta_mm = c.mean_b_mm - c.mean_a_mm;
  try {
    c.ttest = paired_t_test(va, vb);
  } catch (const Error& e) {
    if (e.code() != Errc::ZeroVariance) throw;
    const double d = va[0] - vb[0];
    c.ttest.df = static_cast<int>(va.size()) - 1;
    if (d == 0.0) {
      c.ttest.t = 0.0;
      c.ttest.p_two_sided = 1.0;
    } else {
      c.ttest.t = d < 0 ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
      c.ttest.p_two_sided = 0.0;
    }
  }
  if (c.ttest.p_two_sided < alpha && c.ttest.t != 0.0) {
    c.verdict = c.ttest.t < 0 ? "a_better" : "b_better";
  } else {
    c.verdict = "no_difference";
  }
  return c;
}

nlohmann::json report_to_json(const DetectionReport& r) {
  return nlohmann::json{{"per_label_pe_mm", r.per_label_pe_mm},
                        {"fn_count", r.fn_count},
                        {"fp_count", r.fp_count},
                        {"accuracy_pct", r.accuracy_pct},
                        {"mean_pe_mm", r.mean_pe_mm},
                        {"median_pe_mm", r.median_pe_mm},
                        {"max_pe_mm", r.max_pe_mm},
                        {"n_channels", r.n_channels},
                        {"threshold_mm", r.threshold_mm}};
}

DetectionReport report_from_json(const nlohmann::json& j) {
  DetectionReport r;
  try {
    r.per_label_pe_mm = j.at("per_label_pe_mm").get<PositionErrors>();
    r.fn_count = j.at("fn_count").get<int>();
    r.fp_count = j.at("fp_count").get<int>();
    r.accuracy_pct = j.at("accuracy_pct").get<double>();
    r.mean_pe_mm = j.at("mean_pe_mm").get<double>();
    r.median_pe_mm = j.at("median_pe_mm").get<double>();
    r.max_pe_mm = j.at("max_pe_mm").get<double>();
    r.n_channels = j.at("n_channels").get<int>();
    r.threshold_mm = j.at("threshold_mm").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, "report", e.what());
  }
  return r;
}

nlohmann::json comparison_to_json(const MethodComparison& c) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  return nlohmann::json{{"mean_a_mm", c.mean_a_mm},
                        {"mean_b_mm", c.mean_b_mm},
                        {"median_a_mm", c.median_a_mm},
                        {"median_b_mm", c.median_b_mm},
                        {"mean_delta_mm", c.mean_delta_mm},
                        {"delta_mm", c.delta_mm},
                        {"t", num(c.ttest.t)},
                        {"df", c.ttest.df},
                        {"p_two_sided", c.ttest.p_two_sided},
                        {"verdict", c.verdict}};
}

}  // namespace eegloc
