#pragma once

#include <cmath>
#include <numbers>

namespace testutil {

inline double t_density(double x, double df) {
  const double logc = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) -
                      0.5 * std::log(df * std::numbers::pi);
  return std::exp(logc - (df + 1) / 2 * std::log1p(x * x / df));
}

// Two-sided tail mass by composite Simpson over [0, |t|].
inline double t_two_sided_by_quadrature(double t, double df, int intervals = 200000) {
  const double a = 0.0, b = std::abs(t);
  const double h = (b - a) / intervals;
  double s = t_density(a, df) + t_density(b, df);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * t_density(a + i * h, df);
  return 1.0 - 2.0 * s * h / 3.0;
}

// Accuracy reported as 100 (N - FN) / N.
inline double accuracy_pct(int n, int fn) { return 100.0 * (n - fn) / n; }

}  // namespace testutil
