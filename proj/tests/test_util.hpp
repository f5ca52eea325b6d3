#ifndef NORMEX_TEST_UTIL_HPP
#define NORMEX_TEST_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "normex/common.hpp"

namespace testutil {

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double variance(const std::vector<double>& xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double standard_error(const std::vector<double>& xs) {
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

inline std::vector<double> column(const normex::SampleMatrix& m, std::size_t j) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, j);
  return out;
}

/// One-sample Kolmogorov-Smirnov statistic against a cdf.
inline double ks_one_sample(std::vector<double> xs,
                            const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic by sorted merge.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] <= b[ib]) ++ia;
    else ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na -
                             static_cast<double>(ib) / nb));
  }
  return d;
}

/// Asymptotic two-sample KS critical value; c = 1.628 at the 1% level.
inline double ks_two_sample_critical(std::size_t m, std::size_t n,
                                     double c = 1.628) {
  return c * std::sqrt((static_cast<double>(m) + static_cast<double>(n)) /
                       (static_cast<double>(m) * static_cast<double>(n)));
}

inline double ks_one_sample_critical(std::size_t n, double c = 1.628) {
  return c / std::sqrt(static_cast<double>(n));
}

/// Composite Simpson quadrature with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int panels) {
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) {
    s += f(a + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
  }
  return s * h / 3.0;
}

inline double sample_correlation(const std::vector<double>& xs,
                                 const std::vector<double>& ys) {
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace testutil

#endif  // NORMEX_TEST_UTIL_HPP
