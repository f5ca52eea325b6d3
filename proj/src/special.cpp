#include "normex/special.hpp"

#include <cmath>
#include <stdexcept>

namespace normex {

double binom(double nu, int k) {
  double out = 1.0;
  for (int j = 0; j < k; ++j) out *= (nu - j) / (j + 1);
  return out;
}

namespace {

// Power series around y = 0: sum_m (-1)^m binom(nu+m, m) y^{K+1+m} / (K+1+m).
// Converges for y < 1; used below the switch point where the finite
// expansion would cancel.
double series_small_y(double nu, int K, double y) {
  double coeff = 1.0;  // binom(nu+m, m), starts at m = 0
  double ypow = std::pow(y, K + 1);
  double sum = 0.0;
  for (int m = 0; m < 400; ++m) {
    const double term = coeff * ypow / (K + 1 + m);
    sum += (m % 2 == 0) ? term : -term;
    if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-320) break;
    coeff *= (nu + m + 1) / (m + 1);
    ypow *= y;
  }
  return sum;
}

// integral_1^{1+y} t^{-p} dt, with the log branch at p = 1.
double power_primitive(double p, double y) {
  const double q = 1.0 - p;
  if (std::abs(q) < 1e-9) return std::log1p(y);
  return (std::pow(1.0 + y, q) - 1.0) / q;
}

// Exact finite expansion: substitute t = 1 + s and expand (t-1)^K.
double finite_expansion(double nu, int K, double y) {
  double sum = 0.0;
  for (int j = 0; j <= K; ++j) {
    const double c = binom(static_cast<double>(K), j);
    const double term = c * power_primitive(nu + 1 - j, y);
    sum += ((K - j) % 2 == 0) ? term : -term;
  }
  return sum;
}

}  // namespace

double trunc_power_integral(double nu, int K, double y) {
  if (K < 0) throw std::invalid_argument("trunc_power_integral: K must be >= 0");
  if (!(y >= 0.0)) throw std::invalid_argument("trunc_power_integral: y must be >= 0");
  if (y == 0.0) return 0.0;
  if (y < 0.75) return series_small_y(nu, K, y);
  return finite_expansion(nu, K, y);
}

}  // namespace normex
