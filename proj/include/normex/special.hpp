#ifndef NORMEX_SPECIAL_HPP
#define NORMEX_SPECIAL_HPP

namespace normex {

/// Generalized binomial coefficient binom(nu, k) = nu (nu-1) ... (nu-k+1) / k!
double binom(double nu, int k);

// Partial moment of the shifted power law:
//
//   trunc_power_integral(nu, K, y) = integral_0^y s^K (1 + s)^{-(nu+1)} ds
//
// for integer K >= 0, real nu, y >= 0. All closed-form truncated moments of
// the Pareto-Lomax type families reduce to this kernel. Evaluation switches
// between a small-y power series and the exact finite expansion so that the
// result keeps close to full double precision on the whole y range.
double trunc_power_integral(double nu, int K, double y);

}  // namespace normex

#endif  // NORMEX_SPECIAL_HPP
