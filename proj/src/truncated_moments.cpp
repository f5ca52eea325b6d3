#include "normex/truncated_moments.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "normex/parallel.hpp"
#include "normex/rng.hpp"
#include "normex/special.hpp"

namespace normex {

namespace {

constexpr std::uint64_t kTagMcOracle = 0x21;

// integral_a^b t^{-p} dt with the log branch at p = 1.
double power_interval(double p, double a, double b) {
  const double q = 1.0 - p;
  if (std::abs(q) < 1e-9) return std::log(b / a);
  return (std::pow(b, q) - std::pow(a, q)) / q;
}

// Pochhammer-style product: Gamma(alpha + d) / (Gamma(alpha) * m!)
double rising_over_factorial(double alpha, int d, int m) {
  double out = 1.0;
  for (int k = 0; k < d; ++k) out *= alpha + k;
  for (int k = 2; k <= m; ++k) out /= k;
  return out;
}

// P(||X||_inf <= y) for the Clayton pair on the unit-product ray, written to
// avoid cancellation at small y.
double clayton_norm_mass(double alpha, double y) {
  const double first = -std::expm1(-alpha * std::log1p(y));
  const double shrink = std::pow(1.0 + y, -alpha) *
                        std::expm1(-alpha * std::log1p(y / (1.0 + y)));
  return first + shrink;
}

}  // namespace

TruncatedMomentsEvaluator::TruncatedMomentsEvaluator(const FamilyParams& params,
                                                     NormKind norm)
    : params_(params), norm_(norm) {
  params_.validate();
  if (!norm_supported(params_, norm_)) {
    throw std::invalid_argument(
        "truncated_moments: unsupported (family, norm) pair: " +
        family_name(params_.variant) + "/" + norm_name(norm_));
  }
  if (params_.variant == Family::ClaytonParetoLomax &&
      !params_.clayton_unit_product()) {
    throw std::invalid_argument(
        "truncated_moments: clayton closed forms require alpha * theta = 1");
  }
  const double alpha = params_.alpha;
  const int d = params_.d;
  switch (params_.variant) {
    case Family::MvParetoLomax:
      coeff_f_ = rising_over_factorial(alpha, d, d - 1);
      coeff_m1_ = rising_over_factorial(alpha, d, d);
      coeff_m2_off_ = rising_over_factorial(alpha, d, d + 1);
      coeff_m2_diag_ = 2.0 * coeff_m2_off_;
      break;
    case Family::RadialParetoLomax: {
      const double c_d = rising_over_factorial(alpha, d, d);
      coeff_f_ = c_d * d;  // equals rising/(d-1)!
      coeff_m1_ = c_d * (d + 1) / 2.0;
      coeff_m2_diag_ = c_d * (d + 2) / 3.0;
      coeff_m2_off_ = c_d * (d + 2) / 4.0;
      break;
    }
    case Family::IndepParetoLomax:
    case Family::ClaytonParetoLomax:
      break;
  }
}

TruncatedMomentsEvaluator::Raw TruncatedMomentsEvaluator::raw_at(double y) const {
  require(y > 0.0, "truncated_moments: y must be > 0");
  const double alpha = params_.alpha;
  const int d = params_.d;
  Raw raw;
  switch (params_.variant) {
    case Family::MvParetoLomax:
    case Family::RadialParetoLomax: {
      const double nu = alpha + d - 1;
      raw.f = coeff_f_ * trunc_power_integral(nu, d - 1, y);
      raw.m1 = coeff_m1_ * trunc_power_integral(nu, d, y);
      const double t2 = trunc_power_integral(nu, d + 1, y);
      raw.m2_diag = coeff_m2_diag_ * t2;
      raw.m2_off = (d >= 2) ? coeff_m2_off_ * t2 : 0.0;
      break;
    }
    case Family::IndepParetoLomax: {
      // Componentwise independence: everything factorizes through the
      // univariate truncation at y.
      const double f1 = -std::expm1(-alpha * std::log1p(y));
      const double u1 = alpha * trunc_power_integral(alpha, 1, y);
      const double u2 = alpha * trunc_power_integral(alpha, 2, y);
      const double fd = std::pow(f1, d);
      raw.f = fd;
      raw.m1 = fd / f1 * u1;
      raw.m2_diag = fd / f1 * u2;
      raw.m2_off = (d >= 2) ? fd / (f1 * f1) * u1 * u1 : 0.0;
      break;
    }
    case Family::ClaytonParetoLomax: {
      // alpha * theta = 1: the joint law has density
      // alpha (alpha+1) (1 + x1 + x2)^{-(alpha+2)} and the truncation region
      // is the square [0, y]^2; all integrals are elementary.
      const double c = 1.0 + y;
      const double edge = std::pow(1.0 + y, -alpha) - std::pow(1.0 + 2.0 * y, -alpha);
      raw.f = clayton_norm_mass(alpha, y);
      raw.m1 = (power_interval(alpha, 1.0, c) - power_interval(alpha, c, c + y)) -
               y * edge;
      auto slice_second = [&](double base) {
        // integral_0^y s (base + s)^{-alpha} ds
        return power_interval(alpha - 1.0, base, base + y) -
               base * power_interval(alpha, base, base + y);
      };
      raw.m2_diag = 2.0 * (slice_second(1.0) - slice_second(c)) - y * y * edge;
      const double a_block =
          (power_interval(alpha - 1.0, 1.0, c) - power_interval(alpha - 1.0, c, c + y)) /
          (alpha - 1.0);
      const double b_block = y * power_interval(alpha, c, c + y);
      raw.m2_off = a_block - 2.0 * b_block + y * y * std::pow(1.0 + 2.0 * y, -alpha);
      break;
    }
  }
  return raw;
}

TruncatedMoments TruncatedMomentsEvaluator::at(double y) const {
  const Raw raw = raw_at(y);
  if (!(raw.f > 0.0)) {
    throw std::domain_error("truncated_moments: zero mass below y");
  }
  const int d = params_.d;
  TruncatedMoments out;
  out.y = y;
  out.mu = Eigen::VectorXd::Constant(d, raw.m1 / raw.f);
  out.sigma = Eigen::MatrixXd::Zero(d, d);
  const double mean = raw.m1 / raw.f;
  const double var = raw.m2_diag / raw.f - mean * mean;
  double cov = 0.0;
  if (d >= 2 && params_.variant != Family::IndepParetoLomax) {
    cov = raw.m2_off / raw.f - mean * mean;
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      out.sigma(i, j) = (i == j) ? var : cov;
    }
  }
  return out;
}

TruncatedMoments truncated_moments(const FamilyParams& params, NormKind norm,
                                   double y) {
  return TruncatedMomentsEvaluator(params, norm).at(y);
}

void unconditional_moments(const FamilyParams& params, Eigen::VectorXd& mean,
                           Eigen::MatrixXd& cov) {
  params.validate();
  require(params.alpha > 2.0, "unconditional_moments: alpha must be > 2");
  if (params.variant == Family::ClaytonParetoLomax &&
      !params.clayton_unit_product()) {
    throw std::invalid_argument(
        "unconditional_moments: clayton cross moments require alpha * theta = 1");
  }
  const double alpha = params.alpha;
  const int d = params.d;
  double m = 0.0, v = 0.0, c = 0.0;
  switch (params.variant) {
    case Family::MvParetoLomax:
    case Family::ClaytonParetoLomax:
      m = 1.0 / (alpha - 1.0);
      v = alpha / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0));
      c = 1.0 / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0));
      break;
    case Family::IndepParetoLomax:
      m = 1.0 / (alpha - 1.0);
      v = alpha / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0));
      c = 0.0;
      break;
    case Family::RadialParetoLomax: {
      m = (d + 1) / (2.0 * (alpha - 1.0));
      const double raw_diag = (d + 1) * (d + 2) / (3.0 * (alpha - 1.0) * (alpha - 2.0));
      const double raw_off = (d + 1) * (d + 2) / (4.0 * (alpha - 1.0) * (alpha - 2.0));
      v = raw_diag - m * m;
      c = raw_off - m * m;
      break;
    }
  }
  mean = Eigen::VectorXd::Constant(d, m);
  cov = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) cov(i, j) = (i == j) ? v : c;
  }
}

McTruncatedMoments mc_truncated_moments(const FamilyParams& params, NormKind norm,
                                        double y, std::size_t n_mc,
                                        std::uint64_t seed, int threads) {
  params.validate();
  require(y > 0.0, "mc_truncated_moments: y must be > 0");
  require(n_mc >= 10000, "mc_truncated_moments: n_mc must be >= 10^4");

  const std::size_t d = static_cast<std::size_t>(params.d);

  // Fixed-size chunks keep the accumulation order independent of the thread
  // count, so the estimate is bit-reproducible.
  const std::size_t chunk = 8192;
  const std::size_t n_chunks = (n_mc + chunk - 1) / chunk;
  struct Acc {
    std::size_t accepted = 0;
    Eigen::VectorXd s1;
    Eigen::MatrixXd s2;
    Eigen::VectorXd s1sq;    // squares of components, for mu SE
    Eigen::MatrixXd s2sq;    // squares of products, for second-moment SE
  };
  std::vector<Acc> parts(n_chunks);

  parallel_for(0, n_chunks, threads, [&](std::size_t ci) {
    Acc acc;
    acc.s1 = Eigen::VectorXd::Zero(d);
    acc.s2 = Eigen::MatrixXd::Zero(d, d);
    acc.s1sq = Eigen::VectorXd::Zero(d);
    acc.s2sq = Eigen::MatrixXd::Zero(d, d);
    std::vector<double> row(d);
    const std::size_t lo = ci * chunk;
    const std::size_t hi = std::min(n_mc, lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) {
      RandomStream rng(seed, substream(kTagMcOracle, i));
      draw_family_row(params, rng, row);
      if (vector_norm(row, norm) > y) continue;
      acc.accepted += 1;
      for (std::size_t a = 0; a < d; ++a) {
        acc.s1.coeffRef(a) += row[a];
        acc.s1sq.coeffRef(a) += row[a] * row[a];
        for (std::size_t b = 0; b < d; ++b) {
          const double prod = row[a] * row[b];
          acc.s2.coeffRef(a, b) += prod;
          acc.s2sq.coeffRef(a, b) += prod * prod;
        }
      }
    }
    parts[ci] = std::move(acc);
  });

  Acc total;
  total.s1 = Eigen::VectorXd::Zero(d);
  total.s2 = Eigen::MatrixXd::Zero(d, d);
  total.s1sq = Eigen::VectorXd::Zero(d);
  total.s2sq = Eigen::MatrixXd::Zero(d, d);
  for (const Acc& p : parts) {
    total.accepted += p.accepted;
    total.s1 += p.s1;
    total.s2 += p.s2;
    total.s1sq += p.s1sq;
    total.s2sq += p.s2sq;
  }

  const double rate = static_cast<double>(total.accepted) / static_cast<double>(n_mc);
  if (rate < 1e-4) {
    throw std::runtime_error("mc_truncated_moments: acceptance rate below 1e-4");
  }

  const double m = static_cast<double>(total.accepted);
  McTruncatedMoments out;
  out.y = y;
  out.draws = n_mc;
  out.accepted = total.accepted;
  out.mu = total.s1 / m;
  out.mu_se = Eigen::VectorXd::Zero(d);
  out.second_raw = total.s2 / m;
  out.second_raw_se = Eigen::MatrixXd::Zero(d, d);
  out.sigma = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    const double var_a = std::max(0.0, total.s1sq(a) / m - out.mu(a) * out.mu(a));
    out.mu_se(a) = std::sqrt(var_a / m);
    for (std::size_t b = 0; b < d; ++b) {
      const double var_ab = std::max(
          0.0, total.s2sq(a, b) / m - out.second_raw(a, b) * out.second_raw(a, b));
      out.second_raw_se(a, b) = std::sqrt(var_ab / m);
      out.sigma(a, b) = out.second_raw(a, b) - out.mu(a) * out.mu(b);
    }
  }
  return out;
}

}  // namespace normex
