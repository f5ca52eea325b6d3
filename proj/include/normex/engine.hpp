#ifndef NORMEX_ENGINE_HPP
#define NORMEX_ENGINE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "normex/families.hpp"
#include "normex/truncated_moments.hpp"

namespace normex {

enum class Method { DirectSum, CLT, DNormex, MRVNormex };

std::string method_name(Method method);

struct NormexConfig {
  FamilyParams family;
  NormKind norm = NormKind::L1;
  std::uint64_t n = 52;      // number of summands
  std::size_t count = 1;     // output sample size
  std::uint64_t seed = 1;
  Method method = Method::DirectSum;
  double y_floor = 1e-8;     // minimum admissible conditioning norm
  bool b_n_zero = false;     // ablation: b_n = 0 instead of -1
  bool keep_conditioning = false;  // record the per-row conditioning norm y
  int threads = 1;

  void validate() const;
};

struct SumSampleMeta {
  Method method = Method::DirectSum;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  std::size_t count = 0;
  double a_n = std::numeric_limits<double>::quiet_NaN();
  double b_n = std::numeric_limits<double>::quiet_NaN();
  double y_floor = 0.0;
  std::uint64_t y_floor_hits = 0;       // conditioning values rejected as too small
  std::uint64_t resampled_rows = 0;     // rows regenerated from scratch
  std::uint64_t jitter_events = 0;      // covariance factorizations that needed jitter
  std::uint64_t factorization_failures = 0;  // failures that persisted after jitter
  std::vector<double> y_values;         // filled when keep_conditioning is set
};

struct SumSample {
  SampleMatrix sample;
  SumSampleMeta meta;
};

/// Exact sums of n fresh iid family draws; ground truth for all comparisons.
SumSample sample_sum(const NormexConfig& config);

/// Gaussian surrogate with mean n * mean(X) and covariance n * cov(X).
/// Refused when alpha <= 2 (no finite variance).
SumSample sample_clt(const NormexConfig& config);

/// Per row: the norm-largest of n family draws plus an independent Gaussian
/// with the truncated moments at the observed maximum norm.
SumSample sample_d_normex(const NormexConfig& config);

/// Per row: angular draw times a rescaled Frechet norm, plus the conditional
/// Gaussian at that norm.
SumSample sample_mrv_normex(const NormexConfig& config);

SumSample sample_method(const NormexConfig& config);

/// Index of the row with the largest norm; ties broken by the lowest index.
std::size_t max_norm_row(const SampleMatrix& sample, NormKind norm);

/// One Gaussian draw with mean (n-1) mu(y) and covariance (n-1) Sigma(y).
Eigen::VectorXd conditional_gaussian(double y, std::uint64_t n,
                                     const FamilyParams& params, NormKind norm,
                                     std::uint64_t seed);

}  // namespace normex

#endif  // NORMEX_ENGINE_HPP
