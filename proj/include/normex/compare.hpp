#ifndef NORMEX_COMPARE_HPP
#define NORMEX_COMPARE_HPP

#include <cstdint>
#include <vector>

#include "normex/engine.hpp"
#include "normex/geoquantile.hpp"

namespace normex {

struct QQRow {
  int level_index = 0;
  double level_norm = 0.0;
  bool extreme = false;
  int component = 0;
  double q_ref = 0.0;
  double q_cmp = 0.0;
};

struct QQTable {
  std::vector<QQRow> rows;
  int d = 0;
  std::uint64_t ref_nonconverged = 0;
  std::uint64_t cmp_nonconverged = 0;
};

/// Solves the geometric quantiles of both samples at every level and pairs
/// them componentwise.
QQTable qq_table(const SampleMatrix& ref, const SampleMatrix& cmp,
                 const std::vector<Level>& levels,
                 const GqSolverOptions& options = {}, int threads = 1);

struct Deviation {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  double max_rel = 0.0;
  std::size_t rows = 0;
};

/// |q_cmp - q_ref| aggregated over the whole table and split by the
/// extreme-level flag.
struct DeviationSplit {
  Deviation all;
  Deviation body;
  Deviation extreme;
};

DeviationSplit line_deviation(const QQTable& table);

// Largest gap between the empirical joint cdfs of A and B over lower-left
// orthant corners. Corners sit at marginal quantiles of the pooled sample
// (levels 1%..99%); for d = 1 with grid_per_dim >= pooled size the grid is
// the pooled sample itself and the value equals the two-sample KS statistic.
double orthant_sup_distance(const SampleMatrix& a, const SampleMatrix& b,
                            int grid_per_dim);

struct RatePoint {
  std::uint64_t n = 0;
  double distance = 0.0;
};

struct RateSeries {
  Method method = Method::DirectSum;
  std::vector<RatePoint> points;
  double slope = 0.0;
  double slope_se = 0.0;
};

/// Distances to the direct-sum reference across n, with fitted log-log
/// slopes. The null series (an independent direct-sum sample against the
/// same reference) tracks the Monte Carlo noise floor and is always present.
struct RateReport {
  std::vector<RateSeries> series;
  RateSeries null_series;
  std::size_t count = 0;
  int grid_per_dim = 0;
};

RateReport rate_experiment(const FamilyParams& family, NormKind norm,
                           const std::vector<Method>& methods,
                           const std::vector<std::uint64_t>& n_list,
                           std::size_t count, std::uint64_t seed,
                           int threads = 1, int grid_per_dim = 64);

/// Ordinary least squares slope of log(distance) on log(n) with its
/// standard error.
void fit_loglog_slope(const std::vector<RatePoint>& points, double& slope,
                      double& slope_se);

}  // namespace normex

#endif  // NORMEX_COMPARE_HPP
