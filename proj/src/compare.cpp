#include "normex/compare.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "normex/parallel.hpp"
#include "normex/rng.hpp"

namespace normex {

QQTable qq_table(const SampleMatrix& ref, const SampleMatrix& cmp,
                 const std::vector<Level>& levels,
                 const GqSolverOptions& options, int threads) {
  require(ref.cols() == cmp.cols(), "qq_table: dimension mismatch");
  require(!ref.empty() && !cmp.empty(), "qq_table: empty sample");
  require(!levels.empty(), "qq_table: no levels");
  const int d = static_cast<int>(ref.cols());

  std::vector<GeoQuantile> ref_q(levels.size());
  std::vector<GeoQuantile> cmp_q(levels.size());
  std::atomic<std::uint64_t> ref_bad{0};
  std::atomic<std::uint64_t> cmp_bad{0};
  parallel_for(0, levels.size(), threads, [&](std::size_t i) {
    ref_q[i] = solve_gq(ref, levels[i].u, options);
    cmp_q[i] = solve_gq(cmp, levels[i].u, options);
    if (!ref_q[i].converged) ref_bad.fetch_add(1);
    if (!cmp_q[i].converged) cmp_bad.fetch_add(1);
  });

  QQTable table;
  table.d = d;
  table.ref_nonconverged = ref_bad.load();
  table.cmp_nonconverged = cmp_bad.load();
  table.rows.reserve(levels.size() * d);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (int c = 0; c < d; ++c) {
      QQRow row;
      row.level_index = levels[i].index;
      row.level_norm = levels[i].length;
      row.extreme = levels[i].extreme;
      row.component = c;
      row.q_ref = ref_q[i].q(c);
      row.q_cmp = cmp_q[i].q(c);
      table.rows.push_back(row);
    }
  }
  return table;
}

namespace {

void accumulate(Deviation& dev, double diff, double ref) {
  const double a = std::abs(diff);
  dev.max_abs = std::max(dev.max_abs, a);
  dev.mean_abs += a;
  const double denom = std::max(std::abs(ref), 1e-12);
  dev.max_rel = std::max(dev.max_rel, a / denom);
  dev.rows += 1;
}

void finalize(Deviation& dev) {
  if (dev.rows > 0) dev.mean_abs /= static_cast<double>(dev.rows);
}

}  // namespace

DeviationSplit line_deviation(const QQTable& table) {
  require(!table.rows.empty(), "line_deviation: empty table");
  DeviationSplit split;
  for (const QQRow& row : table.rows) {
    const double diff = row.q_cmp - row.q_ref;
    accumulate(split.all, diff, row.q_ref);
    accumulate(row.extreme ? split.extreme : split.body, diff, row.q_ref);
  }
  finalize(split.all);
  finalize(split.body);
  finalize(split.extreme);
  return split;
}

namespace {

// Empirical joint-cdf counts of `sample` at every grid corner, exact at the
// thresholds. Coordinates are first bucketed by how many grid values lie
// strictly below them; corner (j_1, ..., j_d) then counts the rows whose
// bucket indices are all <= j_k, obtained by a d-dimensional prefix sum.
std::vector<double> corner_cdf(const SampleMatrix& sample,
                               const std::vector<std::vector<double>>& grid) {
  const std::size_t d = sample.cols();
  std::size_t cells = 1;
  std::vector<std::size_t> stride(d);
  std::vector<std::size_t> width(d);
  for (std::size_t k = 0; k < d; ++k) {
    width[k] = grid[k].size() + 1;
    stride[k] = cells;
    cells *= width[k];
  }
  std::vector<double> hist(cells, 0.0);
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    auto row = sample.row(i);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const auto& g = grid[k];
      const std::size_t bucket =
          std::lower_bound(g.begin(), g.end(), row[k]) - g.begin();
      offset += bucket * stride[k];
    }
    hist[offset] += 1.0;
  }
  // Prefix sums along each axis turn cell counts into cumulative counts.
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t idx = 0; idx < cells; ++idx) {
      const std::size_t coord = (idx / stride[k]) % width[k];
      if (coord > 0) hist[idx] += hist[idx - stride[k]];
    }
  }
  const double n = static_cast<double>(sample.rows());
  for (double& v : hist) v /= n;
  return hist;
}

std::vector<double> pooled_column(const SampleMatrix& a, const SampleMatrix& b,
                                  std::size_t k) {
  std::vector<double> values;
  values.reserve(a.rows() + b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) values.push_back(a(i, k));
  for (std::size_t i = 0; i < b.rows(); ++i) values.push_back(b(i, k));
  std::sort(values.begin(), values.end());
  return values;
}

}  // namespace

double orthant_sup_distance(const SampleMatrix& a, const SampleMatrix& b,
                            int grid_per_dim) {
  require(a.cols() == b.cols(), "orthant_sup_distance: dimension mismatch");
  require(!a.empty() && !b.empty(), "orthant_sup_distance: empty sample");
  require(grid_per_dim >= 2, "orthant_sup_distance: grid_per_dim must be >= 2");
  const std::size_t d = a.cols();

  std::vector<std::vector<double>> grid(d);
  const std::size_t pooled_size = a.rows() + b.rows();
  if (d == 1 && static_cast<std::size_t>(grid_per_dim) >= pooled_size) {
    grid[0] = pooled_column(a, b, 0);
  } else {
    for (std::size_t k = 0; k < d; ++k) {
      const std::vector<double> pooled = pooled_column(a, b, k);
      std::vector<double> corners;
      corners.reserve(grid_per_dim);
      for (int g = 0; g < grid_per_dim; ++g) {
        const double level =
            0.01 + (0.99 - 0.01) * static_cast<double>(g) /
                       static_cast<double>(grid_per_dim - 1);
        const std::size_t rank = std::min(
            pooled.size() - 1,
            static_cast<std::size_t>(level * static_cast<double>(pooled.size())));
        corners.push_back(pooled[rank]);
      }
      corners.erase(std::unique(corners.begin(), corners.end()), corners.end());
      grid[k] = std::move(corners);
    }
  }

  const std::vector<double> cdf_a = corner_cdf(a, grid);
  const std::vector<double> cdf_b = corner_cdf(b, grid);
  double sup = 0.0;
  for (std::size_t i = 0; i < cdf_a.size(); ++i) {
    sup = std::max(sup, std::abs(cdf_a[i] - cdf_b[i]));
  }
  return sup;
}

void fit_loglog_slope(const std::vector<RatePoint>& points, double& slope,
                      double& slope_se) {
  require(points.size() >= 3, "fit_loglog_slope: need at least 3 points");
  const std::size_t m = points.size();
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = std::log(static_cast<double>(points[i].n));
    ys[i] = std::log(std::max(points[i].distance, 1e-300));
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    rss += r * r;
  }
  slope_se = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
}

RateReport rate_experiment(const FamilyParams& family, NormKind norm,
                           const std::vector<Method>& methods,
                           const std::vector<std::uint64_t>& n_list,
                           std::size_t count, std::uint64_t seed, int threads,
                           int grid_per_dim) {
  family.validate();
  require(family.alpha > 2.0 && family.alpha < 3.0,
          "rate_experiment: alpha must lie in (2, 3)");
  require(n_list.size() >= 3, "rate_experiment: need at least 3 values of n");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    require(n_list[i] > n_list[i - 1], "rate_experiment: n_list must increase");
  }
  require(static_cast<double>(n_list.back()) >=
              10.0 * static_cast<double>(n_list.front()),
          "rate_experiment: n_list must span at least one decade");
  require(count >= 1000, "rate_experiment: count too small");

  // Per-(n, role) seeds keep every sample independent but reproducible.
  auto derived_seed = [&](std::uint64_t n, std::uint64_t role) {
    return RandomStream(seed, substream(role, n)).next_u64();
  };

  const bool exact_ks = family.d == 1;
  const int grid = exact_ks ? static_cast<int>(2 * count + 1) : grid_per_dim;

  RateReport report;
  report.count = count;
  report.grid_per_dim = grid;
  report.null_series.method = Method::DirectSum;
  for (Method m : methods) {
    RateSeries series;
    series.method = m;
    report.series.push_back(series);
  }

  for (std::uint64_t n : n_list) {
    NormexConfig base;
    base.family = family;
    base.norm = norm;
    base.n = n;
    base.count = count;
    base.threads = threads;

    NormexConfig ref_cfg = base;
    ref_cfg.seed = derived_seed(n, 0xA1);
    const SumSample ref = sample_sum(ref_cfg);

    NormexConfig null_cfg = base;
    null_cfg.seed = derived_seed(n, 0xA2);
    const SumSample null_sum = sample_sum(null_cfg);
    report.null_series.points.push_back(
        {n, orthant_sup_distance(ref.sample, null_sum.sample, grid)});

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      NormexConfig cfg = base;
      cfg.method = methods[mi];
      cfg.seed = derived_seed(n, 0xB0 + mi);
      const SumSample approx = sample_method(cfg);
      report.series[mi].points.push_back(
          {n, orthant_sup_distance(ref.sample, approx.sample, grid)});
    }
  }

  fit_loglog_slope(report.null_series.points, report.null_series.slope,
                   report.null_series.slope_se);
  for (RateSeries& series : report.series) {
    fit_loglog_slope(series.points, series.slope, series.slope_se);
  }
  return report;
}

}  // namespace normex
