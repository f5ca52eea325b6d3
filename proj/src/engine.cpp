#include "normex/engine.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "normex/parallel.hpp"
#include "normex/rng.hpp"

namespace normex {

namespace {

constexpr std::uint64_t kTagSumRow = 0x31;
constexpr std::uint64_t kTagCltRow = 0x32;
constexpr std::uint64_t kTagDNormexRow = 0x33;
constexpr std::uint64_t kTagMrvRow = 0x34;
constexpr std::uint64_t kTagConditional = 0x35;

constexpr int kMaxRowAttempts = 10000;

struct Counters {
  std::atomic<std::uint64_t> y_floor_hits{0};
  std::atomic<std::uint64_t> resampled_rows{0};
  std::atomic<std::uint64_t> jitter_events{0};
  std::atomic<std::uint64_t> factorization_failures{0};

  void store_into(SumSampleMeta& meta) const {
    meta.y_floor_hits = y_floor_hits.load();
    meta.resampled_rows = resampled_rows.load();
    meta.jitter_events = jitter_events.load();
    meta.factorization_failures = factorization_failures.load();
  }
};

// Cholesky factor with one jitter retry. Returns false when the matrix stays
// indefinite even after jitter; the caller decides whether to resample.
bool robust_cholesky(const Eigen::MatrixXd& sigma, Eigen::MatrixXd& chol,
                     Counters* counters) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) {
    chol = llt.matrixL();
    return true;
  }
  if (counters != nullptr) counters->jitter_events.fetch_add(1);
  const double jitter = 1e-12 * sigma.trace();
  Eigen::MatrixXd bumped = sigma;
  bumped.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> retry(bumped);
  if (retry.info() == Eigen::Success) {
    chol = retry.matrixL();
    return true;
  }
  if (counters != nullptr) counters->factorization_failures.fetch_add(1);
  return false;
}

SumSampleMeta make_meta(const NormexConfig& config, Method method) {
  SumSampleMeta meta;
  meta.method = method;
  meta.seed = config.seed;
  meta.n = config.n;
  meta.count = config.count;
  meta.y_floor = config.y_floor;
  return meta;
}

void draw_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol,
                   RandomStream& rng, std::span<double> out) {
  const int d = static_cast<int>(mean.size());
  Eigen::VectorXd z(d);
  for (int k = 0; k < d; ++k) z(k) = rng.normal();
  const Eigen::VectorXd x = mean + chol * z;
  for (int k = 0; k < d; ++k) out[k] = x(k);
}

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::DirectSum: return "direct_sum";
    case Method::CLT: return "clt";
    case Method::DNormex: return "d_normex";
    case Method::MRVNormex: return "mrv_normex";
  }
  return "unknown";
}

void NormexConfig::validate() const {
  family.validate();
  require(count >= 1, "config: count must be >= 1");
  require(y_floor > 0.0, "config: y_floor must be > 0");
  require(threads >= 1, "config: threads must be >= 1");
  if (method == Method::DirectSum) {
    require(n >= 1, "config: n must be >= 1");
    return;
  }
  require(n >= 2, "config: n must be >= 2 for hybrid and Gaussian methods");
  if (method == Method::CLT) {
    if (!(family.alpha > 2.0)) {
      throw std::invalid_argument("CLT requires finite variance (alpha > 2)");
    }
    return;
  }
  // Hybrid methods need the truncated-moment closed forms.
  TruncatedMomentsEvaluator probe(family, norm);
  if (method == Method::MRVNormex) {
    if (!theta_supported(family, norm)) {
      throw std::invalid_argument(
          "config: no angular law for this (family, norm) pair");
    }
  }
}

SumSample sample_sum(const NormexConfig& config) {
  NormexConfig cfg = config;
  cfg.method = Method::DirectSum;
  cfg.validate();
  const std::size_t d = static_cast<std::size_t>(cfg.family.d);
  SumSample out;
  out.sample = SampleMatrix(cfg.count, d);
  out.meta = make_meta(cfg, Method::DirectSum);
  parallel_for(0, cfg.count, cfg.threads, [&](std::size_t i) {
    RandomStream rng(cfg.seed, substream(kTagSumRow, i));
    std::vector<double> draw(d);
    auto row = out.sample.row(i);
    for (std::uint64_t k = 0; k < cfg.n; ++k) {
      draw_family_row(cfg.family, rng, draw);
      for (std::size_t j = 0; j < d; ++j) row[j] += draw[j];
    }
  });
  return out;
}

SumSample sample_clt(const NormexConfig& config) {
  NormexConfig cfg = config;
  cfg.method = Method::CLT;
  cfg.validate();
  const std::size_t d = static_cast<std::size_t>(cfg.family.d);

  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  unconditional_moments(cfg.family, mean, cov);
  const Eigen::VectorXd sum_mean = static_cast<double>(cfg.n) * mean;
  const Eigen::MatrixXd sum_cov = static_cast<double>(cfg.n) * cov;

  Eigen::MatrixXd chol;
  if (!robust_cholesky(sum_cov, chol, nullptr)) {
    throw std::runtime_error("sample_clt: covariance factorization failed");
  }

  SumSample out;
  out.sample = SampleMatrix(cfg.count, d);
  out.meta = make_meta(cfg, Method::CLT);
  parallel_for(0, cfg.count, cfg.threads, [&](std::size_t i) {
    RandomStream rng(cfg.seed, substream(kTagCltRow, i));
    draw_gaussian(sum_mean, chol, rng, out.sample.row(i));
  });
  return out;
}

std::size_t max_norm_row(const SampleMatrix& sample, NormKind norm) {
  require(sample.rows() >= 1, "max_norm_row: empty sample");
  std::size_t best = 0;
  double best_norm = vector_norm(sample.row(0), norm);
  for (std::size_t i = 1; i < sample.rows(); ++i) {
    const double v = vector_norm(sample.row(i), norm);
    if (v > best_norm) {
      best_norm = v;
      best = i;
    }
  }
  return best;
}

SumSample sample_d_normex(const NormexConfig& config) {
  NormexConfig cfg = config;
  cfg.method = Method::DNormex;
  cfg.validate();
  const std::size_t d = static_cast<std::size_t>(cfg.family.d);
  const TruncatedMomentsEvaluator moments(cfg.family, cfg.norm);
  const double gauss_scale = static_cast<double>(cfg.n - 1);

  SumSample out;
  out.sample = SampleMatrix(cfg.count, d);
  out.meta = make_meta(cfg, Method::DNormex);
  if (cfg.keep_conditioning) out.meta.y_values.resize(cfg.count);
  Counters counters;

  parallel_for(0, cfg.count, cfg.threads, [&](std::size_t i) {
    RandomStream rng(cfg.seed, substream(kTagDNormexRow, i));
    std::vector<double> draw(d);
    std::vector<double> max_draw(d);
    for (int attempt = 0; attempt < kMaxRowAttempts; ++attempt) {
      // Largest of n draws by norm; ties resolved to the earliest draw by
      // the strict comparison.
      double y = -1.0;
      for (std::uint64_t k = 0; k < cfg.n; ++k) {
        draw_family_row(cfg.family, rng, draw);
        const double v = vector_norm(draw, cfg.norm);
        if (v > y) {
          y = v;
          max_draw = draw;
        }
      }
      if (y < cfg.y_floor) {
        counters.y_floor_hits.fetch_add(1);
        counters.resampled_rows.fetch_add(1);
        continue;
      }
      const TruncatedMoments tm = moments.at(y);
      Eigen::MatrixXd chol;
      if (!robust_cholesky(gauss_scale * tm.sigma, chol, &counters)) {
        counters.resampled_rows.fetch_add(1);
        continue;
      }
      auto row = out.sample.row(i);
      draw_gaussian(gauss_scale * tm.mu, chol, rng, row);
      for (std::size_t j = 0; j < d; ++j) row[j] += max_draw[j];
      if (cfg.keep_conditioning) out.meta.y_values[i] = y;
      return;
    }
    throw std::runtime_error("sample_d_normex: row kept failing after resampling");
  });
  counters.store_into(out.meta);
  return out;
}

SumSample sample_mrv_normex(const NormexConfig& config) {
  NormexConfig cfg = config;
  cfg.method = Method::MRVNormex;
  cfg.validate();
  const std::size_t d = static_cast<std::size_t>(cfg.family.d);
  const TruncatedMomentsEvaluator moments(cfg.family, cfg.norm);
  const NormingConstants norming =
      norming_constants(cfg.family, cfg.norm, cfg.n, !cfg.b_n_zero);
  const double gauss_scale = static_cast<double>(cfg.n - 1);

  SumSample out;
  out.sample = SampleMatrix(cfg.count, d);
  out.meta = make_meta(cfg, Method::MRVNormex);
  out.meta.a_n = norming.a_n;
  out.meta.b_n = norming.b_n;
  if (cfg.keep_conditioning) out.meta.y_values.resize(cfg.count);
  Counters counters;

  parallel_for(0, cfg.count, cfg.threads, [&](std::size_t i) {
    RandomStream rng(cfg.seed, substream(kTagMrvRow, i));
    std::vector<double> theta(d);
    for (int attempt = 0; attempt < kMaxRowAttempts; ++attempt) {
      draw_theta_row(cfg.family, cfg.norm, rng, theta);
      const double y =
          norming.a_n * frechet_quantile(cfg.family.alpha, rng.uniform()) +
          norming.b_n;
      if (y < cfg.y_floor) {
        counters.y_floor_hits.fetch_add(1);
        counters.resampled_rows.fetch_add(1);
        continue;
      }
      const TruncatedMoments tm = moments.at(y);
      Eigen::MatrixXd chol;
      if (!robust_cholesky(gauss_scale * tm.sigma, chol, &counters)) {
        counters.resampled_rows.fetch_add(1);
        continue;
      }
      auto row = out.sample.row(i);
      draw_gaussian(gauss_scale * tm.mu, chol, rng, row);
      for (std::size_t j = 0; j < d; ++j) row[j] += y * theta[j];
      if (cfg.keep_conditioning) out.meta.y_values[i] = y;
      return;
    }
    throw std::runtime_error("sample_mrv_normex: row kept failing after resampling");
  });
  counters.store_into(out.meta);
  return out;
}

SumSample sample_method(const NormexConfig& config) {
  switch (config.method) {
    case Method::DirectSum: return sample_sum(config);
    case Method::CLT: return sample_clt(config);
    case Method::DNormex: return sample_d_normex(config);
    case Method::MRVNormex: return sample_mrv_normex(config);
  }
  throw std::invalid_argument("sample_method: unknown method");
}

Eigen::VectorXd conditional_gaussian(double y, std::uint64_t n,
                                     const FamilyParams& params, NormKind norm,
                                     std::uint64_t seed) {
  require(n >= 2, "conditional_gaussian: n must be >= 2");
  require(y > 0.0, "conditional_gaussian: y must be > 0");
  const TruncatedMomentsEvaluator moments(params, norm);
  const TruncatedMoments tm = moments.at(y);
  const double scale = static_cast<double>(n - 1);
  Eigen::MatrixXd chol;
  Counters counters;
  if (!robust_cholesky(scale * tm.sigma, chol, &counters)) {
    throw std::runtime_error("conditional_gaussian: factorization failed");
  }
  RandomStream rng(seed, substream(kTagConditional, 0));
  const std::size_t d = static_cast<std::size_t>(params.d);
  std::vector<double> buffer(d);
  draw_gaussian(scale * tm.mu, chol, rng, buffer);
  Eigen::VectorXd out(d);
  for (std::size_t k = 0; k < d; ++k) out(k) = buffer[k];
  return out;
}

}  // namespace normex
