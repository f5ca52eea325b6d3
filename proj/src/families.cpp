#include "normex/families.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "normex/parallel.hpp"
#include "normex/special.hpp"

namespace normex {

namespace {

constexpr std::uint64_t kTagFamilyRow = 0x11;
constexpr std::uint64_t kTagThetaRow = 0x12;
constexpr std::uint64_t kTagEmpiricalTheta = 0x13;

double pareto_lomax_quantile_from_survival(double alpha, double u) {
  // Inverse of the survival function (1+x)^{-alpha}.
  return std::pow(u, -1.0 / alpha) - 1.0;
}

void draw_mv_pareto_lomax(double alpha, int d, RandomStream& rng,
                          std::span<double> out) {
  // Inductive scheme: the first coordinate is Pareto-Lomax(alpha); each next
  // one is (1 + partial sum) times an independent Pareto-Lomax(alpha + k).
  double partial = 0.0;
  for (int k = 0; k < d; ++k) {
    const double hat = pareto_lomax_quantile_from_survival(alpha + k, rng.uniform());
    out[k] = (1.0 + partial) * hat;
    partial += out[k];
  }
}

void draw_indep_pareto_lomax(double alpha, int d, RandomStream& rng,
                             std::span<double> out) {
  for (int k = 0; k < d; ++k) {
    out[k] = pareto_lomax_quantile_from_survival(alpha, rng.uniform());
  }
}

void draw_clayton_pareto_lomax(double alpha, double theta, RandomStream& rng,
                               std::span<double> out) {
  // Gamma-frailty construction of the Clayton copula, then the survival
  // transform to Pareto-Lomax margins.
  const double frailty = rng.gamma(1.0 / theta);
  for (int k = 0; k < 2; ++k) {
    const double v = std::pow(1.0 + rng.exponential() / frailty, -1.0 / theta);
    out[k] = pareto_lomax_quantile_from_survival(alpha, v);
  }
}

void draw_radial_pareto_lomax(double alpha, int d, RandomStream& rng,
                              std::span<double> out) {
  // Norm and direction are independent; the norm R satisfies
  // R / (1 + R) ~ Beta(d, alpha), the direction is uniform on the positive
  // part of the L-infinity unit sphere (pick a face, fill the rest U[0,1]).
  const double g1 = rng.gamma(static_cast<double>(d));
  const double g2 = rng.gamma(alpha);
  const double u = g1 / (g1 + g2);
  const double radius = u / (1.0 - u);
  const std::uint64_t face = rng.uniform_index(static_cast<std::uint64_t>(d));
  for (int k = 0; k < d; ++k) {
    const double coord =
        (static_cast<std::uint64_t>(k) == face) ? 1.0 : rng.uniform();
    out[k] = radius * coord;
  }
}

}  // namespace

std::string family_name(Family family) {
  switch (family) {
    case Family::MvParetoLomax: return "mv_pareto_lomax";
    case Family::IndepParetoLomax: return "indep_pareto_lomax";
    case Family::ClaytonParetoLomax: return "clayton_pareto_lomax";
    case Family::RadialParetoLomax: return "radial_pareto_lomax";
  }
  return "unknown";
}

std::string norm_name(NormKind norm) {
  return norm == NormKind::L1 ? "l1" : "linf";
}

Family parse_family_name(const std::string& name) {
  if (name == "mv_pareto_lomax") return Family::MvParetoLomax;
  if (name == "indep_pareto_lomax") return Family::IndepParetoLomax;
  if (name == "clayton_pareto_lomax") return Family::ClaytonParetoLomax;
  if (name == "radial_pareto_lomax") return Family::RadialParetoLomax;
  throw std::invalid_argument("unknown family variant '" + name + "'");
}

NormKind parse_norm_name(const std::string& name) {
  if (name == "l1") return NormKind::L1;
  if (name == "linf") return NormKind::Linf;
  throw std::invalid_argument("unknown norm '" + name + "'");
}

FamilyParams FamilyParams::mv_pareto_lomax(double alpha, int d) {
  FamilyParams p{Family::MvParetoLomax, alpha, d, 0.0};
  p.validate();
  return p;
}

FamilyParams FamilyParams::indep_pareto_lomax(double alpha, int d) {
  FamilyParams p{Family::IndepParetoLomax, alpha, d, 0.0};
  p.validate();
  return p;
}

FamilyParams FamilyParams::clayton_pareto_lomax(double alpha, double theta) {
  FamilyParams p{Family::ClaytonParetoLomax, alpha, 2, theta};
  p.validate();
  return p;
}

FamilyParams FamilyParams::radial_pareto_lomax(double alpha, int d) {
  FamilyParams p{Family::RadialParetoLomax, alpha, d, 0.0};
  p.validate();
  return p;
}

void FamilyParams::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0, "family: alpha must be > 0");
  require(d >= 1, "family: dimension must be >= 1");
  if (variant == Family::ClaytonParetoLomax) {
    require(d == 2, "clayton family: d must be 2");
    require(std::isfinite(theta) && theta > 0.0, "clayton family: theta must be > 0");
  }
}

bool FamilyParams::clayton_unit_product() const {
  return variant == Family::ClaytonParetoLomax &&
         std::abs(alpha * theta - 1.0) <= 1e-9;
}

double vector_norm(std::span<const double> x, NormKind norm) {
  double out = 0.0;
  if (norm == NormKind::L1) {
    for (double v : x) out += std::abs(v);
  } else {
    for (double v : x) out = std::max(out, std::abs(v));
  }
  return out;
}

bool norm_supported(const FamilyParams& params, NormKind norm) {
  switch (params.variant) {
    case Family::MvParetoLomax: return norm == NormKind::L1;
    case Family::IndepParetoLomax: return norm == NormKind::Linf;
    case Family::ClaytonParetoLomax: return norm == NormKind::Linf;
    case Family::RadialParetoLomax: return norm == NormKind::Linf;
  }
  return false;
}

void draw_family_row(const FamilyParams& params, RandomStream& rng,
                     std::span<double> out) {
  switch (params.variant) {
    case Family::MvParetoLomax:
      draw_mv_pareto_lomax(params.alpha, params.d, rng, out);
      break;
    case Family::IndepParetoLomax:
      draw_indep_pareto_lomax(params.alpha, params.d, rng, out);
      break;
    case Family::ClaytonParetoLomax:
      draw_clayton_pareto_lomax(params.alpha, params.theta, rng, out);
      break;
    case Family::RadialParetoLomax:
      draw_radial_pareto_lomax(params.alpha, params.d, rng, out);
      break;
  }
}

SampleMatrix sample_family(const FamilyParams& params, std::size_t count,
                           std::uint64_t seed, int threads) {
  params.validate();
  require(count >= 1, "sample_family: count must be >= 1");
  SampleMatrix out(count, static_cast<std::size_t>(params.d));
  parallel_for(0, count, threads, [&](std::size_t i) {
    RandomStream rng(seed, substream(kTagFamilyRow, i));
    draw_family_row(params, rng, out.row(i));
  });
  return out;
}

double marginal_survival(const FamilyParams& params, double x) {
  params.validate();
  require(x >= 0.0, "marginal_survival: x must be >= 0");
  if (params.variant == Family::RadialParetoLomax) {
    throw std::invalid_argument(
        "marginal_survival: no closed form for the radial family");
  }
  return std::pow(1.0 + x, -params.alpha);
}

double joint_survival(const FamilyParams& params, std::span<const double> x) {
  params.validate();
  require(x.size() == static_cast<std::size_t>(params.d),
          "joint_survival: x must have d entries");
  for (double v : x) require(v >= 0.0, "joint_survival: entries must be >= 0");
  const double alpha = params.alpha;
  switch (params.variant) {
    case Family::MvParetoLomax: {
      double s = 0.0;
      for (double v : x) s += v;
      return std::pow(1.0 + s, -alpha);
    }
    case Family::IndepParetoLomax: {
      double p = 1.0;
      for (double v : x) p *= std::pow(1.0 + v, -alpha);
      return p;
    }
    case Family::ClaytonParetoLomax: {
      const double t = params.theta;
      const double s = std::pow(1.0 + x[0], alpha * t) +
                       std::pow(1.0 + x[1], alpha * t) - 1.0;
      return std::pow(s, -1.0 / t);
    }
    case Family::RadialParetoLomax:
      throw std::invalid_argument(
          "joint_survival: no closed form for the radial family");
  }
  return 0.0;
}

namespace {

// Norm cdf shared by the L1 multivariate family and the radial family:
// F(y) = 1 - sum_{k=0}^{d-1} Gamma(alpha+k)/(Gamma(k+1)Gamma(alpha)) *
//        y^k / (1+y)^{alpha+k}.
double gamma_sum_norm_cdf(double alpha, int d, double y) {
  double tail = 0.0;
  double coeff = 1.0;  // Gamma(alpha+k) / (Gamma(k+1) Gamma(alpha))
  for (int k = 0; k < d; ++k) {
    if (k > 0) coeff *= (alpha + k - 1) / k;
    tail += coeff * std::pow(y, k) * std::pow(1.0 + y, -(alpha + k));
  }
  return 1.0 - tail;
}

}  // namespace

double norm_cdf(const FamilyParams& params, NormKind norm, double y) {
  params.validate();
  require(y >= 0.0, "norm_cdf: y must be >= 0");
  if (!norm_supported(params, norm)) {
    throw std::invalid_argument("norm_cdf: unsupported (family, norm) pair: " +
                                family_name(params.variant) + "/" + norm_name(norm));
  }
  const double alpha = params.alpha;
  switch (params.variant) {
    case Family::MvParetoLomax:
    case Family::RadialParetoLomax:
      return gamma_sum_norm_cdf(alpha, params.d, y);
    case Family::IndepParetoLomax:
      return std::pow(1.0 - std::pow(1.0 + y, -alpha), params.d);
    case Family::ClaytonParetoLomax: {
      // 1 - survival of the maximum component.
      const double t = params.theta;
      const double survival = 2.0 * std::pow(1.0 + y, -alpha) -
                              std::pow(2.0 * std::pow(1.0 + y, alpha * t) - 1.0,
                                       -1.0 / t);
      return 1.0 - survival;
    }
  }
  return 0.0;
}

double mv_lomax_norm_cdf_d3(double alpha, double y) {
  require(alpha > 0.0, "mv_lomax_norm_cdf_d3: alpha must be > 0");
  require(y >= 0.0, "mv_lomax_norm_cdf_d3: y must be >= 0");
  return 1.0 - std::pow(1.0 + y, -alpha) -
         alpha * y * std::pow(1.0 + y, -(alpha + 1.0)) -
         0.5 * alpha * (alpha + 1.0) * y * y * std::pow(1.0 + y, -(alpha + 2.0));
}

double frechet_cdf(double alpha, double x) {
  require(alpha > 0.0, "frechet_cdf: alpha must be > 0");
  require(x > 0.0, "frechet_cdf: x must be > 0");
  return std::exp(-std::pow(x, -alpha));
}

double frechet_quantile(double alpha, double u) {
  require(alpha > 0.0, "frechet_quantile: alpha must be > 0");
  require(u > 0.0 && u < 1.0, "frechet_quantile: u must be in (0, 1)");
  return std::pow(-std::log(u), -1.0 / alpha);
}

NormingConstants norming_constants(const FamilyParams& params, NormKind norm,
                                   std::uint64_t n, bool shift_minus_one) {
  params.validate();
  require(n >= 1, "norming_constants: n must be >= 1");
  if (!norm_supported(params, norm)) {
    throw std::invalid_argument("norming_constants: unsupported (family, norm) pair");
  }
  const double alpha = params.alpha;
  double c_alpha = 0.0;  // c^alpha = lim y^alpha * survival of the norm
  switch (params.variant) {
    case Family::IndepParetoLomax:
      c_alpha = static_cast<double>(params.d);
      break;
    case Family::ClaytonParetoLomax:
      c_alpha = 2.0 - std::pow(2.0, -1.0 / params.theta);
      break;
    case Family::MvParetoLomax:
    case Family::RadialParetoLomax:
      // Leading term of the gamma-sum tail: Gamma(alpha+d-1)/(Gamma(d)Gamma(alpha)).
      c_alpha = std::exp(std::lgamma(alpha + params.d - 1) -
                         std::lgamma(static_cast<double>(params.d)) -
                         std::lgamma(alpha));
      break;
  }
  NormingConstants out;
  out.a_n = std::pow(c_alpha * static_cast<double>(n), 1.0 / alpha);
  out.b_n = shift_minus_one ? -1.0 : 0.0;
  return out;
}

bool theta_supported(const FamilyParams& params, NormKind norm) {
  if (!norm_supported(params, norm)) return false;
  switch (params.variant) {
    case Family::MvParetoLomax:
    case Family::IndepParetoLomax:
    case Family::RadialParetoLomax:
      return true;
    case Family::ClaytonParetoLomax:
      return params.clayton_unit_product();
  }
  return false;
}

void draw_theta_row(const FamilyParams& params, NormKind norm, RandomStream& rng,
                    std::span<double> out) {
  const int d = params.d;
  switch (params.variant) {
    case Family::IndepParetoLomax: {
      // Discrete on the basis vectors, equal weights by exchangeability.
      const std::uint64_t pick = rng.uniform_index(static_cast<std::uint64_t>(d));
      for (int k = 0; k < d; ++k) out[k] = 0.0;
      out[pick] = 1.0;
      break;
    }
    case Family::MvParetoLomax: {
      // Uniform on the unit simplex via exponential spacings.
      double total = 0.0;
      for (int k = 0; k < d; ++k) {
        out[k] = rng.exponential();
        total += out[k];
      }
      for (int k = 0; k < d; ++k) out[k] /= total;
      break;
    }
    case Family::ClaytonParetoLomax: {
      // Face chosen uniformly; the free coordinate has density proportional
      // to (1+t)^{-(alpha+2)} on [0, 1], inverted in closed form.
      const double alpha = params.alpha;
      const double mass = 1.0 - std::pow(2.0, -(alpha + 1.0));
      const double t =
          std::pow(1.0 - rng.uniform() * mass, -1.0 / (alpha + 1.0)) - 1.0;
      const std::uint64_t face = rng.uniform_index(2);
      out[face] = 1.0;
      out[1 - face] = t;
      break;
    }
    case Family::RadialParetoLomax: {
      // Direction independent of the norm: uniform over the positive faces.
      const std::uint64_t face = rng.uniform_index(static_cast<std::uint64_t>(d));
      for (int k = 0; k < d; ++k) {
        out[k] = (static_cast<std::uint64_t>(k) == face) ? 1.0 : rng.uniform();
      }
      break;
    }
  }
  (void)norm;
}

SampleMatrix sample_theta(const FamilyParams& params, NormKind norm,
                          std::size_t count, std::uint64_t seed) {
  params.validate();
  require(count >= 1, "sample_theta: count must be >= 1");
  if (!theta_supported(params, norm)) {
    throw std::invalid_argument(
        "sample_theta: no closed-form angular law for this (family, norm) pair; "
        "use sample_theta_empirical");
  }
  SampleMatrix out(count, static_cast<std::size_t>(params.d));
  for (std::size_t i = 0; i < count; ++i) {
    RandomStream rng(seed, substream(kTagThetaRow, i));
    draw_theta_row(params, norm, rng, out.row(i));
  }
  return out;
}

EmpiricalThetaResult sample_theta_empirical(const FamilyParams& params,
                                            NormKind norm, std::size_t count,
                                            std::uint64_t seed, double quantile) {
  params.validate();
  require(count >= 1, "sample_theta_empirical: count must be >= 1");
  require(quantile > 0.0 && quantile < 1.0,
          "sample_theta_empirical: quantile must be in (0, 1)");

  const std::size_t d = static_cast<std::size_t>(params.d);
  const std::size_t pilot = 100000;
  std::vector<double> norms(pilot);
  SampleMatrix batch(pilot, d);
  auto fill_batch = [&](std::uint64_t round) {
    for (std::size_t i = 0; i < pilot; ++i) {
      RandomStream rng(seed, substream(kTagEmpiricalTheta, round * pilot + i));
      draw_family_row(params, rng, batch.row(i));
      norms[i] = vector_norm(batch.row(i), norm);
    }
  };

  fill_batch(0);
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t rank = std::min(
      sorted.size() - 1,
      static_cast<std::size_t>(quantile * static_cast<double>(sorted.size())));
  const double threshold = sorted[rank];

  EmpiricalThetaResult result;
  result.threshold = threshold;
  result.quantile = quantile;
  result.directions = SampleMatrix(count, d);

  std::size_t kept = 0;
  std::uint64_t round = 0;
  while (kept < count) {
    if (round > 0) fill_batch(round);
    for (std::size_t i = 0; i < pilot && kept < count; ++i) {
      if (norms[i] > threshold) {
        for (std::size_t j = 0; j < d; ++j) {
          result.directions(kept, j) = batch(i, j) / norms[i];
        }
        ++kept;
      }
    }
    ++round;
    if (round > 100000) {
      throw std::runtime_error("sample_theta_empirical: threshold never exceeded");
    }
  }
  result.raw_draws = round * pilot;
  return result;
}

}  // namespace normex
