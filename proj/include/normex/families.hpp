#ifndef NORMEX_FAMILIES_HPP
#define NORMEX_FAMILIES_HPP

#include <cstdint>
#include <span>
#include <string>

#include "normex/common.hpp"
#include "normex/rng.hpp"

namespace normex {

enum class Family {
  MvParetoLomax,      // joint survival (1 + sum x_i)^{-alpha} on the positive orthant
  IndepParetoLomax,   // iid Pareto-Lomax(alpha) components
  ClaytonParetoLomax, // Pareto-Lomax margins tied by a survival Clayton copula, d = 2
  RadialParetoLomax,  // density proportional to (1 + ||x||_inf)^{-(alpha+d)}, x >= 0
};

enum class NormKind { L1, Linf };

std::string family_name(Family family);
std::string norm_name(NormKind norm);
Family parse_family_name(const std::string& name);
NormKind parse_norm_name(const std::string& name);

struct FamilyParams {
  Family variant = Family::MvParetoLomax;
  double alpha = 2.3;  // tail index, > 0
  int d = 1;           // dimension, >= 1
  double theta = 0.0;  // Clayton dependence parameter, > 0 (Clayton only)

  static FamilyParams mv_pareto_lomax(double alpha, int d);
  static FamilyParams indep_pareto_lomax(double alpha, int d);
  static FamilyParams clayton_pareto_lomax(double alpha, double theta);
  static FamilyParams radial_pareto_lomax(double alpha, int d);

  /// Throws std::invalid_argument on out-of-domain parameters.
  void validate() const;

  /// True when the Clayton parameter sits on the tractable ray alpha*theta = 1.
  bool clayton_unit_product() const;
};

/// Scale a_n and shift b_n normalizing the maximum norm, a_n ~ (c n)^{1/alpha}.
struct NormingConstants {
  double a_n = 0.0;
  double b_n = 0.0;
};

double vector_norm(std::span<const double> x, NormKind norm);

/// Whether closed forms (norm cdf, truncated moments, angular law) exist for
/// the pair. Mismatched pairs are rejected by the operations below.
bool norm_supported(const FamilyParams& params, NormKind norm);

/// Draws one vector from the family into `out` (size d), consuming only the
/// given stream. The building block for all samplers.
void draw_family_row(const FamilyParams& params, RandomStream& rng,
                     std::span<double> out);

/// iid draws, one row per sample. Bit-identical for fixed (params, count,
/// seed), independent of `threads`.
SampleMatrix sample_family(const FamilyParams& params, std::size_t count,
                           std::uint64_t seed, int threads = 1);

/// P(X_j > x) = (1 + x)^{-alpha}. Errors for the radial family, whose
/// marginals have no closed form.
double marginal_survival(const FamilyParams& params, double x);

/// P(X_i > x_i for all i), closed form; errors for the radial family.
double joint_survival(const FamilyParams& params, std::span<const double> x);

/// F_{||X||}(y) for the supported (family, norm) pair.
double norm_cdf(const FamilyParams& params, NormKind norm, double y);

/// Expanded three-term form of the L1 norm cdf for the d = 3 multivariate
/// family. Kept as an independent algebraic route; must agree with norm_cdf.
double mv_lomax_norm_cdf_d3(double alpha, double y);

double frechet_cdf(double alpha, double x);
double frechet_quantile(double alpha, double u);

/// Norming constants for the maximum norm; b_n = -1 by default (improves the
/// finite-n fit), b_n = 0 available for ablation.
NormingConstants norming_constants(const FamilyParams& params, NormKind norm,
                                   std::uint64_t n, bool shift_minus_one = true);

bool theta_supported(const FamilyParams& params, NormKind norm);

/// One draw from the closed-form angular law into `out` (size d).
void draw_theta_row(const FamilyParams& params, NormKind norm, RandomStream& rng,
                    std::span<double> out);

/// Angular samples on the unit sphere of `norm`: every row has unit norm and
/// nonnegative entries. Closed-form laws per family; rejects unsupported pairs.
SampleMatrix sample_theta(const FamilyParams& params, NormKind norm,
                          std::size_t count, std::uint64_t seed);

struct EmpiricalThetaResult {
  SampleMatrix directions;
  double threshold = 0.0;       // conditioning level actually used
  double quantile = 0.0;        // requested tail quantile
  std::size_t raw_draws = 0;    // family draws consumed
};

/// Fallback angular sampler: directions X/||X|| of raw draws conditioned on
/// the norm exceeding a high empirical quantile. Biased at finite threshold;
/// the threshold is reported alongside the sample.
EmpiricalThetaResult sample_theta_empirical(const FamilyParams& params,
                                            NormKind norm, std::size_t count,
                                            std::uint64_t seed,
                                            double quantile = 0.999);

}  // namespace normex

#endif  // NORMEX_FAMILIES_HPP
