#ifndef NORMEX_TRUNCATED_MOMENTS_HPP
#define NORMEX_TRUNCATED_MOMENTS_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "normex/families.hpp"

namespace normex {

/// Mean vector and covariance matrix of the law of X conditioned on
/// ||X|| <= y.
struct TruncatedMoments {
  double y = 0.0;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

// Closed-form evaluator for one (family, norm) pair. Construction
// precomputes the per-family constants; at(y) is then cheap enough to call
// once per simulated row.
class TruncatedMomentsEvaluator {
 public:
  TruncatedMomentsEvaluator(const FamilyParams& params, NormKind norm);

  TruncatedMoments at(double y) const;

  // Unnormalized building blocks, exposed for oracle comparisons:
  // f = P(||X|| <= y), m1 = E[X_1; ||X|| <= y], m2_diag = E[X_1^2; ...],
  // m2_off = E[X_1 X_2; ...] (zero slot when d = 1).
  struct Raw {
    double f = 0.0;
    double m1 = 0.0;
    double m2_diag = 0.0;
    double m2_off = 0.0;
  };
  Raw raw_at(double y) const;

  const FamilyParams& params() const { return params_; }
  NormKind norm() const { return norm_; }

 private:
  FamilyParams params_;
  NormKind norm_;
  double coeff_m1_ = 0.0;
  double coeff_m2_diag_ = 0.0;
  double coeff_m2_off_ = 0.0;
  double coeff_f_ = 0.0;
};

TruncatedMoments truncated_moments(const FamilyParams& params, NormKind norm,
                                   double y);

/// Exact mean and covariance of the untruncated family; requires alpha > 2.
void unconditional_moments(const FamilyParams& params, Eigen::VectorXd& mean,
                           Eigen::MatrixXd& cov);

/// Monte Carlo rejection counterpart used as the independent oracle.
struct McTruncatedMoments {
  double y = 0.0;
  Eigen::VectorXd mu;
  Eigen::VectorXd mu_se;
  Eigen::MatrixXd second_raw;     // E[Y_i Y_j | ||Y|| <= y] estimates
  Eigen::MatrixXd second_raw_se;
  Eigen::MatrixXd sigma;
  std::size_t accepted = 0;
  std::size_t draws = 0;
};

McTruncatedMoments mc_truncated_moments(const FamilyParams& params, NormKind norm,
                                        double y, std::size_t n_mc,
                                        std::uint64_t seed, int threads = 1);

}  // namespace normex

#endif  // NORMEX_TRUNCATED_MOMENTS_HPP
