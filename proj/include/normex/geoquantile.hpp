#ifndef NORMEX_GEOQUANTILE_HPP
#define NORMEX_GEOQUANTILE_HPP

#include <Eigen/Dense>
#include <vector>

#include "normex/common.hpp"

namespace normex {

/// A point of the open Euclidean unit ball parameterizing one quantile.
struct Level {
  Eigen::VectorXd u;
  double length = 0.0;
  bool extreme = false;  // tail levels, length > 0.9
  int index = -1;
};

struct GqSolverOptions {
  double grad_tol = 1e-8;        // on ||grad||_2 relative to 1 + ||u||
  int max_iterations = 500;
  double smoothing_eps_rel = 1e-9;  // coincident-point smoothing, times data scale
  enum class Init { ComponentwiseMedian, Mean, User };
  Init init = Init::ComponentwiseMedian;
  Eigen::VectorXd user_init;
};

struct GeoQuantile {
  Eigen::VectorXd u;
  Eigen::VectorXd q;
  double objective = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Coordinate spread used to scale tolerances; 1 for degenerate samples.
double gq_data_scale(const SampleMatrix& sample);

/// (1/n) sum_i (||x_i - q||_2 - <u, q>); convex in q.
double gq_objective(const SampleMatrix& sample, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& q);

/// Analytic gradient with each distance floored at eps near data points:
/// (1/n) sum_i (q - x_i) / max(||q - x_i||, eps) - u.
Eigen::VectorXd gq_gradient(const SampleMatrix& sample, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& q, double eps);

/// BFGS with backtracking line search on the smoothed objective. Returns the
/// best iterate flagged non-converged when the gradient tolerance is not met.
GeoQuantile solve_gq(const SampleMatrix& sample, const Eigen::VectorXd& u,
                     const GqSolverOptions& options = {});

/// u_j = n^{-1} sum_{i != j} (x_j - x_i)/||x_j - x_i||; rows identical to
/// row j are skipped. Always lands strictly inside the unit ball.
Eigen::VectorXd spatial_rank(const SampleMatrix& sample, std::size_t j);

/// Level set used in the experiments: 10 lengths, directions on the pi/4
/// sphere grid for d=3 (235 levels) and 16 planar directions for d=2 (145).
std::vector<Level> level_grid(int d);

}  // namespace normex

#endif  // NORMEX_GEOQUANTILE_HPP
