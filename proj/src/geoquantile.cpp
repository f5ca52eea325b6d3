#include "normex/geoquantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace normex {

double gq_data_scale(const SampleMatrix& sample) {
  if (sample.rows() == 0) return 1.0;
  double scale = 0.0;
  for (std::size_t j = 0; j < sample.cols(); ++j) {
    double lo = sample(0, j), hi = sample(0, j);
    for (std::size_t i = 1; i < sample.rows(); ++i) {
      lo = std::min(lo, sample(i, j));
      hi = std::max(hi, sample(i, j));
    }
    scale = std::max(scale, hi - lo);
  }
  return scale > 0.0 ? scale : 1.0;
}

double gq_objective(const SampleMatrix& sample, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& q) {
  require(sample.rows() >= 1, "gq_objective: sample must be nonempty");
  const std::size_t n = sample.rows();
  const std::size_t d = sample.cols();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = sample.row(i);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = row[j] - q(j);
      sq += diff * diff;
    }
    sum += std::sqrt(sq);
  }
  return sum / static_cast<double>(n) - u.dot(q);
}

Eigen::VectorXd gq_gradient(const SampleMatrix& sample, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& q, double eps) {
  require(sample.rows() >= 1, "gq_gradient: sample must be nonempty");
  const std::size_t n = sample.rows();
  const std::size_t d = sample.cols();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = sample.row(i);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = q(j) - row[j];
      sq += diff * diff;
    }
    const double dist = std::max(std::sqrt(sq), eps);
    for (std::size_t j = 0; j < d; ++j) grad(j) += (q(j) - row[j]) / dist;
  }
  grad /= static_cast<double>(n);
  grad -= u;
  return grad;
}

namespace {

Eigen::VectorXd componentwise_median(const SampleMatrix& sample) {
  const std::size_t n = sample.rows();
  const std::size_t d = sample.cols();
  Eigen::VectorXd med(d);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = sample(i, j);
    const std::size_t mid = n / 2;
    std::nth_element(column.begin(), column.begin() + mid, column.end());
    double m = column[mid];
    if (n % 2 == 0) {
      std::nth_element(column.begin(), column.begin() + mid - 1,
                       column.begin() + mid);
      m = 0.5 * (m + column[mid - 1]);
    }
    med(j) = m;
  }
  return med;
}

Eigen::VectorXd componentwise_mean(const SampleMatrix& sample) {
  const std::size_t n = sample.rows();
  const std::size_t d = sample.cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = sample.row(i);
    for (std::size_t j = 0; j < d; ++j) mean(j) += row[j];
  }
  return mean / static_cast<double>(n);
}

// When descent stalls at a kink, the minimizer may sit exactly on a data
// point; accept the jump only if it strictly improves the objective.
bool try_data_point_jump(const SampleMatrix& sample, const Eigen::VectorXd& u,
                         Eigen::VectorXd& q, double& f) {
  const std::size_t n = sample.rows();
  const std::size_t d = sample.cols();
  std::size_t nearest = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    auto row = sample.row(i);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = row[j] - q(j);
      sq += diff * diff;
    }
    if (sq < best_dist) {
      best_dist = sq;
      nearest = i;
    }
  }
  Eigen::VectorXd candidate(d);
  for (std::size_t j = 0; j < d; ++j) candidate(j) = sample(nearest, j);
  const double f_candidate = gq_objective(sample, u, candidate);
  if (f_candidate < f) {
    q = candidate;
    f = f_candidate;
    return true;
  }
  return false;
}

}  // namespace

GeoQuantile solve_gq(const SampleMatrix& sample, const Eigen::VectorXd& u,
                     const GqSolverOptions& options) {
  require(sample.rows() >= 1, "solve_gq: sample must be nonempty");
  require(static_cast<std::size_t>(u.size()) == sample.cols(),
          "solve_gq: level dimension mismatch");
  require(u.norm() < 1.0, "solve_gq: level must lie strictly inside the unit ball");

  const std::size_t d = sample.cols();
  const double scale = gq_data_scale(sample);
  const double eps = options.smoothing_eps_rel * scale;
  const double tol = options.grad_tol * (1.0 + u.norm());

  Eigen::VectorXd q;
  switch (options.init) {
    case GqSolverOptions::Init::ComponentwiseMedian:
      q = componentwise_median(sample);
      break;
    case GqSolverOptions::Init::Mean:
      q = componentwise_mean(sample);
      break;
    case GqSolverOptions::Init::User:
      require(static_cast<std::size_t>(options.user_init.size()) == d,
              "solve_gq: user init dimension mismatch");
      q = options.user_init;
      break;
  }

  double f = gq_objective(sample, u, q);
  Eigen::VectorXd grad = gq_gradient(sample, u, q, eps);
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(d, d);

  GeoQuantile result;
  result.u = u;
  int iter = 0;
  bool converged = grad.norm() <= tol;
  while (!converged && iter < options.max_iterations) {
    ++iter;
    Eigen::VectorXd direction = -(inv_hessian * grad);
    if (direction.dot(grad) >= 0.0) {
      // Safeguard against a spoiled quasi-Newton matrix.
      inv_hessian = Eigen::MatrixXd::Identity(d, d);
      direction = -grad;
    }

    // Backtracking Armijo line search.
    const double slope = grad.dot(direction);
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd q_next;
    double f_next = f;
    for (int ls = 0; ls < 60; ++ls) {
      q_next = q + step * direction;
      f_next = gq_objective(sample, u, q_next);
      if (f_next <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }

    if (!accepted) {
      if (try_data_point_jump(sample, u, q, f)) {
        grad = gq_gradient(sample, u, q, eps);
        inv_hessian = Eigen::MatrixXd::Identity(d, d);
        converged = grad.norm() <= tol;
        continue;
      }
      break;  // stalled at a kink; return the best iterate
    }

    Eigen::VectorXd grad_next = gq_gradient(sample, u, q_next, eps);
    const Eigen::VectorXd s = q_next - q;
    const Eigen::VectorXd y = grad_next - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
      const Eigen::MatrixXd left = identity - rho * (s * y.transpose());
      inv_hessian = left * inv_hessian * left.transpose() +
                    rho * (s * s.transpose());
    }
    q = q_next;
    f = f_next;
    grad = grad_next;
    converged = grad.norm() <= tol;
    if (!converged && s.norm() <= 1e-14 * std::max(1.0, q.norm())) {
      if (try_data_point_jump(sample, u, q, f)) {
        grad = gq_gradient(sample, u, q, eps);
        inv_hessian = Eigen::MatrixXd::Identity(d, d);
        converged = grad.norm() <= tol;
        continue;
      }
      break;
    }
  }

  result.q = q;
  result.objective = f;
  result.gradient_norm = grad.norm();
  result.iterations = iter;
  result.converged = converged;
  return result;
}

Eigen::VectorXd spatial_rank(const SampleMatrix& sample, std::size_t j) {
  require(sample.rows() >= 2, "spatial_rank: need at least two rows");
  require(j < sample.rows(), "spatial_rank: row index out of range");
  const std::size_t n = sample.rows();
  const std::size_t d = sample.cols();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
  std::size_t used = 0;
  auto xj = sample.row(j);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == j) continue;
    auto xi = sample.row(i);
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = xj[k] - xi[k];
      sq += diff * diff;
    }
    if (sq == 0.0) continue;  // duplicate row: its term is skipped
    const double dist = std::sqrt(sq);
    for (std::size_t k = 0; k < d; ++k) u(k) += (xj[k] - xi[k]) / dist;
    ++used;
  }
  if (used == 0) {
    throw std::invalid_argument("spatial_rank: all rows coincide with row j");
  }
  return u / static_cast<double>(n);
}

std::vector<Level> level_grid(int d) {
  require(d == 2 || d == 3, "level_grid: d must be 2 or 3");
  const std::vector<double> lengths = {0.2,    0.4,   0.6,    0.8,  0.9,
                                       0.9225, 0.945, 0.9675, 0.99};

  std::vector<Eigen::VectorXd> directions;
  if (d == 2) {
    for (int k = 0; k < 16; ++k) {
      const double angle = k * M_PI / 8.0;
      Eigen::VectorXd dir(2);
      dir << std::cos(angle), std::sin(angle);
      directions.push_back(dir);
    }
  } else {
    // Poles once, then three polar rings with eight azimuths each.
    Eigen::VectorXd north(3), south(3);
    north << 0.0, 0.0, 1.0;
    south << 0.0, 0.0, -1.0;
    directions.push_back(north);
    for (int p = 1; p <= 3; ++p) {
      const double polar = p * M_PI / 4.0;
      const double z = std::cos(polar);
      const double s = std::sin(polar);
      for (int a = 0; a < 8; ++a) {
        const double azimuth = a * M_PI / 4.0;
        Eigen::VectorXd dir(3);
        dir << s * std::cos(azimuth), s * std::sin(azimuth), z;
        directions.push_back(dir);
      }
    }
    directions.push_back(south);
  }

  std::vector<Level> levels;
  Level origin;
  origin.u = Eigen::VectorXd::Zero(d);
  origin.length = 0.0;
  origin.extreme = false;
  origin.index = 0;
  levels.push_back(origin);
  int index = 1;
  for (double len : lengths) {
    for (const auto& dir : directions) {
      Level level;
      level.u = len * dir;
      level.length = len;
      level.extreme = len > 0.9;
      level.index = index++;
      levels.push_back(level);
    }
  }
  return levels;
}

}  // namespace normex
