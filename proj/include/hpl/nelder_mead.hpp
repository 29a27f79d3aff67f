#pragma once

#include <Eigen/Dense>

#include <functional>

namespace hpl {

struct NelderMeadConfig {
  int max_iterations = 5000;
  // Terminate when the simplex diameter (max infinity-norm distance from
  // the best vertex) falls below this.
  double simplex_tolerance = 1e-8;
  // Initial simplex offsets per dimension; when empty, 0.1 everywhere.
  Eigen::VectorXd initial_steps;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
};

// Downhill simplex minimization (reflection 1, expansion 2, contraction
// 0.5, shrink 0.5). The initial point is a simplex vertex, so the result
// never exceeds f(x0). Throws std::invalid_argument if f(x0) is not
// finite.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const NelderMeadConfig& config = {});

}  // namespace hpl
