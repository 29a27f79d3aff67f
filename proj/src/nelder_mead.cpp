#include "hpl/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace hpl {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const NelderMeadConfig& config) {
  const int n = static_cast<int>(x0.size());
  if (n == 0) {
    throw std::invalid_argument("nelder_mead: empty parameter vector");
  }

  constexpr double kAlpha = 1.0;  // reflection
  constexpr double kGamma = 2.0;  // expansion
  constexpr double kRho = 0.5;    // contraction
  constexpr double kSigma = 0.5;  // shrink

  Eigen::VectorXd steps = config.initial_steps;
  if (steps.size() == 0) {
    steps = Eigen::VectorXd::Constant(n, 0.1);
  }
  if (steps.size() != n) {
    throw std::invalid_argument("nelder_mead: initial_steps dimension mismatch");
  }

  std::vector<Eigen::VectorXd> simplex;
  simplex.reserve(static_cast<std::size_t>(n) + 1);
  simplex.push_back(x0);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = x0;
    v(i) += (steps(i) != 0.0) ? steps(i) : 0.1;
    simplex.push_back(v);
  }

  std::vector<double> values(simplex.size());
  for (std::size_t i = 0; i < simplex.size(); ++i) {
    values[i] = objective(simplex[i]);
  }
  if (!std::isfinite(values[0])) {
    throw std::invalid_argument("nelder_mead: objective not finite at the initial point");
  }

  std::vector<std::size_t> order(simplex.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      // NaNs sort last so the best vertex is always finite.
      const double fa = std::isnan(values[a]) ? std::numeric_limits<double>::infinity() : values[a];
      const double fb = std::isnan(values[b]) ? std::numeric_limits<double>::infinity() : values[b];
      return fa < fb;
    });
    std::vector<Eigen::VectorXd> s2(simplex.size());
    std::vector<double> v2(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      s2[i] = simplex[order[i]];
      v2[i] = values[order[i]];
    }
    simplex.swap(s2);
    values.swap(v2);
  };
  sort_simplex();

  int iterations = 0;
  for (; iterations < config.max_iterations; ++iterations) {
    double diameter = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      diameter = std::max(diameter, (simplex[i] - simplex[0]).lpNorm<Eigen::Infinity>());
    }
    if (diameter < config.simplex_tolerance) break;

    const std::size_t worst = simplex.size() - 1;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < worst; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(worst);

    const Eigen::VectorXd reflected = centroid + kAlpha * (centroid - simplex[worst]);
    const double f_reflected = objective(reflected);

    if (f_reflected < values[0]) {
      const Eigen::VectorXd expanded = centroid + kGamma * (reflected - centroid);
      const double f_expanded = objective(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
    } else if (f_reflected < values[worst - 1]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
    } else {
      // Contract toward the better of {worst, reflected}.
      const bool outside = f_reflected < values[worst];
      const Eigen::VectorXd& toward = outside ? reflected : simplex[worst];
      const Eigen::VectorXd contracted = centroid + kRho * (toward - centroid);
      const double f_contracted = objective(contracted);
      if (f_contracted < (outside ? f_reflected : values[worst])) {
        simplex[worst] = contracted;
        values[worst] = f_contracted;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex[0] + kSigma * (simplex[i] - simplex[0]);
          values[i] = objective(simplex[i]);
        }
      }
    }
    sort_simplex();
  }

  NelderMeadResult result;
  result.x = simplex[0];
  result.f = values[0];
  result.iterations = iterations;
  return result;
}

}  // namespace hpl
