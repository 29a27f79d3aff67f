#pragma once

#include "hpl/lcg.hpp"

#include <array>

namespace hpl {

// Raised when the weighted correlator sum lands outside [-1, 1] by more
// than numerical tolerance. This happens when a conditioned state's
// component weights are so large (herald probability near zero) that
// cancellation destroys the sum; the state is physically negligible but
// the caller must know the number is meaningless.
struct CorrelatorUnreliable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A step function x -> {-1,+1} given by sorted breakpoints; signs[i] is
// the value on the i-th interval, so signs has breakpoints.size()+1
// entries. Sign binning is breakpoints {0}, signs {-1,+1}.
struct Binning {
  std::vector<double> breakpoints;
  std::vector<int> signs;
};

Binning sign_binning();

// The four homodyne angles plus the two binning step functions.
struct BellMeasurement {
  double theta0 = 0.0;
  double theta1 = 0.0;
  double phi0 = 0.0;
  double phi1 = 0.0;
  Binning binning_a;
  Binning binning_b;
};

// Angles {0, pi/2} for Alice and {-pi/4, pi/4} for Bob, sign binning.
BellMeasurement default_measurement();

// Joint (x1, x2) distribution of a 2-mode state measured at rotated
// quadratures: a weighted list of bivariate Gaussians.
struct Marginal2D {
  struct Component {
    double weight = 1.0;
    Eigen::Vector2d mu2;
    Eigen::Matrix2d sigma2;
  };
  std::vector<Component> components;
};

// Applies R(theta) to mode 1 and R(phi) to mode 2, then keeps quadrature
// rows/columns {1,3} (the two x quadratures).
Marginal2D homodyne_marginal(const LcgState& state, double theta, double phi);

// Bivariate normal mass on [u1,v1] x [u2,v2] via reduction to a 1D
// integral of exp(-y^2) * [Erf(..) - Erf(..)], evaluated by adaptive
// Gauss-Kronrod quadrature to absolute tolerance 1e-12. Bounds may be
// +-infinity. Throws DegenerateCovariance when det(sigma2) <= 1e-300.
double rectangle_integral(const Eigen::Vector2d& mu2, const Eigen::Matrix2d& sigma2,
                          double u1, double v1, double u2, double v2);

// <A B> = -1 + 2 * sum_k w_k * sum_{R in R+} mass_k(R), where R+ is the
// set of rectangles on which a(x1)*b(x2) = +1.
double correlator(const LcgState& state, double theta, double phi,
                  const Binning& binning_a, const Binning& binning_b);

// E00, E01, E10, E11 for the four angle pairs of the measurement.
std::array<double, 4> chsh_correlators(const LcgState& state, const BellMeasurement& meas);

// |E00 + E01 + E10 - E11|.
double chsh_score(const LcgState& state, const BellMeasurement& meas);

}  // namespace hpl
