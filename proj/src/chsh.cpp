#include "hpl/chsh.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hpl {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Binning sign_binning() {
  Binning b;
  b.breakpoints = {0.0};
  b.signs = {-1, +1};
  return b;
}

BellMeasurement default_measurement() {
  BellMeasurement m;
  m.theta0 = 0.0;
  m.theta1 = kPi / 2.0;
  m.phi0 = -kPi / 4.0;
  m.phi1 = kPi / 4.0;
  m.binning_a = sign_binning();
  m.binning_b = sign_binning();
  return m;
}

Marginal2D homodyne_marginal(const LcgState& state, double theta, double phi) {
  if (state.n_modes != 2) {
    throw std::invalid_argument("homodyne_marginal: state must have exactly 2 modes");
  }
  Eigen::Matrix4d rot = Eigen::Matrix4d::Zero();
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  rot(0, 0) = ct;
  rot(0, 1) = st;
  rot(1, 0) = -st;
  rot(1, 1) = ct;
  rot(2, 2) = cp;
  rot(2, 3) = sp;
  rot(3, 2) = -sp;
  rot(3, 3) = cp;

  Marginal2D out;
  out.components.reserve(state.components.size());
  for (const auto& comp : state.components) {
    Marginal2D::Component m;
    m.weight = comp.weight;
    const Vec mu = rot * comp.state.mu;
    const Mat sigma = rot * comp.state.sigma * rot.transpose();
    m.mu2 << mu(0), mu(2);
    m.sigma2 << sigma(0, 0), sigma(0, 2), sigma(2, 0), sigma(2, 2);
    out.components.push_back(m);
  }
  return out;
}

double rectangle_integral(const Eigen::Vector2d& mu2, const Eigen::Matrix2d& sigma2,
                          double u1, double v1, double u2, double v2) {
  if (u1 >= v1 || u2 >= v2) return 0.0;

  const double sa = sigma2(0, 0);
  const double sb = sigma2(1, 1);
  const double sc = 0.5 * (sigma2(0, 1) + sigma2(1, 0));
  const double det = sa * sb - sc * sc;
  if (!(det > 1e-300) || !(sb > 0.0)) {
    throw DegenerateCovariance("rectangle_integral: covariance is singular");
  }

  const double sqrt_det = std::sqrt(det);
  const double sqrt_sb = std::sqrt(sb);

  // Substituting y = (x2 - mu2) / sqrt(2 sb) turns the mass into
  //   1/(2 sqrt(pi)) * Int_{ylo}^{yhi} e^{-y^2}
  //     [Erf((sqrt(sb)(v1-mu1)/sqrt(2) - sc y)/sqrt(det))
  //      - Erf((sqrt(sb)(u1-mu1)/sqrt(2) - sc y)/sqrt(det))] dy.
  // Beyond |y| = 10/sqrt(2) the Gaussian weight is below 1e-22, so the
  // y-range is clamped there to keep infinite x2-bounds finite.
  const double y_clamp = 10.0 / std::sqrt(2.0);
  double ylo = (u2 == -kInf) ? -y_clamp : (u2 - mu2(1)) / (std::sqrt(2.0) * sqrt_sb);
  double yhi = (v2 == kInf) ? y_clamp : (v2 - mu2(1)) / (std::sqrt(2.0) * sqrt_sb);
  ylo = std::max(ylo, -y_clamp);
  yhi = std::min(yhi, y_clamp);
  if (ylo >= yhi) return 0.0;

  const double a_hi = (v1 == kInf) ? kInf : sqrt_sb * (v1 - mu2(0)) / std::sqrt(2.0);
  const double a_lo = (u1 == -kInf) ? -kInf : sqrt_sb * (u1 - mu2(0)) / std::sqrt(2.0);

  auto integrand = [&](double y) {
    const double hi = (a_hi == kInf) ? 1.0 : std::erf((a_hi - sc * y) / sqrt_det);
    const double lo = (a_lo == -kInf) ? -1.0 : std::erf((a_lo - sc * y) / sqrt_det);
    return std::exp(-y * y) * (hi - lo);
  };

  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  const double integral =
      gauss_kronrod<double, 15>::integrate(integrand, ylo, yhi, 13, 1e-12, &error);
  return integral / (2.0 * std::sqrt(kPi));
}

namespace {

// Interval edges of a binning: [-inf, b0, b1, ..., +inf].
std::vector<double> binning_edges(const Binning& b) {
  std::vector<double> edges;
  edges.reserve(b.breakpoints.size() + 2);
  edges.push_back(-kInf);
  edges.insert(edges.end(), b.breakpoints.begin(), b.breakpoints.end());
  edges.push_back(kInf);
  return edges;
}

void check_binning(const Binning& b, const char* who) {
  if (b.signs.size() != b.breakpoints.size() + 1) {
    throw std::invalid_argument(std::string(who) + ": signs must have breakpoints+1 entries");
  }
  if (!std::is_sorted(b.breakpoints.begin(), b.breakpoints.end())) {
    throw std::invalid_argument(std::string(who) + ": breakpoints must be sorted");
  }
  for (int s : b.signs) {
    if (s != -1 && s != 1) {
      throw std::invalid_argument(std::string(who) + ": signs must be -1 or +1");
    }
  }
}

}  // namespace

double correlator(const LcgState& state, double theta, double phi,
                  const Binning& binning_a, const Binning& binning_b) {
  check_binning(binning_a, "correlator(binning_a)");
  check_binning(binning_b, "correlator(binning_b)");

  const Marginal2D marginal = homodyne_marginal(state, theta, phi);
  const std::vector<double> ea = binning_edges(binning_a);
  const std::vector<double> eb = binning_edges(binning_b);

  // The weights sum to 1 but their magnitudes grow like 1/(herald
  // probability); they multiply rectangle masses computed to absolute
  // accuracy ~1e-13, and past ~1e13 the cancellation leaves no correct
  // digits. (Errors of paired components largely cancel too, so circuits
  // heralding at 1e-11 — magnitude sums near 1e11 — still evaluate to
  // ~1e-4; the limit below keeps two orders of margin on each side.)
  double magnitude_sum = 0.0;
  for (const auto& comp : marginal.components) magnitude_sum += std::abs(comp.weight);
  if (magnitude_sum > 1e13) {
    throw CorrelatorUnreliable(
        "correlator: component weights too large for a trustworthy sum (herald probability "
        "near zero)");
  }

  // <AB> = sum_R a(R) b(R) mass(R) = -1 + 2 * mass(R+): the masses over all
  // rectangles sum to 1, so only the +1 rectangles need quadrature.
  double plus_mass = 0.0;
  for (std::size_t i = 0; i + 1 < ea.size(); ++i) {
    for (std::size_t j = 0; j + 1 < eb.size(); ++j) {
      if (binning_a.signs[i] * binning_b.signs[j] != 1) continue;
      for (const auto& comp : marginal.components) {
        plus_mass += comp.weight * rectangle_integral(comp.mu2, comp.sigma2, ea[i], ea[i + 1],
                                                      eb[j], eb[j + 1]);
      }
    }
  }

  const double value = -1.0 + 2.0 * plus_mass;
  if (std::abs(value) > 1.0 + 1e-6) {
    throw CorrelatorUnreliable("correlator: |<AB>| exceeds 1 beyond numerical tolerance");
  }
  return std::clamp(value, -1.0, 1.0);
}

std::array<double, 4> chsh_correlators(const LcgState& state, const BellMeasurement& meas) {
  return {
      correlator(state, meas.theta0, meas.phi0, meas.binning_a, meas.binning_b),
      correlator(state, meas.theta0, meas.phi1, meas.binning_a, meas.binning_b),
      correlator(state, meas.theta1, meas.phi0, meas.binning_a, meas.binning_b),
      correlator(state, meas.theta1, meas.phi1, meas.binning_a, meas.binning_b),
  };
}

double chsh_score(const LcgState& state, const BellMeasurement& meas) {
  const auto e = chsh_correlators(state, meas);
  return std::abs(e[0] + e[1] + e[2] - e[3]);
}

}  // namespace hpl
