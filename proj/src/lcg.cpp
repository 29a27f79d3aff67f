#include "hpl/lcg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hpl {

namespace {

// No-click conditioning of a single Gaussian component, before tracing
// out the mode. F = c P^T P with c = 4 eta/(2-eta) and P the 2x2N
// selector of the mode's quadratures, so Woodbury gives
//   (Sigma^-1 + F)^-1          = Sigma - c S_c K^-1 S_c^T
//   (Sigma^-1 + F)^-1 Sigma^-1 mu = mu - c S_c K^-1 mu_m
// with S_c the mode's columns of Sigma, mu_m its mean slice, and
// K = I + c Sigma_mm; a 2x2 solve replaces any full inversion. The
// probability reduces through det(I + Sigma F) = det(K) to
//   p = 2/(2-eta) det(K)^{-1/2} exp(-c/2 mu_m^T K^-1 mu_m).
struct NoClickComponent {
  GaussianState state;  // mode still present
  double probability = 0.0;
};

NoClickComponent no_click_component(const GaussianState& s, int mode, double eta) {
  const int i = 2 * (mode - 1);
  const double c = 4.0 * eta / (2.0 - eta);

  // Reject covariances too degenerate to condition on.
  Eigen::LDLT<Mat> ldlt(s.sigma);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < 1e-140)
    throw DegenerateCovariance("conditioning on a singular covariance matrix");

  const Eigen::Matrix2d sigma_mm = s.sigma.block<2, 2>(i, i);
  const Eigen::Matrix2d k = Eigen::Matrix2d::Identity() + c * sigma_mm;
  const Eigen::Matrix2d k_inv = k.inverse();
  const Eigen::Vector2d mu_m = s.mu.segment<2>(i);
  const Mat sigma_cols = s.sigma.middleCols<2>(i);

  NoClickComponent out;
  out.state.n_modes = s.n_modes;
  out.state.mu = s.mu - c * (sigma_cols * (k_inv * mu_m));
  out.state.sigma = s.sigma - c * (sigma_cols * k_inv * sigma_cols.transpose());
  out.probability = 2.0 / (2.0 - eta) / std::sqrt(k.determinant()) *
                    std::exp(-0.5 * c * mu_m.dot(k_inv * mu_m));
  return out;
}

void validate_conditioning(const LcgState& state, int mode, double eta) {
  if (mode < 1 || mode > state.n_modes) throw std::invalid_argument("conditioning: bad mode");
  if (state.n_modes < 2)
    throw std::invalid_argument("conditioning: would leave an empty state");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("detector efficiency must be in [0,1]");
  if (state.components.empty()) throw std::invalid_argument("conditioning: empty state");
}

void renormalize(LcgState& state, double total) {
  for (auto& comp : state.components) comp.weight /= total;
}

}  // namespace

LcgState LcgState::from_gaussian(GaussianState state) {
  LcgState out;
  out.n_modes = state.n_modes;
  out.components.push_back({1.0, std::move(state)});
  return out;
}

double LcgState::weight_sum() const {
  double total = 0.0;
  for (const auto& comp : components) total += comp.weight;
  return total;
}

HeraldSpec HeraldSpec::uniform(int n_modes, HeraldScheme scheme, double eta) {
  HeraldSpec spec;
  for (int m = 3; m <= n_modes; ++m) spec.modes.push_back({m, scheme, eta});
  return spec;
}

Conditioned condition_no_click(const LcgState& state, int mode, double eta) {
  validate_conditioning(state, mode, eta);
  Conditioned out;
  out.state.n_modes = state.n_modes - 1;
  double total = 0.0;
  for (const auto& comp : state.components) {
    NoClickComponent nc = no_click_component(comp.state, mode, eta);
    total += comp.weight * nc.probability;
    out.state.components.push_back(
        {comp.weight * nc.probability, partial_trace(nc.state, mode)});
  }
  if (total < kHeraldProbFloor)
    throw HeraldImpossible("no-click probability below " + std::to_string(kHeraldProbFloor));
  renormalize(out.state, total);
  out.probability = total;
  return out;
}

Conditioned condition_click(const LcgState& state, int mode, double eta) {
  validate_conditioning(state, mode, eta);
  Conditioned out;
  out.state.n_modes = state.n_modes - 1;
  double p_no_click = 0.0;
  for (const auto& comp : state.components) {
    NoClickComponent nc = no_click_component(comp.state, mode, eta);
    p_no_click += comp.weight * nc.probability;
    out.state.components.push_back({comp.weight, partial_trace(comp.state, mode)});
    out.state.components.push_back(
        {-comp.weight * nc.probability, partial_trace(nc.state, mode)});
  }
  const double p_click = 1.0 - p_no_click;
  if (p_click < kHeraldProbFloor)
    throw HeraldImpossible("click probability below " + std::to_string(kHeraldProbFloor));
  renormalize(out.state, p_click);
  out.probability = p_click;
  return out;
}

LcgState apply_loss(const LcgState& state, int mode, double transmissivity) {
  if (mode < 1 || mode > state.n_modes) throw std::invalid_argument("apply_loss: bad mode");
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
    throw std::invalid_argument("transmissivity must be in [0,1]");
  const double root = std::sqrt(transmissivity);
  const int i = 2 * (mode - 1);
  LcgState out = state;
  for (auto& comp : out.components) {
    GaussianState& s = comp.state;
    // Scale the mode's cross-covariances by sqrt(tau)...
    s.sigma.middleRows<2>(i) *= root;
    s.sigma.middleCols<2>(i) *= root;
    // ...which scaled the mode block by tau; mix in the vacuum share.
    s.sigma.block<2, 2>(i, i) += (1.0 - transmissivity) / 4.0 * Eigen::Matrix2d::Identity();
    s.mu.segment<2>(i) *= root;
  }
  return out;
}

Conditioned herald_single_photon_projection(const LcgState& state, int mode, double eta) {
  validate_conditioning(state, mode, eta);
  // Mix the mode with a vacuum ancilla appended as the last mode.
  LcgState mixed;
  mixed.n_modes = state.n_modes + 1;
  const Gate tap = gate_b(mode, state.n_modes + 1, 0.1);
  for (const auto& comp : state.components) {
    GaussianState widened;
    widened.n_modes = comp.state.n_modes + 1;
    widened.mu = Vec::Zero(2 * widened.n_modes);
    widened.mu.head(2 * comp.state.n_modes) = comp.state.mu;
    widened.sigma = Mat::Identity(2 * widened.n_modes, 2 * widened.n_modes) / 4.0;
    widened.sigma.topLeftCorner(2 * comp.state.n_modes, 2 * comp.state.n_modes) =
        comp.state.sigma;
    mixed.components.push_back({comp.weight, apply_gate(widened, tap)});
  }
  // Click in the reflected (ancilla) port, then no-click in the
  // transmitted port.
  Conditioned clicked = condition_click(mixed, state.n_modes + 1, eta);
  Conditioned quiet = condition_no_click(clicked.state, mode, eta);
  quiet.probability *= clicked.probability;
  return quiet;
}

Conditioned herald_all(const LcgState& state, const HeraldSpec& spec) {
  std::vector<HeraldMode> plan = spec.modes;
  std::sort(plan.begin(), plan.end(),
            [](const HeraldMode& a, const HeraldMode& b) { return a.mode > b.mode; });
  const int expected = state.n_modes - 2;
  if (static_cast<int>(plan.size()) != std::max(expected, 0))
    throw std::invalid_argument("herald spec must cover exactly modes 3..N");
  for (std::size_t k = 0; k < plan.size(); ++k) {
    if (plan[k].mode != state.n_modes - static_cast<int>(k))
      throw std::invalid_argument("herald spec must cover exactly modes 3..N");
  }

  Conditioned out{state, 1.0};
  for (const auto& entry : plan) {
    Conditioned stage = entry.scheme == HeraldScheme::Click
                            ? condition_click(out.state, entry.mode, entry.eta)
                            : herald_single_photon_projection(out.state, entry.mode, entry.eta);
    out.state = std::move(stage.state);
    out.probability *= stage.probability;
  }
  return out;
}

}  // namespace hpl
