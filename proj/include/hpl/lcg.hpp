#pragma once

#include "hpl/gaussian.hpp"

#include <utility>
#include <vector>

namespace hpl {

// Thrown when a requested detection outcome has probability below
// kHeraldProbFloor; callers that can retry (optimizers, search) catch it.
struct HeraldImpossible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a covariance matrix is too close to singular for the
// conditioning or quadrature formulas to be meaningful.
struct DegenerateCovariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Library-level probability floor for conditioning. The search
// environment applies its own, much looser failure threshold (1e-10).
inline constexpr double kHeraldProbFloor = 1e-30;

// Weighted linear combination of Gaussian states. Weights sum to 1 but
// individual weights may be negative (click conditioning creates them).
struct LcgComponent {
  double weight = 1.0;
  GaussianState state;
};

struct LcgState {
  int n_modes = 0;
  std::vector<LcgComponent> components;

  static LcgState from_gaussian(GaussianState state);
  double weight_sum() const;
};

enum class HeraldScheme { Click, SinglePhotonProjection };

struct HeraldMode {
  int mode = 0;  // 1-based
  HeraldScheme scheme = HeraldScheme::Click;
  double eta = 1.0;  // detector efficiency in [0,1]
};

// Per-mode heralding plan; the heralded modes are the last N-2 modes.
struct HeraldSpec {
  std::vector<HeraldMode> modes;

  // Same scheme and efficiency on every mode 3..n_modes.
  static HeraldSpec uniform(int n_modes, HeraldScheme scheme, double eta);
};

struct Conditioned {
  LcgState state;
  double probability = 0.0;
};

// Condition on a no-click outcome of a threshold detector with efficiency
// eta at the given mode; the mode is removed. Componentwise:
//   mu'    = TR_i[(Sigma^-1 + F)^-1 Sigma^-1 mu]
//   Sigma' = TR_i[(Sigma^-1 + F)^-1]
// with F's only nonzero 2x2 block equal to 4*eta/(2-eta) * I at the mode.
Conditioned condition_no_click(const LcgState& state, int mode, double eta);

// Condition on a click: rho_click = (rho_traced - p_noclick * rho_noclick)
// / p_click componentwise, doubling the component count.
Conditioned condition_click(const LcgState& state, int mode, double eta);

// Pure-loss channel of the given transmissivity on one mode (equivalent
// to a beam splitter of angle arccos(sqrt(tau)) against a vacuum ancilla
// that is then traced out).
LcgState apply_loss(const LcgState& state, int mode, double transmissivity);

// Approximate single-photon projection: mix the mode with a vacuum
// ancilla through B(0.1), then herald a click in the reflected (ancilla)
// port and a no-click in the transmitted port, both at efficiency eta.
// Probability is the product of the two stage probabilities.
Conditioned herald_single_photon_projection(const LcgState& state, int mode, double eta);

// Applies the per-mode schemes sequentially from the highest mode index
// down, leaving a 2-mode state; probability is the product of stages.
Conditioned herald_all(const LcgState& state, const HeraldSpec& spec);

}  // namespace hpl
