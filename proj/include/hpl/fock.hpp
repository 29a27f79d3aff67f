#pragma once

#include "hpl/gaussian.hpp"
#include "hpl/lcg.hpp"

#include <complex>
#include <utility>
#include <vector>

namespace hpl {

// Thrown by fock_apply when the truncation loses more than 1e-6 of the
// norm; retry with a larger cutoff.
struct CutoffTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncated-Fock-space pure state: amplitudes indexed row-major by the
// per-mode photon numbers 0..cutoff. Brute-force oracle for the Gaussian
// machinery on small instances; not built for performance.
struct FockState {
  int n_modes = 0;
  int cutoff = 0;  // maximum photon number per mode
  Eigen::VectorXcd amps;
  double leakage = 0.0;  // cumulative norm lost to truncation

  static FockState vacuum(int n_modes, int cutoff);
  int dim_per_mode() const { return cutoff + 1; }
};

// Weighted ensemble of pure states (mixtures arise from heralding with
// inefficient detectors). Weights are probabilities and sum to 1.
using FockEnsemble = std::vector<std::pair<double, FockState>>;

// Applies the unitary exp of the gate's generator, computed by dense
// matrix exponential on a padded subspace and projected back. Norm lost
// beyond the cutoff is added to leakage; > 1e-6 raises CutoffTooSmall.
FockState fock_apply(const Gate& gate, const FockState& state, int cutoff);

enum class HeraldOutcome { Click, NoClick };

// Threshold detection with efficiency eta: no-click applies the diagonal
// operator (1-eta)^n on the mode, click its complement; the mode is then
// traced out, leaving an ensemble over its photon numbers.
std::pair<FockEnsemble, double> fock_herald(const FockEnsemble& state, int mode,
                                            HeraldOutcome outcome, double eta);
std::pair<FockEnsemble, double> fock_herald(const FockState& state, int mode,
                                            HeraldOutcome outcome, double eta);

// Single-photon projection, mirroring the Gaussian-side composite:
// vacuum ancilla, B(0.1), click on the ancilla, no-click on the mode.
std::pair<FockEnsemble, double> fock_herald_single_photon(const FockEnsemble& state,
                                                          int mode, double eta);

// Appends a vacuum mode at index n_modes+1.
FockState fock_append_vacuum(const FockState& state);

// First and second quadrature moments (mu, Sigma) in the same convention
// as GaussianState, computed from ladder-operator expectations.
std::pair<Vec, Mat> fock_moments(const FockState& state);
std::pair<Vec, Mat> fock_moments(const FockEnsemble& state);

// Sign-binned correlator of a 2-mode state at rotated quadratures,
// via half-line overlap matrices of Hermite functions. Throws
// std::runtime_error if the four quadrant masses miss 1 by > 1e-8.
double fock_sign_correlator(const FockState& state, double theta, double phi);
double fock_sign_correlator(const FockEnsemble& state, double theta, double phi);

}  // namespace hpl
