#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>

namespace hpl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Gate kinds, in standard notation: R (phase shifter), S1 (single-mode
// squeezer), B (beam splitter), S2 (two-mode squeezer).
enum class GateKind { PhaseShifter, SingleModeSqueezer, BeamSplitter, TwoModeSqueezer };

bool is_two_mode(GateKind kind);
bool is_squeezer(GateKind kind);
const char* kind_name(GateKind kind);  // "R", "S1", "B", "S2"

// A parameterized gate acting on one or two 1-based mode indices.
// param is an angle in radians for R/B and a dimensionless squeezing r
// for S1/S2. Parameters are real; modes[1] is 0 for single-mode gates.
struct Gate {
  GateKind kind = GateKind::PhaseShifter;
  std::array<int, 2> modes{0, 0};
  double param = 0.0;
};

Gate gate_r(int mode, double theta);
Gate gate_s1(int mode, double r);
Gate gate_b(int mode_a, int mode_b, double theta);
Gate gate_s2(int mode_a, int mode_b, double r);

// N-mode Gaussian state over interleaved quadratures (x1,p1,...,xN,pN)
// with [x,p] = i/2, so the vacuum has mu = 0 and sigma = I/4.
struct GaussianState {
  int n_modes = 0;
  Vec mu;
  Mat sigma;
};

// Vacuum state of n_modes modes (mu = 0, sigma = I/4).
GaussianState vacuum_state(int n_modes);

// Block-diagonal symplectic form, 2x2 blocks [[0,1],[-1,0]].
Mat omega(int n_modes);

// Throws std::invalid_argument if the gate's modes are out of range,
// repeated, or of the wrong arity for its kind.
void validate_gate(const Gate& gate, int n_modes);

// The 2N x 2N symplectic matrix of a gate, embedded at the gate's mode
// rows/columns (pairs 2i-1, 2i). Satisfies M * Omega * M^T = Omega.
Mat symplectic_matrix(const Gate& gate, int n_modes);

// mu' = M mu, sigma' = M sigma M^T (all gates here are displacement-free).
GaussianState apply_gate(const GaussianState& state, const Gate& gate);

// Removes the rows/columns of the given 1-based mode. The last remaining
// mode cannot be traced out.
GaussianState partial_trace(const GaussianState& state, int mode);

// True iff sigma + i*Omega/4 is positive semidefinite within eigenvalue
// tolerance -1e-9 (absorbs rounding drift over long gate sequences).
bool check_valid(const Mat& sigma);

}  // namespace hpl
