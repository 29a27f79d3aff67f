#pragma once

#include "hpl/chsh.hpp"

namespace hpl {

// An ordered gate list on n_modes modes plus the heralding plan for the
// last N-2 modes. Gates apply sequentially to the N-mode vacuum.
struct Circuit {
  int n_modes = 0;
  std::vector<Gate> gates;
  HeraldSpec herald;
};

void validate_circuit(const Circuit& circuit);

// Applies the gate list to the vacuum.
GaussianState run_gates(const Circuit& circuit);

// run_gates followed by herald_all; result has 2 modes.
Conditioned herald_circuit(const Circuit& circuit);

struct EvalOptions {
  // Transmissivity of the fiber on Bob's mode (mode 2), applied after
  // heralding; 1.0 means no loss.
  double loss_transmissivity = 1.0;
};

struct EvalResult {
  double chsh = 0.0;
  double herald_probability = 1.0;
  std::array<double, 4> correlators{};  // E00, E01, E10, E11
  LcgState state;                       // the measured 2-mode state
};

EvalResult evaluate_circuit(const Circuit& circuit, const BellMeasurement& meas,
                            const EvalOptions& options = {});

}  // namespace hpl
