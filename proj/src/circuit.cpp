#include "hpl/circuit.hpp"

#include <stdexcept>
#include <string>

namespace hpl {

void validate_circuit(const Circuit& circuit) {
  if (circuit.n_modes < 2) {
    throw std::invalid_argument("circuit: n_modes must be at least 2");
  }
  for (const Gate& g : circuit.gates) {
    validate_gate(g, circuit.n_modes);
  }
  if (circuit.herald.modes.size() != static_cast<std::size_t>(circuit.n_modes - 2)) {
    throw std::invalid_argument("circuit: herald must cover exactly modes 3..n_modes");
  }
  // The heralding plan must name each of modes 3..N exactly once.
  std::vector<bool> seen(static_cast<std::size_t>(circuit.n_modes) + 1, false);
  for (const HeraldMode& h : circuit.herald.modes) {
    if (h.mode < 3 || h.mode > circuit.n_modes) {
      throw std::invalid_argument("circuit: herald mode " + std::to_string(h.mode) +
                                  " outside 3..n_modes");
    }
    if (seen[static_cast<std::size_t>(h.mode)]) {
      throw std::invalid_argument("circuit: herald mode " + std::to_string(h.mode) + " repeated");
    }
    seen[static_cast<std::size_t>(h.mode)] = true;
    if (!(h.eta > 0.0) || h.eta > 1.0) {
      throw std::invalid_argument("circuit: herald efficiency must lie in (0, 1]");
    }
  }
}

GaussianState run_gates(const Circuit& circuit) {
  validate_circuit(circuit);
  GaussianState state = vacuum_state(circuit.n_modes);
  for (const Gate& g : circuit.gates) {
    state = apply_gate(state, g);
  }
  return state;
}

Conditioned herald_circuit(const Circuit& circuit) {
  const GaussianState prepared = run_gates(circuit);
  return herald_all(LcgState::from_gaussian(prepared), circuit.herald);
}

EvalResult evaluate_circuit(const Circuit& circuit, const BellMeasurement& meas,
                            const EvalOptions& options) {
  if (!(options.loss_transmissivity > 0.0) || options.loss_transmissivity > 1.0) {
    throw std::invalid_argument("evaluate_circuit: transmissivity must lie in (0, 1]");
  }
  Conditioned heralded = herald_circuit(circuit);
  if (options.loss_transmissivity < 1.0) {
    heralded.state = apply_loss(heralded.state, 2, options.loss_transmissivity);
  }
  EvalResult result;
  result.herald_probability = heralded.probability;
  result.state = heralded.state;
  result.correlators = chsh_correlators(heralded.state, meas);
  result.chsh = std::abs(result.correlators[0] + result.correlators[1] + result.correlators[2] -
                         result.correlators[3]);
  return result;
}

}  // namespace hpl
