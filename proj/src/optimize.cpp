#include "hpl/optimize.hpp"

#include "hpl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hpl {

namespace {

// Gate parameters flattened in circuit order.
Eigen::VectorXd circuit_params(const Circuit& circuit) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(circuit.gates.size()));
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    x(static_cast<Eigen::Index>(i)) = circuit.gates[i].param;
  }
  return x;
}

Circuit with_params(Circuit circuit, const Eigen::VectorXd& x) {
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    circuit.gates[i].param = x(static_cast<Eigen::Index>(i));
  }
  return circuit;
}

// Clamp squeezing magnitudes to the dB cap; angles pass through.
Eigen::VectorXd clamp_params(const Circuit& circuit, Eigen::VectorXd x, double cap_r) {
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    if (is_squeezer(circuit.gates[i].kind)) {
      auto& v = x(static_cast<Eigen::Index>(i));
      v = std::clamp(v, -cap_r, cap_r);
    }
  }
  return x;
}

// Quadratic penalty for squeezings past the cap, keeping the objective
// smooth where the clamp is active.
double cap_penalty(const Circuit& circuit, const Eigen::VectorXd& x, double cap_r) {
  double penalty = 0.0;
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    if (is_squeezer(circuit.gates[i].kind)) {
      const double excess = std::abs(x(static_cast<Eigen::Index>(i))) - cap_r;
      if (excess > 0.0) penalty += excess * excess;
    }
  }
  return penalty;
}

Eigen::VectorXd simplex_steps(const Circuit& circuit, const OptimizeConfig& config) {
  Eigen::VectorXd steps(static_cast<Eigen::Index>(circuit.gates.size()));
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    steps(static_cast<Eigen::Index>(i)) =
        is_squeezer(circuit.gates[i].kind) ? config.squeeze_step : config.angle_step;
  }
  return steps;
}

}  // namespace

double squeeze_db(double r) { return 20.0 * r / std::log(10.0); }

double squeeze_cap_r(double cap_db) { return cap_db * std::log(10.0) / 20.0; }

OptimizedCircuit maximize_chsh(const Circuit& circuit, const BellMeasurement& meas,
                               const OptimizeConfig& config, const EvalOptions& options) {
  validate_circuit(circuit);
  if (circuit.gates.empty()) {
    OptimizedCircuit out;
    out.circuit = circuit;
    const EvalResult r = evaluate_circuit(circuit, meas, options);
    out.chsh = r.chsh;
    out.herald_probability = r.herald_probability;
    return out;
  }

  const double cap_r = squeeze_cap_r(config.squeeze_cap_db);

  // Minimized objective: -chsh at the clamped parameters, plus a smooth
  // cap penalty. Heralding failure inside the search is worth +1 (chsh 0)
  // rather than an exception so the simplex can move away from it.
  auto objective = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd clamped = clamp_params(circuit, x, cap_r);
    double chsh = 0.0;
    try {
      chsh = evaluate_circuit(with_params(circuit, clamped), meas, options).chsh;
    } catch (const HeraldImpossible&) {
      chsh = 0.0;
    } catch (const DegenerateCovariance&) {
      chsh = 0.0;  // numerically useless corner; steer the simplex away
    } catch (const CorrelatorUnreliable&) {
      chsh = 0.0;
    }
    return -chsh + 1e6 * cap_penalty(circuit, x, cap_r);
  };

  NelderMeadConfig nm;
  nm.max_iterations = config.max_iterations;
  nm.simplex_tolerance = config.simplex_tolerance;
  nm.initial_steps = simplex_steps(circuit, config);

  std::mt19937_64 rng(split_seed(config.seed, 0x0f7));
  std::uniform_real_distribution<double> jitter(-config.restart_jitter, config.restart_jitter);

  const Eigen::VectorXd x0 = clamp_params(circuit, circuit_params(circuit), cap_r);
  for (int attempt = 0; attempt <= config.max_restarts; ++attempt) {
    Eigen::VectorXd start = x0;
    if (attempt > 0) {
      for (Eigen::Index i = 0; i < start.size(); ++i) start(i) += jitter(rng);
      start = clamp_params(circuit, start, cap_r);
    }
    try {
      evaluate_circuit(with_params(circuit, start), meas, options);
      const NelderMeadResult best = nelder_mead(objective, start, nm);

      OptimizedCircuit out;
      out.circuit = with_params(circuit, clamp_params(circuit, best.x, cap_r));
      const EvalResult fresh = evaluate_circuit(out.circuit, meas, options);
      out.chsh = fresh.chsh;
      out.herald_probability = fresh.herald_probability;
      return out;
    } catch (const HeraldImpossible&) {
      // Heralding fails at this start (or at the converged point); jitter
      // and retry.
    } catch (const DegenerateCovariance&) {
    } catch (const CorrelatorUnreliable&) {
    }
  }
  throw OptimizationInfeasible("maximize_chsh: heralding failed at every restart");
}

OptimizedCircuit maximize_herald_prob(const Circuit& circuit, const BellMeasurement& meas,
                                      double chsh_floor, const OptimizeConfig& config) {
  validate_circuit(circuit);
  const EvalResult at_start = evaluate_circuit(circuit, meas);
  // Same 1e-3 slack as the returned-circuit guarantee, so a start point a
  // hair under the floor can still be pushed over it by the penalty.
  if (at_start.chsh < chsh_floor - 1e-3) {
    throw OptimizationInfeasible("maximize_herald_prob: start point is below the CHSH floor");
  }
  if (circuit.gates.empty()) {
    OptimizedCircuit out;
    out.circuit = circuit;
    out.chsh = at_start.chsh;
    out.herald_probability = at_start.herald_probability;
    return out;
  }

  const double cap_r = squeeze_cap_r(config.squeeze_cap_db);

  // Minimized objective: -log p plus a heavy quadratic penalty for
  // dipping below the CHSH floor.
  auto objective = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd clamped = clamp_params(circuit, x, cap_r);
    double log_p = std::log(kHeraldProbFloor);
    double chsh = 0.0;
    try {
      const EvalResult r = evaluate_circuit(with_params(circuit, clamped), meas);
      log_p = std::log(std::max(r.herald_probability, kHeraldProbFloor));
      chsh = r.chsh;
    } catch (const HeraldImpossible&) {
    } catch (const DegenerateCovariance&) {
    } catch (const CorrelatorUnreliable&) {
    }
    const double shortfall = std::max(0.0, chsh_floor - chsh);
    return -log_p + 1e6 * shortfall * shortfall + 1e6 * cap_penalty(circuit, x, cap_r);
  };

  NelderMeadConfig nm;
  nm.max_iterations = config.max_iterations;
  nm.simplex_tolerance = config.simplex_tolerance;
  nm.initial_steps = simplex_steps(circuit, config);

  const NelderMeadResult best =
      nelder_mead(objective, clamp_params(circuit, circuit_params(circuit), cap_r), nm);

  OptimizedCircuit out;
  out.circuit = with_params(circuit, clamp_params(circuit, best.x, cap_r));
  const EvalResult fresh = evaluate_circuit(out.circuit, meas);
  out.chsh = fresh.chsh;
  out.herald_probability = fresh.herald_probability;
  if (out.chsh < chsh_floor - 1e-3) {
    // The penalty keeps optima at or near the floor; a larger miss means
    // the floor is unattainable from this start.
    throw OptimizationInfeasible("maximize_herald_prob: optimizer left the CHSH floor");
  }
  return out;
}

SweepResult sweep_distance(const Circuit& circuit, const BellMeasurement& meas, double km_max,
                           double km_step, const OptimizeConfig& config) {
  if (!(km_step > 0.0) || km_max < 0.0) {
    throw std::invalid_argument("sweep_distance: need km_step > 0 and km_max >= 0");
  }
  SweepResult result;
  Circuit current = circuit;
  for (double d = 0.0; d <= km_max + 1e-9; d += km_step) {
    EvalOptions options;
    options.loss_transmissivity = std::pow(10.0, -0.02 * d);  // 0.2 dB/km fiber
    const OptimizedCircuit step = maximize_chsh(current, meas, config, options);
    current = step.circuit;  // warm start the next distance

    SweepPoint point;
    point.x = d;
    point.chsh = step.chsh;
    point.herald_probability = step.herald_probability;
    const Eigen::VectorXd params = circuit_params(current);
    point.params.assign(params.data(), params.data() + params.size());
    result.points.push_back(std::move(point));
  }
  return result;
}

SweepResult sweep_efficiency(const Circuit& circuit, const BellMeasurement& meas,
                             const std::vector<double>& eta_grid) {
  SweepResult result;
  for (double eta : eta_grid) {
    if (!(eta > 0.0) || eta > 1.0) {
      throw std::invalid_argument("sweep_efficiency: eta must lie in (0, 1]");
    }
    Circuit c = circuit;
    for (HeraldMode& h : c.herald.modes) h.eta = eta;
    const EvalResult r = evaluate_circuit(c, meas);

    SweepPoint point;
    point.x = eta;
    point.chsh = r.chsh;
    point.herald_probability = r.herald_probability;
    const Eigen::VectorXd params = circuit_params(c);
    point.params.assign(params.data(), params.data() + params.size());
    result.points.push_back(std::move(point));
  }
  return result;
}

}  // namespace hpl
