#pragma once

#include "hpl/circuit.hpp"
#include "hpl/nelder_mead.hpp"

#include <cstdint>

namespace hpl {

// Thrown when every optimizer restart fails to produce an evaluable
// circuit, or when a requested constraint cannot be met.
struct OptimizationInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OptimizeConfig {
  int max_iterations = 4000;
  double simplex_tolerance = 1e-8;
  // Squeezing magnitude cap in dB; r is bounded by cap * ln(10) / 20.
  double squeeze_cap_db = 10.0;
  // Initial simplex offsets: parameter scales are O(1) angles and
  // O(0.5) squeezings.
  double angle_step = 0.1;
  double squeeze_step = 0.05;
  // When heralding fails at the start point, retry from a uniformly
  // jittered start up to max_restarts times.
  int max_restarts = 20;
  double restart_jitter = 0.2;
  std::uint64_t seed = 1;
};

// dB of a squeezing parameter: 20 r / ln 10.
double squeeze_db(double r);
// Inverse cap: the r bound corresponding to a dB cap.
double squeeze_cap_r(double cap_db);

struct OptimizedCircuit {
  Circuit circuit;
  double chsh = 0.0;
  double herald_probability = 0.0;
};

// Maximizes the CHSH score over every gate parameter (measurement angles
// stay fixed). Squeezing parameters respect the dB cap. The reported
// score is a fresh evaluation of the returned circuit.
OptimizedCircuit maximize_chsh(const Circuit& circuit, const BellMeasurement& meas,
                               const OptimizeConfig& config = {},
                               const EvalOptions& options = {});

// Maximizes log(herald probability) - 1e6 * max(0, floor - chsh)^2; the
// returned circuit keeps chsh >= chsh_floor - 1e-3. Throws
// OptimizationInfeasible when the floor is not met at the start point.
OptimizedCircuit maximize_herald_prob(const Circuit& circuit, const BellMeasurement& meas,
                                      double chsh_floor, const OptimizeConfig& config = {});

struct SweepPoint {
  double x = 0.0;  // distance in km, or detector efficiency
  double chsh = 0.0;
  double herald_probability = 0.0;
  std::vector<double> params;  // gate parameters used at this point
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

// Distance sweep at 0.2 dB/km on Bob's mode: tau = 10^(-0.02 d). Gate
// parameters are re-optimized at every step, warm-started from the
// previous step, under the squeeze cap.
SweepResult sweep_distance(const Circuit& circuit, const BellMeasurement& meas,
                           double km_max, double km_step, const OptimizeConfig& config = {});

// Efficiency sweep with gate parameters held fixed: every heralded
// mode's detector efficiency is replaced by each grid value in turn.
SweepResult sweep_efficiency(const Circuit& circuit, const BellMeasurement& meas,
                             const std::vector<double>& eta_grid);

}  // namespace hpl
