#pragma once

#include "hpl/circuit.hpp"

#include <string>

namespace hpl {

// Thrown on malformed circuit files (bad JSON, unknown fields, wrong
// format version, invalid values). The CLI maps this to exit code 2.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kCircuitFormatVersion = 1;

// Serialized circuit document ("format": 1):
//   n_modes, gates: [{kind: "R"|"S1"|"B"|"S2", modes: [..1-based..],
//   param}], herald: {scheme: "click"|"single_photon_projection", eta,
//   modes}, measurement: {theta0, theta1, phi0, phi1, binning: "sign"}.
// Unknown fields are rejected; mode indices are 1-based. Parsing the
// serialized form reproduces the value exactly.
struct CircuitFile {
  Circuit circuit;
  BellMeasurement measurement;
};

std::string serialize_circuit(const CircuitFile& file);
CircuitFile parse_circuit(const std::string& text);

CircuitFile load_circuit_file(const std::string& path);
void save_circuit_file(const std::string& path, const CircuitFile& file);

}  // namespace hpl
