#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hpl/circuit_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

using namespace hpl;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const char* kMinimal = R"({
  "format": 1,
  "n_modes": 4,
  "gates": [
    {"kind": "S2", "modes": [1, 2], "param": 0.5},
    {"kind": "B", "modes": [2, 4], "param": 1.1},
    {"kind": "R", "modes": [3], "param": -0.2},
    {"kind": "S1", "modes": [4], "param": 0.3}
  ],
  "herald": {"scheme": "click", "eta": 0.8, "modes": [3, 4]},
  "measurement": {"theta0": 0.0, "theta1": 1.5707963267948966,
                  "phi0": -0.7853981633974483, "phi1": 0.7853981633974483,
                  "binning": "sign"}
})";

}  // namespace

TEST_CASE("parse reads gates, herald, and measurement") {
  const CircuitFile file = parse_circuit(kMinimal);
  CHECK(file.circuit.n_modes == 4);
  REQUIRE(file.circuit.gates.size() == 4);
  CHECK(file.circuit.gates[0].kind == GateKind::TwoModeSqueezer);
  CHECK(file.circuit.gates[0].modes[0] == 1);
  CHECK(file.circuit.gates[0].modes[1] == 2);
  CHECK(file.circuit.gates[0].param == 0.5);
  CHECK(file.circuit.gates[2].kind == GateKind::PhaseShifter);
  CHECK(file.circuit.gates[2].modes[0] == 3);
  REQUIRE(file.circuit.herald.modes.size() == 2);
  CHECK(file.circuit.herald.modes[0].scheme == HeraldScheme::Click);
  CHECK(file.circuit.herald.modes[0].eta == 0.8);
  CHECK(file.measurement.theta1 == doctest::Approx(1.5707963267948966).epsilon(1e-16));
  CHECK(file.measurement.binning_a.breakpoints == sign_binning().breakpoints);
}

TEST_CASE("serialize then parse is the identity") {
  const CircuitFile file = parse_circuit(kMinimal);
  const std::string text = serialize_circuit(file);
  const CircuitFile again = parse_circuit(text);
  REQUIRE(again.circuit.gates.size() == file.circuit.gates.size());
  for (std::size_t i = 0; i < file.circuit.gates.size(); ++i) {
    CHECK(again.circuit.gates[i].kind == file.circuit.gates[i].kind);
    CHECK(again.circuit.gates[i].modes[0] == file.circuit.gates[i].modes[0]);
    CHECK(again.circuit.gates[i].param == file.circuit.gates[i].param);  // bit-exact
  }
  CHECK(again.circuit.herald.modes[1].eta == file.circuit.herald.modes[1].eta);
  CHECK(again.measurement.phi0 == file.measurement.phi0);
}

TEST_CASE("bundled circuit files parse and round-trip") {
  for (const char* name : {"fig1.json", "table3_s1_row1.json", "table4_s3_row2_n6.json"}) {
    const std::string text = slurp(std::string(HPL_DATA_DIR) + "/" + name);
    const CircuitFile file = parse_circuit(text);
    CHECK(file.circuit.n_modes >= 4);
    const CircuitFile again = parse_circuit(serialize_circuit(file));
    CHECK(again.circuit.gates.size() == file.circuit.gates.size());
  }
}

TEST_CASE("save and load through a file") {
  const CircuitFile file = parse_circuit(kMinimal);
  const std::string path = std::string(HPL_BUILD_DIR) + "/io_roundtrip.json";
  save_circuit_file(path, file);
  const CircuitFile again = load_circuit_file(path);
  CHECK(again.circuit.gates[1].param == 1.1);
  std::remove(path.c_str());
}

TEST_CASE("key order inside objects does not matter") {
  const char* reordered = R"({
    "measurement": {"binning": "sign", "phi1": 0.785, "phi0": -0.785,
                    "theta1": 1.5707, "theta0": 0.0},
    "herald": {"modes": [3, 4], "eta": 1.0, "scheme": "single_photon_projection"},
    "gates": [{"param": 0.4, "kind": "S2", "modes": [1, 2]}],
    "n_modes": 4,
    "format": 1
  })";
  const CircuitFile file = parse_circuit(reordered);
  CHECK(file.circuit.herald.modes[0].scheme == HeraldScheme::SinglePhotonProjection);
}

TEST_CASE("unknown fields are rejected everywhere") {
  auto with = [](const std::string& needle, const std::string& extra) {
    std::string text = kMinimal;
    const std::size_t at = text.find(needle);
    REQUIRE(at != std::string::npos);
    text.insert(at, extra);
    return text;
  };
  // Top level, gate, herald, and measurement objects.
  CHECK_THROWS_AS(parse_circuit(with("\"format\"", "\"comment\": \"hi\", ")), ParseError);
  CHECK_THROWS_AS(parse_circuit(with("\"kind\": \"S2\"", "\"phase\": 0, ")), ParseError);
  CHECK_THROWS_AS(parse_circuit(with("\"scheme\"", "\"dark_counts\": 0, ")), ParseError);
  CHECK_THROWS_AS(parse_circuit(with("\"binning\"", "\"offset\": 0, ")), ParseError);
}

TEST_CASE("missing fields are rejected") {
  std::string no_herald = kMinimal;
  const std::size_t at = no_herald.find("\"herald\"");
  const std::size_t end = no_herald.find("\"measurement\"");
  no_herald.erase(at, end - at);
  CHECK_THROWS_AS(parse_circuit(no_herald), ParseError);
}

TEST_CASE("malformed documents raise ParseError with context") {
  CHECK_THROWS_AS(parse_circuit("not json at all"), ParseError);
  CHECK_THROWS_AS(parse_circuit("[1, 2, 3]"), ParseError);

  auto swap = [](const std::string& from, const std::string& to) {
    std::string text = kMinimal;
    const std::size_t at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
  };
  CHECK_THROWS_AS(parse_circuit(swap("\"format\": 1", "\"format\": 2")), ParseError);
  CHECK_THROWS_AS(parse_circuit(swap("\"click\"", "\"geiger\"")), ParseError);
  CHECK_THROWS_AS(parse_circuit(swap("\"sign\"", "\"ternary\"")), ParseError);
  CHECK_THROWS_AS(parse_circuit(swap("\"S2\"", "\"CZ\"")), ParseError);
  CHECK_THROWS_AS(parse_circuit(swap("[1, 2]", "[0, 2]")), ParseError);     // modes are 1-based
  CHECK_THROWS_AS(parse_circuit(swap("[1, 2]", "[1, 5]")), ParseError);     // out of range
  CHECK_THROWS_AS(parse_circuit(swap("[3]", "[3, 4]")), ParseError);        // R takes one mode
  CHECK_THROWS_AS(parse_circuit(swap("\"modes\": [3, 4]", "\"modes\": [3]")), ParseError);
  CHECK_THROWS_AS(parse_circuit(swap("\"modes\": [3, 4]", "\"modes\": [3, 3]")), ParseError);
  CHECK_THROWS_AS(parse_circuit(swap("\"eta\": 0.8", "\"eta\": 0.0")), ParseError);
  CHECK_THROWS_AS(parse_circuit(swap("\"eta\": 0.8", "\"eta\": 1.5")), ParseError);
  CHECK_THROWS_AS(parse_circuit(swap("\"param\": 0.5", "\"param\": \"big\"")), ParseError);
}

TEST_CASE("serialize refuses what format 1 cannot express") {
  CircuitFile mixed = parse_circuit(kMinimal);
  mixed.circuit.herald.modes[1].eta = 0.5;  // heterogeneous efficiencies
  CHECK_THROWS_AS(serialize_circuit(mixed), std::invalid_argument);

  CircuitFile coarse = parse_circuit(kMinimal);
  coarse.measurement.binning_a.breakpoints = {-1.0, 1.0};
  coarse.measurement.binning_a.signs = {-1, 1, -1};
  CHECK_THROWS_AS(serialize_circuit(coarse), std::invalid_argument);
}
