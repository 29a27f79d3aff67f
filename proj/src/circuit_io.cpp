#include "hpl/circuit_io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace hpl {

namespace {

using nlohmann::json;

// Strict field-set check: every key must be one of `allowed`.
void require_fields(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw ParseError(std::string(where) + ": expected an object");
  }
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (ok.count(item.key()) == 0) {
      throw ParseError(std::string(where) + ": unknown field \"" + item.key() + "\"");
    }
  }
  for (const char* key : allowed) {
    if (!obj.contains(key)) {
      throw ParseError(std::string(where) + ": missing field \"" + key + "\"");
    }
  }
}

double get_number(const json& obj, const char* where, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ParseError(std::string(where) + ": field \"" + key + "\" must be a number");
  }
  return v.get<double>();
}

int get_int(const json& obj, const char* where, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ParseError(std::string(where) + ": field \"" + key + "\" must be an integer");
  }
  return v.get<int>();
}

GateKind parse_kind(const std::string& s, const char* where) {
  if (s == "R") return GateKind::PhaseShifter;
  if (s == "S1") return GateKind::SingleModeSqueezer;
  if (s == "B") return GateKind::BeamSplitter;
  if (s == "S2") return GateKind::TwoModeSqueezer;
  throw ParseError(std::string(where) + ": unknown gate kind \"" + s + "\"");
}

HeraldScheme parse_scheme(const std::string& s, const char* where) {
  if (s == "click") return HeraldScheme::Click;
  if (s == "single_photon_projection") return HeraldScheme::SinglePhotonProjection;
  throw ParseError(std::string(where) + ": unknown herald scheme \"" + s + "\"");
}

const char* scheme_name(HeraldScheme scheme) {
  return scheme == HeraldScheme::Click ? "click" : "single_photon_projection";
}

}  // namespace

std::string serialize_circuit(const CircuitFile& file) {
  const Circuit& c = file.circuit;

  json gates = json::array();
  for (const Gate& g : c.gates) {
    json modes = json::array();
    modes.push_back(g.modes[0]);
    if (is_two_mode(g.kind)) modes.push_back(g.modes[1]);
    gates.push_back({{"kind", kind_name(g.kind)}, {"modes", modes}, {"param", g.param}});
  }

  // Format 1 stores one scheme/eta for the whole heralding plan, so a
  // heterogeneous plan has no serialized form.
  HeraldScheme scheme = HeraldScheme::Click;
  double eta = 1.0;
  json herald_modes = json::array();
  for (std::size_t i = 0; i < c.herald.modes.size(); ++i) {
    const HeraldMode& h = c.herald.modes[i];
    if (i == 0) {
      scheme = h.scheme;
      eta = h.eta;
    } else if (h.scheme != scheme || h.eta != eta) {
      throw std::invalid_argument("serialize_circuit: heralding plan must share scheme and eta");
    }
    herald_modes.push_back(h.mode);
  }

  const BellMeasurement& m = file.measurement;
  const Binning sign = sign_binning();
  const bool sign_a = m.binning_a.breakpoints == sign.breakpoints && m.binning_a.signs == sign.signs;
  const bool sign_b = m.binning_b.breakpoints == sign.breakpoints && m.binning_b.signs == sign.signs;
  if (!sign_a || !sign_b) {
    throw std::invalid_argument("serialize_circuit: format 1 only records sign binning");
  }

  json doc = {
      {"format", kCircuitFormatVersion},
      {"n_modes", c.n_modes},
      {"gates", gates},
      {"herald", {{"scheme", scheme_name(scheme)}, {"eta", eta}, {"modes", herald_modes}}},
      {"measurement",
       {{"theta0", m.theta0},
        {"theta1", m.theta1},
        {"phi0", m.phi0},
        {"phi1", m.phi1},
        {"binning", "sign"}}},
  };
  return doc.dump(2) + "\n";
}

CircuitFile parse_circuit(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("circuit file: invalid JSON: ") + e.what());
  }

  require_fields(doc, "circuit file", {"format", "n_modes", "gates", "herald", "measurement"});
  if (get_int(doc, "circuit file", "format") != kCircuitFormatVersion) {
    throw ParseError("circuit file: unsupported format version");
  }

  CircuitFile file;
  Circuit& c = file.circuit;
  c.n_modes = get_int(doc, "circuit file", "n_modes");
  if (c.n_modes < 2) {
    throw ParseError("circuit file: n_modes must be at least 2");
  }

  const json& gates = doc.at("gates");
  if (!gates.is_array()) {
    throw ParseError("circuit file: \"gates\" must be an array");
  }
  for (const json& jg : gates) {
    require_fields(jg, "gate", {"kind", "modes", "param"});
    if (!jg.at("kind").is_string()) {
      throw ParseError("gate: \"kind\" must be a string");
    }
    Gate g;
    g.kind = parse_kind(jg.at("kind").get<std::string>(), "gate");
    g.param = get_number(jg, "gate", "param");
    const json& modes = jg.at("modes");
    const std::size_t expect = is_two_mode(g.kind) ? 2 : 1;
    if (!modes.is_array() || modes.size() != expect) {
      throw ParseError(std::string("gate: ") + kind_name(g.kind) + " needs " +
                       std::to_string(expect) + " mode index(es)");
    }
    for (std::size_t i = 0; i < expect; ++i) {
      if (!modes[i].is_number_integer()) {
        throw ParseError("gate: mode indices must be integers");
      }
      g.modes[i] = modes[i].get<int>();
    }
    try {
      validate_gate(g, c.n_modes);
    } catch (const std::exception& e) {
      throw ParseError(std::string("gate: ") + e.what());
    }
    c.gates.push_back(g);
  }

  const json& herald = doc.at("herald");
  require_fields(herald, "herald", {"scheme", "eta", "modes"});
  if (!herald.at("scheme").is_string()) {
    throw ParseError("herald: \"scheme\" must be a string");
  }
  const HeraldScheme scheme = parse_scheme(herald.at("scheme").get<std::string>(), "herald");
  const double eta = get_number(herald, "herald", "eta");
  if (!(eta > 0.0) || eta > 1.0) {
    throw ParseError("herald: eta must lie in (0, 1]");
  }
  const json& herald_modes = herald.at("modes");
  if (!herald_modes.is_array()) {
    throw ParseError("herald: \"modes\" must be an array");
  }
  for (const json& jm : herald_modes) {
    if (!jm.is_number_integer()) {
      throw ParseError("herald: mode indices must be integers");
    }
    c.herald.modes.push_back(HeraldMode{jm.get<int>(), scheme, eta});
  }

  const json& meas = doc.at("measurement");
  require_fields(meas, "measurement", {"theta0", "theta1", "phi0", "phi1", "binning"});
  if (!meas.at("binning").is_string() || meas.at("binning").get<std::string>() != "sign") {
    throw ParseError("measurement: binning must be \"sign\"");
  }
  BellMeasurement& m = file.measurement;
  m.theta0 = get_number(meas, "measurement", "theta0");
  m.theta1 = get_number(meas, "measurement", "theta1");
  m.phi0 = get_number(meas, "measurement", "phi0");
  m.phi1 = get_number(meas, "measurement", "phi1");
  m.binning_a = sign_binning();
  m.binning_b = sign_binning();

  try {
    validate_circuit(c);
  } catch (const std::exception& e) {
    throw ParseError(std::string("circuit file: ") + e.what());
  }
  return file;
}

CircuitFile load_circuit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open circuit file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_circuit(buf.str());
}

void save_circuit_file(const std::string& path, const CircuitFile& file) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write circuit file: " + path);
  }
  out << serialize_circuit(file);
}

}  // namespace hpl
