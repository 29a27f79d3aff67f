#include "hpl/gaussian.hpp"

#include <cmath>
#include <string>

namespace hpl {

namespace {

const Eigen::Matrix2d kSigmaZ = (Eigen::Matrix2d() << 1, 0, 0, -1).finished();

}  // namespace

bool is_two_mode(GateKind kind) {
  return kind == GateKind::BeamSplitter || kind == GateKind::TwoModeSqueezer;
}

bool is_squeezer(GateKind kind) {
  return kind == GateKind::SingleModeSqueezer || kind == GateKind::TwoModeSqueezer;
}

const char* kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::PhaseShifter: return "R";
    case GateKind::SingleModeSqueezer: return "S1";
    case GateKind::BeamSplitter: return "B";
    case GateKind::TwoModeSqueezer: return "S2";
  }
  throw std::invalid_argument("unknown gate kind");
}

Gate gate_r(int mode, double theta) { return Gate{GateKind::PhaseShifter, {mode, 0}, theta}; }
Gate gate_s1(int mode, double r) { return Gate{GateKind::SingleModeSqueezer, {mode, 0}, r}; }
Gate gate_b(int mode_a, int mode_b, double theta) {
  return Gate{GateKind::BeamSplitter, {mode_a, mode_b}, theta};
}
Gate gate_s2(int mode_a, int mode_b, double r) {
  return Gate{GateKind::TwoModeSqueezer, {mode_a, mode_b}, r};
}

GaussianState vacuum_state(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("vacuum_state: n_modes must be >= 1");
  GaussianState s;
  s.n_modes = n_modes;
  s.mu = Vec::Zero(2 * n_modes);
  s.sigma = Mat::Identity(2 * n_modes, 2 * n_modes) / 4.0;
  return s;
}

Mat omega(int n_modes) {
  Mat o = Mat::Zero(2 * n_modes, 2 * n_modes);
  for (int i = 0; i < n_modes; ++i) {
    o(2 * i, 2 * i + 1) = 1.0;
    o(2 * i + 1, 2 * i) = -1.0;
  }
  return o;
}

void validate_gate(const Gate& gate, int n_modes) {
  const bool two = is_two_mode(gate.kind);
  const int a = gate.modes[0];
  const int b = gate.modes[1];
  if (a < 1 || a > n_modes)
    throw std::invalid_argument("gate mode " + std::to_string(a) + " out of range");
  if (two) {
    if (b < 1 || b > n_modes)
      throw std::invalid_argument("gate mode " + std::to_string(b) + " out of range");
    if (a == b) throw std::invalid_argument("two-mode gate needs distinct modes");
  } else if (b != 0) {
    throw std::invalid_argument("single-mode gate takes exactly one mode");
  }
  if (!std::isfinite(gate.param)) throw std::invalid_argument("gate parameter must be finite");
}

Mat symplectic_matrix(const Gate& gate, int n_modes) {
  validate_gate(gate, n_modes);
  Mat m = Mat::Identity(2 * n_modes, 2 * n_modes);
  const int i = 2 * (gate.modes[0] - 1);
  switch (gate.kind) {
    case GateKind::PhaseShifter: {
      const double c = std::cos(gate.param), s = std::sin(gate.param);
      m.block<2, 2>(i, i) << c, s, -s, c;
      break;
    }
    case GateKind::SingleModeSqueezer: {
      m.block<2, 2>(i, i) = Eigen::Vector2d(std::exp(-gate.param), std::exp(gate.param)).asDiagonal();
      break;
    }
    case GateKind::BeamSplitter: {
      const int j = 2 * (gate.modes[1] - 1);
      const double c = std::cos(gate.param), s = std::sin(gate.param);
      m.block<2, 2>(i, i) = c * Eigen::Matrix2d::Identity();
      m.block<2, 2>(j, j) = c * Eigen::Matrix2d::Identity();
      m.block<2, 2>(i, j) = s * Eigen::Matrix2d::Identity();
      m.block<2, 2>(j, i) = -s * Eigen::Matrix2d::Identity();
      break;
    }
    case GateKind::TwoModeSqueezer: {
      // Heisenberg evolution of exp(r (a_i a_j - a_i^dag a_j^dag)) maps
      // a_i -> cosh(r) a_i - sinh(r) a_j^dag, giving sigma_z-structured
      // off-diagonal blocks (the plain -sinh(r) I form is not symplectic).
      const int j = 2 * (gate.modes[1] - 1);
      const double ch = std::cosh(gate.param), sh = std::sinh(gate.param);
      m.block<2, 2>(i, i) = ch * Eigen::Matrix2d::Identity();
      m.block<2, 2>(j, j) = ch * Eigen::Matrix2d::Identity();
      m.block<2, 2>(i, j) = -sh * kSigmaZ;
      m.block<2, 2>(j, i) = -sh * kSigmaZ;
      break;
    }
  }
  return m;
}

GaussianState apply_gate(const GaussianState& state, const Gate& gate) {
  const Mat m = symplectic_matrix(gate, state.n_modes);
  GaussianState out;
  out.n_modes = state.n_modes;
  out.mu = m * state.mu;
  out.sigma = m * state.sigma * m.transpose();
  return out;
}

GaussianState partial_trace(const GaussianState& state, int mode) {
  if (mode < 1 || mode > state.n_modes) throw std::invalid_argument("partial_trace: bad mode");
  if (state.n_modes < 2)
    throw std::invalid_argument("partial_trace: cannot trace out the last mode");
  const int n = state.n_modes;
  const int cut = 2 * (mode - 1);
  GaussianState out;
  out.n_modes = n - 1;
  out.mu = Vec(2 * n - 2);
  out.sigma = Mat(2 * n - 2, 2 * n - 2);
  out.mu.head(cut) = state.mu.head(cut);
  out.mu.tail(2 * n - 2 - cut) = state.mu.tail(2 * n - 2 - cut);
  out.sigma.topLeftCorner(cut, cut) = state.sigma.topLeftCorner(cut, cut);
  out.sigma.topRightCorner(cut, 2 * n - 2 - cut) =
      state.sigma.topRightCorner(cut, 2 * n - 2 - cut);
  out.sigma.bottomLeftCorner(2 * n - 2 - cut, cut) =
      state.sigma.bottomLeftCorner(2 * n - 2 - cut, cut);
  out.sigma.bottomRightCorner(2 * n - 2 - cut, 2 * n - 2 - cut) =
      state.sigma.bottomRightCorner(2 * n - 2 - cut, 2 * n - 2 - cut);
  return out;
}

bool check_valid(const Mat& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() % 2 != 0)
    throw std::invalid_argument("check_valid: sigma must be square with even dimension");
  const int n = static_cast<int>(sigma.rows()) / 2;
  Eigen::MatrixXcd h = sigma.cast<std::complex<double>>();
  h += std::complex<double>(0.0, 0.25) * omega(n).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -1e-9;
}

}  // namespace hpl
