#include "hpl/fock.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace hpl {

namespace {

using Cplx = std::complex<double>;

constexpr double kLeakageLimit = 1e-6;
constexpr int kPad = 4;  // extra Fock levels for the gate exponential

Eigen::Index ipow(Eigen::Index base, int exp) {
  Eigen::Index out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// Stride of a 1-based mode in the row-major amplitude ordering.
Eigen::Index mode_stride(int n_modes, int dim, int mode) {
  return ipow(dim, n_modes - mode);
}

// Annihilation operator on a dim-level truncation: A(n-1, n) = sqrt(n).
Mat annihilation(int dim) {
  Mat a = Mat::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}


// Copies amplitudes into a (possibly different) cutoff, adding any norm
// lost by shrinking to the leakage.
FockState rebase(const FockState& state, int cutoff) {
  if (cutoff == state.cutoff) return state;
  FockState out;
  out.n_modes = state.n_modes;
  out.cutoff = cutoff;
  out.leakage = state.leakage;
  const int new_dim = cutoff + 1;
  const int old_dim = state.dim_per_mode();
  out.amps = Eigen::VectorXcd::Zero(ipow(new_dim, state.n_modes));
  const Eigen::Index total = state.amps.size();
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    if (state.amps(idx) == Cplx(0.0, 0.0)) continue;
    Eigen::Index rem = idx, to = 0;
    bool fits = true;
    for (int m = 0; m < state.n_modes; ++m) {
      const Eigen::Index stride_old = ipow(old_dim, state.n_modes - 1 - m);
      const Eigen::Index n = rem / stride_old;
      rem %= stride_old;
      if (n >= new_dim) {
        fits = false;
        break;
      }
      to += n * ipow(new_dim, state.n_modes - 1 - m);
    }
    if (fits) {
      out.amps(to) = state.amps(idx);
    } else {
      out.leakage += std::norm(state.amps(idx));
    }
  }
  return out;
}

// The gate's anti-Hermitian generator has real Fock matrix elements, so
// the exponential is a real orthogonal matrix.
//
// Two-mode generators conserve a quantum number -- total photons a+b for
// the beam splitter, the difference a-b for the two-mode squeezer -- so
// on the padded joint space they are block-diagonal in that index, with
// tridiagonal antisymmetric blocks. Exponentiating per block is exactly
// the exponential of the full padded generator at a tiny fraction of the
// cost (sum of block sizes cubed instead of padded_dim^6).
Mat two_mode_unitary(const Gate& gate, int padded_dim) {
  const int P = padded_dim;
  const bool bs = gate.kind == GateKind::BeamSplitter;
  Mat u = Mat::Zero(P * P, P * P);
  const int k_lo = bs ? 0 : -(P - 1);
  const int k_hi = bs ? 2 * P - 2 : P - 1;
  for (int k = k_lo; k <= k_hi; ++k) {
    const int a_lo = bs ? std::max(0, k - P + 1) : std::max(0, k);
    const int a_hi = bs ? std::min(k, P - 1) : std::min(P - 1, P - 1 + k);
    const int size = a_hi - a_lo + 1;
    if (size <= 0) continue;
    Mat g = Mat::Zero(size, size);
    for (int i = 0; i + 1 < size; ++i) {
      const int a = a_lo + i;
      const int b = bs ? k - a : a - k;  // mode-j occupation of the lower state
      // B: <a+1, b-1| ai^T aj |a, b> = sqrt((a+1) b)
      // S2: <a+1, b+1| (ai aj)^T |a, b> = sqrt((a+1)(b+1))
      const double coupling = bs ? gate.param * std::sqrt(static_cast<double>(a + 1) * b)
                                 : -gate.param * std::sqrt(static_cast<double>(a + 1) * (b + 1));
      g(i + 1, i) = coupling;
      g(i, i + 1) = -coupling;
    }
    const Mat ub = g.exp();
    for (int i = 0; i < size; ++i) {
      const int ai = a_lo + i;
      const int bi = bs ? k - ai : ai - k;
      for (int j = 0; j < size; ++j) {
        const int aj = a_lo + j;
        const int bj = bs ? k - aj : aj - k;
        u(ai * P + bi, aj * P + bj) = ub(i, j);
      }
    }
  }
  return u;
}

Mat gate_unitary(const Gate& gate, int padded_dim) {
  switch (gate.kind) {
    case GateKind::SingleModeSqueezer: {
      const Mat a = annihilation(padded_dim);
      const Mat g = 0.5 * gate.param * (a * a - (a * a).transpose());
      return g.exp();
    }
    case GateKind::BeamSplitter:
    case GateKind::TwoModeSqueezer:
      return two_mode_unitary(gate, padded_dim);
    case GateKind::PhaseShifter:
      break;  // handled analytically
  }
  throw std::logic_error("gate_unitary: phase shifters are diagonal");
}

}  // namespace

FockState FockState::vacuum(int n_modes, int cutoff) {
  if (n_modes < 1 || cutoff < 1) {
    throw std::invalid_argument("FockState::vacuum: need n_modes >= 1 and cutoff >= 1");
  }
  FockState s;
  s.n_modes = n_modes;
  s.cutoff = cutoff;
  s.amps = Eigen::VectorXcd::Zero(ipow(cutoff + 1, n_modes));
  s.amps(0) = 1.0;
  return s;
}

FockState fock_apply(const Gate& gate, const FockState& state, int cutoff) {
  validate_gate(gate, state.n_modes);
  FockState out = rebase(state, cutoff);
  const int dim = out.dim_per_mode();
  const Eigen::Index total = out.amps.size();

  if (gate.kind == GateKind::PhaseShifter) {
    // R(theta) multiplies |n> by exp(-i n theta); exact, no leakage.
    const Eigen::Index stride = mode_stride(out.n_modes, dim, gate.modes[0]);
    for (Eigen::Index idx = 0; idx < total; ++idx) {
      const Eigen::Index n = (idx / stride) % dim;
      if (n > 0) {
        out.amps(idx) *= std::exp(Cplx(0.0, -gate.param * static_cast<double>(n)));
      }
    }
    return out;
  }

  const int padded = dim + kPad;
  const Mat u = gate_unitary(gate, padded);
  double lost = 0.0;

  if (!is_two_mode(gate.kind)) {
    const Eigen::Index stride = mode_stride(out.n_modes, dim, gate.modes[0]);
    Eigen::VectorXcd in = Eigen::VectorXcd::Zero(padded);
    for (Eigen::Index idx = 0; idx < total; ++idx) {
      if ((idx / stride) % dim != 0) continue;  // not a slice base
      in.setZero();
      for (int n = 0; n < dim; ++n) in(n) = out.amps(idx + n * stride);
      const Eigen::VectorXcd res = u * in;
      double kept = 0.0;
      for (int n = 0; n < dim; ++n) {
        out.amps(idx + n * stride) = res(n);
        kept += std::norm(res(n));
      }
      lost += std::max(0.0, in.squaredNorm() - kept);
    }
  } else {
    const Eigen::Index si = mode_stride(out.n_modes, dim, gate.modes[0]);
    const Eigen::Index sj = mode_stride(out.n_modes, dim, gate.modes[1]);
    Eigen::VectorXcd in = Eigen::VectorXcd::Zero(padded * padded);
    for (Eigen::Index idx = 0; idx < total; ++idx) {
      if ((idx / si) % dim != 0 || (idx / sj) % dim != 0) continue;
      in.setZero();
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
          in(a * padded + b) = out.amps(idx + a * si + b * sj);
        }
      }
      const Eigen::VectorXcd res = u * in;
      double kept = 0.0;
      for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
          const Cplx v = res(a * padded + b);
          out.amps(idx + a * si + b * sj) = v;
          kept += std::norm(v);
        }
      }
      lost += std::max(0.0, in.squaredNorm() - kept);
    }
  }

  out.leakage += lost;
  if (out.leakage > kLeakageLimit) {
    throw CutoffTooSmall("fock_apply: truncation leaked more than 1e-6 of the norm");
  }
  return out;
}

std::pair<FockEnsemble, double> fock_herald(const FockState& state, int mode,
                                            HeraldOutcome outcome, double eta) {
  if (mode < 1 || mode > state.n_modes || state.n_modes < 2) {
    throw std::invalid_argument("fock_herald: bad mode index");
  }
  if (!(eta > 0.0) || eta > 1.0) {
    throw std::invalid_argument("fock_herald: eta must lie in (0, 1]");
  }
  const int dim = state.dim_per_mode();
  const Eigen::Index stride = mode_stride(state.n_modes, dim, mode);
  const Eigen::Index rest_total = state.amps.size() / dim;

  // Outcome weights of the diagonal POVM element per photon number.
  std::vector<double> w(static_cast<std::size_t>(dim));
  for (int n = 0; n < dim; ++n) {
    const double no_click = std::pow(1.0 - eta, n);
    w[static_cast<std::size_t>(n)] =
        (outcome == HeraldOutcome::NoClick) ? no_click : 1.0 - no_click;
  }

  // Split each amplitude index into (level of `mode`, index of the rest).
  // rest index = high part * stride + low part.
  FockEnsemble ensemble;
  double probability = 0.0;
  for (int n = 0; n < dim; ++n) {
    if (w[static_cast<std::size_t>(n)] <= 0.0) continue;
    FockState part;
    part.n_modes = state.n_modes - 1;
    part.cutoff = state.cutoff;
    part.leakage = state.leakage;
    part.amps = Eigen::VectorXcd::Zero(rest_total);
    const double root_w = std::sqrt(w[static_cast<std::size_t>(n)]);
    for (Eigen::Index rest = 0; rest < rest_total; ++rest) {
      const Eigen::Index high = rest / stride;
      const Eigen::Index low = rest % stride;
      part.amps(rest) = root_w * state.amps(high * stride * dim + n * stride + low);
    }
    const double mass = part.amps.squaredNorm();
    probability += mass;
    if (mass > 1e-300) {
      part.amps /= std::sqrt(mass);
      ensemble.emplace_back(mass, part);
    }
  }
  for (auto& member : ensemble) {
    member.first /= std::max(probability, 1e-300);
  }
  return {std::move(ensemble), probability};
}

std::pair<FockEnsemble, double> fock_herald(const FockEnsemble& state, int mode,
                                            HeraldOutcome outcome, double eta) {
  FockEnsemble combined;
  double probability = 0.0;
  for (const auto& [weight, member] : state) {
    auto [sub, p] = fock_herald(member, mode, outcome, eta);
    probability += weight * p;
    for (auto& [sw, ss] : sub) {
      combined.emplace_back(weight * p * sw, std::move(ss));
    }
  }
  for (auto& member : combined) {
    member.first /= std::max(probability, 1e-300);
  }
  return {std::move(combined), probability};
}

FockState fock_append_vacuum(const FockState& state) {
  FockState out;
  out.n_modes = state.n_modes + 1;
  out.cutoff = state.cutoff;
  out.leakage = state.leakage;
  const int dim = state.dim_per_mode();
  out.amps = Eigen::VectorXcd::Zero(state.amps.size() * dim);
  for (Eigen::Index idx = 0; idx < state.amps.size(); ++idx) {
    out.amps(idx * dim) = state.amps(idx);
  }
  return out;
}

std::pair<FockEnsemble, double> fock_herald_single_photon(const FockEnsemble& state, int mode,
                                                          double eta) {
  FockEnsemble widened;
  int n_modes = 0;
  int cutoff = 0;
  for (const auto& [weight, member] : state) {
    n_modes = member.n_modes;
    cutoff = member.cutoff;
    widened.emplace_back(weight, fock_append_vacuum(member));
  }
  if (widened.empty()) {
    throw std::invalid_argument("fock_herald_single_photon: empty ensemble");
  }
  // Tap the mode with a weak beam splitter into the fresh ancilla, then
  // demand a click there and no click in the transmitted port.
  const Gate tap = gate_b(mode, n_modes + 1, 0.1);
  for (auto& [weight, member] : widened) {
    member = fock_apply(tap, member, cutoff);
  }
  auto [clicked, p_click] = fock_herald(widened, n_modes + 1, HeraldOutcome::Click, eta);
  if (clicked.empty()) {
    return {std::move(clicked), 0.0};
  }
  auto [final_state, p_noclick] = fock_herald(clicked, mode, HeraldOutcome::NoClick, eta);
  return {std::move(final_state), p_click * p_noclick};
}

std::pair<Vec, Mat> fock_moments(const FockState& state) {
  const int n = state.n_modes;
  const int dim = state.dim_per_mode();
  const Eigen::Index total = state.amps.size();

  // q_k |psi> for every quadrature, in the truncated space.
  std::vector<Eigen::VectorXcd> qpsi(static_cast<std::size_t>(2 * n));
  for (int m = 0; m < n; ++m) {
    const Eigen::Index stride = mode_stride(n, dim, m + 1);
    Eigen::VectorXcd lower = Eigen::VectorXcd::Zero(total);  // a |psi>
    Eigen::VectorXcd raise = Eigen::VectorXcd::Zero(total);  // a† |psi>
    for (Eigen::Index idx = 0; idx < total; ++idx) {
      const Eigen::Index level = (idx / stride) % dim;
      if (level + 1 < dim) {
        lower(idx) = std::sqrt(static_cast<double>(level + 1)) * state.amps(idx + stride);
      }
      if (level > 0) {
        raise(idx) = std::sqrt(static_cast<double>(level)) * state.amps(idx - stride);
      }
    }
    qpsi[static_cast<std::size_t>(2 * m)] = 0.5 * (raise + lower);                // x
    qpsi[static_cast<std::size_t>(2 * m + 1)] = Cplx(0.0, 0.5) * (raise - lower);  // p
  }

  Vec mu(2 * n);
  for (int k = 0; k < 2 * n; ++k) {
    mu(k) = state.amps.dot(qpsi[static_cast<std::size_t>(k)]).real();
  }
  Mat sigma(2 * n, 2 * n);
  for (int k = 0; k < 2 * n; ++k) {
    for (int l = k; l < 2 * n; ++l) {
      const double m2 =
          qpsi[static_cast<std::size_t>(k)].dot(qpsi[static_cast<std::size_t>(l)]).real();
      sigma(k, l) = sigma(l, k) = m2 - mu(k) * mu(l);
    }
  }
  return {std::move(mu), std::move(sigma)};
}

std::pair<Vec, Mat> fock_moments(const FockEnsemble& state) {
  if (state.empty()) {
    throw std::invalid_argument("fock_moments: empty ensemble");
  }
  const int n = state.front().second.n_modes;
  Vec mu = Vec::Zero(2 * n);
  Mat second = Mat::Zero(2 * n, 2 * n);
  for (const auto& [weight, member] : state) {
    auto [m, s] = fock_moments(member);
    mu += weight * m;
    second += weight * (s + m * m.transpose());
  }
  Mat sigma = second - mu * mu.transpose();
  return {std::move(mu), std::move(sigma)};
}

namespace {

// Half-line overlap matrix Q+[m][n] = Int_0^inf psi_m psi_n du of the
// Hermite functions, by composite Gauss-Legendre quadrature. The sign
// correlator only involves the breakpoint 0, so the quadrature-variable
// scaling drops out.
Mat half_line_overlaps(int dim) {
  // 32-point Gauss-Legendre nodes/weights on [-1, 1] (positive half
  // listed; symmetric).
  static const double kNodes[16] = {
      0.0483076656877383162348126, 0.1444719615827964934851864, 0.2392873622521370745446032,
      0.3318686022821276497799168, 0.4213512761306353453641194, 0.5068999089322293900237475,
      0.5877157572407623290407455, 0.6630442669302152009751152, 0.7321821187402896803874267,
      0.7944837959679424069630973, 0.8493676137325699701336930, 0.8963211557660521239653072,
      0.9349060759377396891709191, 0.9647622555875064307738119, 0.9856115115452683354001750,
      0.9972638618494815635449811};
  static const double kWeights[16] = {
      0.0965400885147278005667648, 0.0956387200792748594190820, 0.0938443990808045656391802,
      0.0911738786957638847128686, 0.0876520930044038111427715, 0.0833119242269467552221991,
      0.0781938957870703064717409, 0.0723457941088485062253994, 0.0658222227763618468376501,
      0.0586840934785355471452836, 0.0509980592623761761961632, 0.0428358980222266806568786,
      0.0342738629130214331026877, 0.0253920653092620594557526, 0.0162743947309056706051706,
      0.0070186100094700966004071};

  const double upper = std::sqrt(2.0 * dim + 1.0) + 6.0;  // past the classical turning point
  const int segments = 8;
  Mat q = Mat::Zero(dim, dim);
  Vec psi(dim);
  const double norm0 = std::pow(3.14159265358979323846, -0.25);
  for (int seg = 0; seg < segments; ++seg) {
    const double lo = upper * seg / segments;
    const double hi = upper * (seg + 1) / segments;
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int node = 0; node < 32; ++node) {
      const double t = (node < 16) ? -kNodes[15 - node] : kNodes[node - 16];
      const double w = (node < 16) ? kWeights[15 - node] : kWeights[node - 16];
      const double u = mid + half * t;
      // Hermite-function recurrence.
      psi(0) = norm0 * std::exp(-0.5 * u * u);
      if (dim > 1) psi(1) = std::sqrt(2.0) * u * psi(0);
      for (int m = 2; m < dim; ++m) {
        psi(m) = std::sqrt(2.0 / m) * u * psi(m - 1) - std::sqrt((m - 1.0) / m) * psi(m - 2);
      }
      q += (half * w) * (psi * psi.transpose());
    }
  }
  return q;
}

double sign_correlator_of_amps(const Eigen::VectorXcd& amps, int dim) {
  // Reshape the 2-mode amplitudes into a matrix C with C(m, n) = <m,n|psi>.
  Eigen::MatrixXcd c(dim, dim);
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      c(m, n) = amps(static_cast<Eigen::Index>(m) * dim + n);
    }
  }
  const Mat qp = half_line_overlaps(dim);
  // Parity: psi_m(-u) = (-1)^m psi_m(u), so Q-[m][n] = (-1)^{m+n} Q+[m][n].
  Mat qm = qp;
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      if ((m + n) % 2 != 0) qm(m, n) = -qm(m, n);
    }
  }

  auto quadrant = [&](const Mat& qa, const Mat& qb) {
    const Eigen::MatrixXcd mixed = qa.cast<Cplx>() * c * qb.cast<Cplx>();
    return c.conjugate().cwiseProduct(mixed).sum().real();
  };
  const double pp = quadrant(qp, qp);
  const double mm = quadrant(qm, qm);
  const double pm = quadrant(qp, qm);
  const double mp = quadrant(qm, qp);

  const double total = pp + mm + pm + mp;
  const double norm = amps.squaredNorm();
  if (std::abs(total - norm) > 1e-8) {
    throw std::runtime_error("fock_sign_correlator: quadrant masses miss the norm by > 1e-8");
  }
  return (pp + mm - pm - mp) / total;
}

}  // namespace

double fock_sign_correlator(const FockState& state, double theta, double phi) {
  if (state.n_modes != 2) {
    throw std::invalid_argument("fock_sign_correlator: state must have exactly 2 modes");
  }
  FockState rotated = fock_apply(gate_r(1, theta), state, state.cutoff);
  rotated = fock_apply(gate_r(2, phi), rotated, state.cutoff);
  return sign_correlator_of_amps(rotated.amps, rotated.dim_per_mode());
}

double fock_sign_correlator(const FockEnsemble& state, double theta, double phi) {
  if (state.empty()) {
    throw std::invalid_argument("fock_sign_correlator: empty ensemble");
  }
  double corr = 0.0;
  for (const auto& [weight, member] : state) {
    corr += weight * fock_sign_correlator(member, theta, phi);
  }
  return corr;
}

}  // namespace hpl
