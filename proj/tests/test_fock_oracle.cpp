// Dual-route validation of the Gaussian machinery against the truncated
// Fock-space oracle: gate unitaries, quadrature moments, threshold and
// single-photon heralding probabilities and conditional states, and the
// sign-binned correlator.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hpl/chsh.hpp"
#include "hpl/fock.hpp"
#include "hpl/gaussian.hpp"
#include "hpl/lcg.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

using namespace hpl;

namespace {

double unit(std::mt19937_64& rng) { return ((rng() >> 11) + 0.5) * 0x1.0p-53; }

// Signed-weight mixture moments of a linear combination of Gaussians.
// Means combine linearly; covariances pick up the spread of the means.
std::pair<Vec, Mat> mixture_moments(const LcgState& state) {
  const Eigen::Index d = state.components.front().state.mu.size();
  Vec mu = Vec::Zero(d);
  for (const auto& c : state.components) {
    mu += c.weight * c.state.mu;
  }
  Mat sigma = Mat::Zero(d, d);
  for (const auto& c : state.components) {
    const Vec centered = c.state.mu - mu;
    sigma += c.weight * (c.state.sigma + centered * centered.transpose());
  }
  return {mu, sigma};
}

GaussianState run_gaussian(const std::vector<Gate>& gates, int n_modes) {
  GaussianState state = vacuum_state(n_modes);
  for (const Gate& g : gates) {
    state = apply_gate(state, g);
  }
  return state;
}

// Applies the gate list in Fock space, growing the cutoff until the
// truncated tail is far below the comparison tolerances. Second moments
// weight the lost tail by the photon number, so the norm leakage has to
// sit well under 1e-6 for 1e-6 moment agreement.
FockState run_fock(const std::vector<Gate>& gates, int n_modes, int cutoff) {
  for (;; cutoff += 4) {
    try {
      FockState state = FockState::vacuum(n_modes, cutoff);
      for (const Gate& g : gates) {
        state = fock_apply(g, state, cutoff);
      }
      if (state.leakage < 1e-9 || cutoff > 24) return state;
    } catch (const CutoffTooSmall&) {
      if (cutoff > 24) throw;
    }
  }
}

// A modest random 3-mode circuit: at most two squeezers with small r, so
// the photon-number tail fits comfortably under a moderate cutoff.
std::vector<Gate> random_circuit(std::mt19937_64& rng) {
  std::vector<Gate> gates;
  const int n_gates = 3 + static_cast<int>(unit(rng) * 3.0);
  int squeezers = 0;
  for (int i = 0; i < n_gates; ++i) {
    double pick = unit(rng);
    const double angle = 2.0 * M_PI * unit(rng);
    const double r = 0.1 + 0.2 * unit(rng);
    const int a = 1 + static_cast<int>(unit(rng) * 3.0);
    int b = 1 + static_cast<int>(unit(rng) * 3.0);
    while (b == a) b = 1 + static_cast<int>(unit(rng) * 3.0);
    if (pick >= 0.25 && pick < 0.75 && squeezers >= 2) pick = (pick < 0.5) ? 0.1 : 0.9;
    if (pick < 0.25) {
      gates.push_back(gate_r(a, angle));
    } else if (pick < 0.5) {
      gates.push_back(gate_s1(a, r));
      ++squeezers;
    } else if (pick < 0.75) {
      gates.push_back(gate_s2(a, b, r));
      ++squeezers;
    } else {
      gates.push_back(gate_b(a, b, angle));
    }
  }
  return gates;
}

}  // namespace

TEST_CASE("fock vacuum: unit amplitude on |0...0> and vacuum moments") {
  const FockState vac = FockState::vacuum(3, 4);
  CHECK(vac.n_modes == 3);
  CHECK(vac.dim_per_mode() == 5);
  CHECK(vac.amps.size() == 125);
  CHECK(std::abs(vac.amps(0) - std::complex<double>(1.0, 0.0)) < 1e-15);
  CHECK(vac.amps.tail(124).cwiseAbs().maxCoeff() == 0.0);

  const auto [mu, sigma] = fock_moments(vac);
  CHECK(mu.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sigma - 0.25 * Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(FockState::vacuum(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(FockState::vacuum(2, 0), std::invalid_argument);
}

TEST_CASE("two-mode squeezer reproduces the closed-form TMSV amplitudes") {
  const double r = 0.37;
  const FockState tmsv = run_fock({gate_s2(1, 2, r)}, 2, 10);
  const int d = tmsv.dim_per_mode();
  for (int n = 0; n <= 5; ++n) {
    const std::complex<double> amp = tmsv.amps(n * d + n);
    const double expected = std::pow(-std::tanh(r), n) / std::cosh(r);
    CHECK(std::abs(amp - std::complex<double>(expected, 0.0)) < 1e-9);
  }
  // Photon numbers are perfectly correlated: off-diagonal terms vanish.
  double off = 0.0;
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) {
      if (n != m) off = std::max(off, std::abs(tmsv.amps(n * d + m)));
    }
  }
  CHECK(off < 1e-12);
  CHECK(tmsv.leakage < 1e-9);
}

TEST_CASE("balanced beam splitter shows the Hong-Ou-Mandel null") {
  // |1,1> is not reachable with Gaussian gates, so write it directly.
  FockState state = FockState::vacuum(2, 4);
  const int d = state.dim_per_mode();
  state.amps.setZero();
  state.amps(1 * d + 1) = 1.0;

  const FockState out = fock_apply(gate_b(1, 2, M_PI / 4.0), state, 4);
  CHECK(std::abs(out.amps(1 * d + 1)) < 1e-12);                    // coincidences cancel
  CHECK(std::abs(out.amps(2 * d + 0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(std::abs(out.amps(0 * d + 2)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(std::abs(out.amps.squaredNorm() - 1.0) < 1e-12);
}

TEST_CASE("passive gates barely disturb the norm; squeezers leak past the cutoff") {
  // Photon number is conserved per beamsplitter pair, but a |k,k> term
  // can spill into |2k,0> past the per-mode cutoff, so passive gates are
  // only norm-preserving up to the (tiny) occupation near the cutoff.
  std::mt19937_64 rng(41);
  FockState state = run_fock({gate_s2(1, 2, 0.25), gate_s1(3, 0.2)}, 3, 12);
  const double norm_before = state.amps.squaredNorm();
  for (int i = 0; i < 6; ++i) {
    const Gate g = (i % 2 == 0) ? gate_b(1 + i % 3, 1 + (i + 1) % 3, 2.0 * M_PI * unit(rng))
                                : gate_r(1 + i % 3, 2.0 * M_PI * unit(rng));
    const double leak_before = state.leakage;
    state = fock_apply(g, state, state.cutoff);
    CHECK(std::abs(state.amps.squaredNorm() - norm_before) < 1e-8);
    CHECK(state.leakage - leak_before < 1e-8);
  }

  // Strong single-mode squeezing at a small cutoff must refuse loudly.
  FockState small = FockState::vacuum(2, 6);
  CHECK_THROWS_AS(fock_apply(gate_s1(1, 0.5), small, 6), CutoffTooSmall);

  // Leakage decreases as the cutoff grows.
  const FockState at16 = fock_apply(gate_s1(1, 0.5), FockState::vacuum(2, 16), 16);
  const FockState at20 = fock_apply(gate_s1(1, 0.5), FockState::vacuum(2, 20), 20);
  CHECK(at16.leakage < 1e-6);
  CHECK(at20.leakage < at16.leakage);
}

TEST_CASE("quadrature moments agree with the covariance simulation on random circuits") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    const std::vector<Gate> gates = random_circuit(rng);
    const GaussianState gauss = run_gaussian(gates, 3);
    const FockState fock = run_fock(gates, 3, 12);

    const auto [mu, sigma] = fock_moments(fock);
    CHECK((mu - gauss.mu).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((sigma - gauss.sigma).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("threshold click on a TMSV matches the analytic and Gaussian routes") {
  const double r = 0.45;
  const std::vector<Gate> prep = {gate_s2(1, 2, r)};
  const GaussianState gauss = run_gaussian(prep, 2);
  const FockState fock = run_fock(prep, 2, 14);

  for (const double eta : {1.0, 0.65}) {
    const auto [click_ens, p_click] = fock_herald(fock, 2, HeraldOutcome::Click, eta);
    const Conditioned gside = condition_click(LcgState::from_gaussian(gauss), 2, eta);
    CHECK(p_click == doctest::Approx(gside.probability).epsilon(1e-9));

    const auto [mu_f, sigma_f] = fock_moments(click_ens);
    const auto [mu_g, sigma_g] = mixture_moments(gside.state);
    CHECK((mu_f - mu_g).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((sigma_f - sigma_g).cwiseAbs().maxCoeff() < 1e-6);
  }

  // Perfect-detector special case: p_noclick = 1/cosh^2 r and the
  // conditional state is the vacuum.
  const auto [noclick_ens, p_noclick] = fock_herald(fock, 2, HeraldOutcome::NoClick, 1.0);
  CHECK(p_noclick == doctest::Approx(1.0 / (std::cosh(r) * std::cosh(r))).epsilon(1e-9));
  REQUIRE(noclick_ens.size() == 1);
  const auto [mu_v, sigma_v] = fock_moments(noclick_ens);
  CHECK(mu_v.cwiseAbs().maxCoeff() < 1e-9);
  CHECK((sigma_v - 0.25 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("click on an uncorrelated vacuum mode is impossible on both routes") {
  const FockState vac = FockState::vacuum(2, 6);
  const auto [ensemble, p] = fock_herald(vac, 2, HeraldOutcome::Click, 1.0);
  CHECK(p == 0.0);
  CHECK(ensemble.empty());
  CHECK_THROWS_AS(condition_click(LcgState::from_gaussian(vacuum_state(2)), 2, 1.0),
                  HeraldImpossible);
}

TEST_CASE("heralding random circuits: probabilities and conditional moments agree") {
  std::mt19937_64 rng(777);
  int compared = 0;
  for (int trial = 0; trial < 15; ++trial) {
    const std::vector<Gate> gates = random_circuit(rng);
    const GaussianState gauss = run_gaussian(gates, 3);
    const FockState fock = run_fock(gates, 3, 12);
    const LcgState lcg = LcgState::from_gaussian(gauss);
    const double eta = (trial % 2 == 0) ? 1.0 : 0.8;

    const auto [click_ens, p_click] = fock_herald(fock, 3, HeraldOutcome::Click, eta);
    double p_click_g = 0.0;
    try {
      const Conditioned g = condition_click(lcg, 3, eta);
      p_click_g = g.probability;
      if (p_click_g > 1e-8) {
        const auto [mu_f, sigma_f] = fock_moments(click_ens);
        const auto [mu_g, sigma_g] = mixture_moments(g.state);
        CHECK((mu_f - mu_g).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((sigma_f - sigma_g).cwiseAbs().maxCoeff() < 1e-6);
        ++compared;
      }
    } catch (const HeraldImpossible&) {
      p_click_g = 0.0;
    }
    CHECK(std::abs(p_click - p_click_g) < 1e-6);

    const auto [spp_ens, p_spp] = fock_herald_single_photon(FockEnsemble{{1.0, fock}}, 3, eta);
    double p_spp_g = 0.0;
    try {
      const Conditioned g = herald_single_photon_projection(lcg, 3, eta);
      p_spp_g = g.probability;
      if (p_spp_g > 1e-8) {
        const auto [mu_f, sigma_f] = fock_moments(spp_ens);
        const auto [mu_g, sigma_g] = mixture_moments(g.state);
        CHECK((mu_f - mu_g).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((sigma_f - sigma_g).cwiseAbs().maxCoeff() < 1e-6);
      }
    } catch (const HeraldImpossible&) {
      p_spp_g = 0.0;
    }
    CHECK(std::abs(p_spp - p_spp_g) < 1e-6);

    // The single-photon projection passes a strict subset of the click
    // events (those that also leave the transmitted arm dark).
    CHECK(p_spp <= p_click + 1e-12);
  }
  CHECK(compared >= 5);  // most random circuits do herald
}

TEST_CASE("sign-binned correlator agrees with the quadrature-integral route") {
  const std::vector<Gate> prep = {gate_s2(1, 2, 0.3), gate_r(1, 0.4)};
  const GaussianState gauss = run_gaussian(prep, 2);
  const FockState fock = run_fock(prep, 2, 14);
  const LcgState lcg = LcgState::from_gaussian(gauss);
  const Binning sb = sign_binning();

  const double pairs[][2] = {{0.0, -M_PI / 4}, {M_PI / 2, M_PI / 4}, {0.3, 1.1}, {0.0, 0.0}};
  for (const auto& ang : pairs) {
    const double via_fock = fock_sign_correlator(fock, ang[0], ang[1]);
    const double via_gauss = correlator(lcg, ang[0], ang[1], sb, sb);
    CHECK(std::abs(via_fock - via_gauss) < 1e-4);
    CHECK(std::abs(via_fock) <= 1.0 + 1e-9);
  }

  // Uncorrelated vacuum: the correlator vanishes on both routes.
  const FockState vac = FockState::vacuum(2, 6);
  CHECK(std::abs(fock_sign_correlator(vac, 0.2, 0.9)) < 1e-9);
  CHECK(std::abs(correlator(LcgState::from_gaussian(vacuum_state(2)), 0.2, 0.9, sb,
                            sb)) < 1e-9);
}

TEST_CASE("appending a vacuum mode extends the moments block-diagonally") {
  const FockState two = run_fock({gate_s2(1, 2, 0.4)}, 2, 12);
  const FockState three = fock_append_vacuum(two);
  CHECK(three.n_modes == 3);
  CHECK(std::abs(three.amps.squaredNorm() - 1.0) < 1e-9);

  const auto [mu2, sigma2] = fock_moments(two);
  const auto [mu3, sigma3] = fock_moments(three);
  CHECK((mu3.head(4) - mu2).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(mu3.tail(2).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((sigma3.topLeftCorner(4, 4) - sigma2).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((sigma3.bottomRightCorner(2, 2) - 0.25 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-9);
  CHECK(sigma3.topRightCorner(4, 2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ensemble moments are the weighted mixture of member moments") {
  const FockState a = run_fock({gate_s1(1, 0.3)}, 2, 12);
  const FockState b = run_fock({gate_s2(1, 2, 0.25)}, 2, 12);
  const FockEnsemble mix = {{0.3, a}, {0.7, b}};

  const auto [mu_mix, sigma_mix] = fock_moments(mix);
  const auto [mu_a, sigma_a] = fock_moments(a);
  const auto [mu_b, sigma_b] = fock_moments(b);

  const Vec mu_manual = 0.3 * mu_a + 0.7 * mu_b;
  const Vec da = mu_a - mu_manual;
  const Vec db = mu_b - mu_manual;
  const Mat sigma_manual = 0.3 * (sigma_a + da * da.transpose()) +
                           0.7 * (sigma_b + db * db.transpose());
  CHECK((mu_mix - mu_manual).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sigma_mix - sigma_manual).cwiseAbs().maxCoeff() < 1e-12);
}
