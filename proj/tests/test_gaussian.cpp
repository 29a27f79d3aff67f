#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hpl/gaussian.hpp"

#include <cmath>
#include <random>

using namespace hpl;

namespace {
constexpr double kPi = 3.14159265358979323846;

Gate make(GateKind kind, int m0, int m1, double p) {
  Gate g;
  g.kind = kind;
  g.modes = {m0, m1};
  g.param = p;
  return g;
}
}  // namespace

TEST_CASE("vacuum state has zero mean and covariance I/4") {
  const GaussianState v = vacuum_state(3);
  CHECK(v.n_modes == 3);
  CHECK(v.mu.size() == 6);
  CHECK(v.mu.norm() == 0.0);
  CHECK((v.sigma - 0.25 * Mat::Identity(6, 6)).norm() == 0.0);
  CHECK(check_valid(v.sigma));
}

TEST_CASE("every gate is symplectic: M Omega M^T = Omega") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-2.0 * kPi, 2.0 * kPi);
  std::uniform_real_distribution<double> squeeze(-1.5, 1.5);
  const Mat om = omega(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Gate gates[] = {
        make(GateKind::PhaseShifter, 2, 0, angle(rng)),
        make(GateKind::SingleModeSqueezer, 1, 0, squeeze(rng)),
        make(GateKind::BeamSplitter, 1, 3, angle(rng)),
        make(GateKind::TwoModeSqueezer, 2, 3, squeeze(rng)),
    };
    for (const Gate& g : gates) {
      const Mat m = symplectic_matrix(g, 3);
      CHECK((m * om * m.transpose() - om).norm() < 1e-12);
    }
  }
}

TEST_CASE("phase shifter convention: (x,p) -> (c x + s p, -s x + c p)") {
  const Mat m = symplectic_matrix(make(GateKind::PhaseShifter, 1, 0, 0.3), 1);
  const double c = std::cos(0.3), s = std::sin(0.3);
  CHECK(m(0, 0) == doctest::Approx(c).epsilon(1e-15));
  CHECK(m(0, 1) == doctest::Approx(s).epsilon(1e-15));
  CHECK(m(1, 0) == doctest::Approx(-s).epsilon(1e-15));
  CHECK(m(1, 1) == doctest::Approx(c).epsilon(1e-15));
}

TEST_CASE("single-mode squeezer: vacuum -> diag(e^-2r, e^2r)/4") {
  const double r = 0.37;
  const GaussianState out =
      apply_gate(vacuum_state(1), make(GateKind::SingleModeSqueezer, 1, 0, r));
  CHECK(out.sigma(0, 0) == doctest::Approx(0.25 * std::exp(-2 * r)).epsilon(1e-14));
  CHECK(out.sigma(1, 1) == doctest::Approx(0.25 * std::exp(2 * r)).epsilon(1e-14));
  CHECK(std::abs(out.sigma(0, 1)) < 1e-16);
}

TEST_CASE("rotating a squeezed state by pi/2 swaps the quadrature variances") {
  const double r = 0.8;
  GaussianState s = apply_gate(vacuum_state(1), make(GateKind::SingleModeSqueezer, 1, 0, r));
  s = apply_gate(s, make(GateKind::PhaseShifter, 1, 0, kPi / 2));
  CHECK(s.sigma(0, 0) == doctest::Approx(0.25 * std::exp(2 * r)).epsilon(1e-12));
  CHECK(s.sigma(1, 1) == doctest::Approx(0.25 * std::exp(-2 * r)).epsilon(1e-12));
}

TEST_CASE("two-mode squeezed vacuum has the sigma_z cross block") {
  // Sigma = (1/4) [[cosh(2r) I, -sinh(2r) sigma_z], [-sinh(2r) sigma_z, cosh(2r) I]]
  const double r = 0.44993;
  const GaussianState out =
      apply_gate(vacuum_state(2), make(GateKind::TwoModeSqueezer, 1, 2, r));
  const double ch = 0.25 * std::cosh(2 * r), sh = 0.25 * std::sinh(2 * r);
  Mat expected(4, 4);
  expected << ch, 0, -sh, 0,  //
      0, ch, 0, sh,           //
      -sh, 0, ch, 0,          //
      0, sh, 0, ch;
  CHECK((out.sigma - expected).norm() < 1e-13);
  CHECK(check_valid(out.sigma));
}

TEST_CASE("beam splitter mixes mean vectors with cos/sin weights") {
  GaussianState s = vacuum_state(2);
  s.mu << 1.0, 0.0, 0.0, 0.0;  // displaced x on mode 1 (by hand; no displacement gate)
  const double th = 0.7;
  const GaussianState out = apply_gate(s, make(GateKind::BeamSplitter, 1, 2, th));
  CHECK(out.mu(0) == doctest::Approx(std::cos(th)).epsilon(1e-14));
  CHECK(out.mu(2) == doctest::Approx(-std::sin(th)).epsilon(1e-14));
  // A beam splitter leaves vacuum covariance invariant.
  CHECK((out.sigma - 0.25 * Mat::Identity(4, 4)).norm() < 1e-14);
}

TEST_CASE("apply_gate equals explicit symplectic conjugation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GaussianState s = vacuum_state(3);
  // Entangle first so the covariance is nontrivial.
  s = apply_gate(s, make(GateKind::TwoModeSqueezer, 1, 3, 0.6));
  s = apply_gate(s, make(GateKind::BeamSplitter, 2, 3, 0.9));
  for (int trial = 0; trial < 10; ++trial) {
    const bool single = trial % 2 != 0;
    const Gate g = make(single ? GateKind::SingleModeSqueezer : GateKind::BeamSplitter,
                        1 + trial % 3, single ? 0 : 1 + (trial + 1) % 3, u(rng));
    const Mat m = symplectic_matrix(g, 3);
    const GaussianState expect{3, m * s.mu, m * s.sigma * m.transpose()};
    s = apply_gate(s, g);
    CHECK((s.mu - expect.mu).norm() < 1e-13);
    CHECK((s.sigma - expect.sigma).norm() < 1e-13);
  }
}

TEST_CASE("partial trace of a two-mode squeezed state is thermal") {
  const double r = 0.9;
  const GaussianState full =
      apply_gate(vacuum_state(2), make(GateKind::TwoModeSqueezer, 1, 2, r));
  const GaussianState reduced = partial_trace(full, 2);
  CHECK(reduced.n_modes == 1);
  CHECK((reduced.sigma - 0.25 * std::cosh(2 * r) * Mat::Identity(2, 2)).norm() < 1e-13);
}

TEST_CASE("check_valid rejects sub-vacuum covariances") {
  CHECK(check_valid(0.25 * Mat::Identity(2, 2)));
  CHECK_FALSE(check_valid(0.125 * Mat::Identity(2, 2)));
  // A squeezed covariance saturates the bound but stays physical.
  Mat squeezed(2, 2);
  squeezed << 0.25 * std::exp(-1.2), 0, 0, 0.25 * std::exp(1.2);
  CHECK(check_valid(squeezed));
}

TEST_CASE("validate_gate rejects out-of-range and repeated modes") {
  CHECK_THROWS_AS(validate_gate(make(GateKind::PhaseShifter, 0, 0, 0.1), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_gate(make(GateKind::PhaseShifter, 3, 0, 0.1), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_gate(make(GateKind::BeamSplitter, 2, 2, 0.1), 4),
                  std::invalid_argument);
  CHECK_NOTHROW(validate_gate(make(GateKind::BeamSplitter, 4, 2, 0.1), 4));
}

TEST_CASE("gate names round-trip") {
  CHECK(kind_name(GateKind::PhaseShifter) == std::string("R"));
  CHECK(kind_name(GateKind::SingleModeSqueezer) == std::string("S1"));
  CHECK(kind_name(GateKind::BeamSplitter) == std::string("B"));
  CHECK(kind_name(GateKind::TwoModeSqueezer) == std::string("S2"));
  CHECK(is_two_mode(GateKind::BeamSplitter));
  CHECK(is_two_mode(GateKind::TwoModeSqueezer));
  CHECK_FALSE(is_two_mode(GateKind::PhaseShifter));
  CHECK(is_squeezer(GateKind::SingleModeSqueezer));
  CHECK(is_squeezer(GateKind::TwoModeSqueezer));
  CHECK_FALSE(is_squeezer(GateKind::BeamSplitter));
}
