#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "polctl/errors.hpp"
#include "polctl/fiber.hpp"

using namespace polctl;

namespace {

// operating point of the reproduced experiment
constexpr double kLambda = 1550e-9;
constexpr double kDeltaLambda = 0.8e-9;
constexpr double kTau = 0.54e-12;

ChannelSpec paper_spec(std::uint64_t seed = 1) {
  ChannelSpec spec;
  spec.dgd_tau = kTau;
  spec.pmd_axis = {0.0, 0.0, 1.0};
  spec.omega0 = omega_from_lambda(kLambda);
  spec.delta_omega = delta_omega_from_delta_lambda(kDeltaLambda, kLambda);
  spec.seed = seed;
  return spec;
}

/// min over a phase grid of the spectral norm of (X - lambda Y); the grid
/// includes lambda = 1 so the result never exceeds the plain distance.
double phase_spectral_distance(const JonesMatrix& x, const JonesMatrix& y) {
  double best = (x - y).spectral_norm();
  for (int k = 1; k < 512; ++k) {
    Complex lambda = std::polar(1.0, 2.0 * M_PI * k / 512);
    best = std::min(best, (x - lambda * y).spectral_norm());
  }
  return best;
}

}  // namespace

TEST_CASE("0.8 nm at 1550 nm reproduces the published operating point") {
  double dw = delta_omega_from_delta_lambda(kDeltaLambda, kLambda);
  CHECK(dw == doctest::Approx(6.2722e11).epsilon(1e-4));
  CHECK(condition_number(paper_spec()) == doctest::Approx(0.3387).epsilon(1e-3));
  ChannelSpec zero = paper_spec();
  zero.dgd_tau = 0.0;
  CHECK(condition_number(zero) == 0.0);
  ChannelSpec twice = paper_spec();
  twice.delta_omega *= 2.0;
  CHECK(condition_number(twice) == doctest::Approx(2.0 * condition_number(paper_spec())));
}

TEST_CASE("zero DGD makes the transfer wavelength flat") {
  ChannelSpec spec = paper_spec();
  spec.dgd_tau = 0.0;
  spec.drift_rate = 1.0;
  FiberChannel ch(spec);
  ch.step(0.01);
  JonesMatrix t1 = ch.transfer(spec.omega0 - spec.delta_omega);
  JonesMatrix t0 = ch.transfer(spec.omega0);
  JonesMatrix t3 = ch.transfer(spec.omega0 + spec.delta_omega);
  CHECK((t1 - t0).frobenius_norm() == 0.0);
  CHECK((t3 - t0).frobenius_norm() == 0.0);
}

TEST_CASE("closed form for identity base and S1-axis PMD") {
  ChannelSpec spec = paper_spec();
  spec.pmd_axis = {1.0, 0.0, 0.0};
  FiberChannel ch(spec);
  double omega = spec.omega0 + spec.delta_omega;
  double half = 0.5 * spec.delta_omega * kTau;
  JonesMatrix expected{std::polar(1.0, -half), {0, 0}, {0, 0}, std::polar(1.0, half)};
  CHECK((ch.transfer(omega) - expected).frobenius_norm() < 1e-12);
}

TEST_CASE("transfer stays unitary across frequencies and drift") {
  ChannelSpec spec = paper_spec();
  spec.drift_rate = 2.0;
  FiberChannel ch(spec);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    ch.step(1e-3);
    double omega = spec.omega0 + (i - 100) * 0.02 * spec.delta_omega;
    worst = std::max(worst, unitarity_error(ch.transfer(omega)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("first-order expansion of the two-reference ratio") {
  RngStream rng(19);
  for (double tdw : {0.1, 0.3, 0.5}) {
    ChannelSpec spec = paper_spec();
    spec.dgd_tau = tdw / spec.delta_omega;
    spec.pmd_axis = random_unit_stokes(rng);
    FiberChannel ch(spec, haar_random(rng));
    double w1 = spec.omega0 - spec.delta_omega;
    double w3 = spec.omega0 + spec.delta_omega;
    JonesMatrix t1 = ch.transfer(w1);
    JonesMatrix ratio = t1.inverse() * ch.transfer(w3);
    // T^-1 dT/dw is constant for this model
    JonesMatrix g = Complex{0.0, -0.5 * spec.dgd_tau} * pauli_dot(spec.pmd_axis);
    JonesMatrix linear = JonesMatrix::identity() + Complex{2.0 * spec.delta_omega, 0.0} * g;
    CHECK(phase_spectral_distance(ratio, linear) <= 0.5 * tdw * tdw * (1.0 + 1e-9));

    // matrix form of the same statement
    JonesMatrix dt = ch.base_unitary() *
                     (g * rotation_about_axis(spec.pmd_axis, -spec.delta_omega * spec.dgd_tau));
    JonesMatrix resid = ch.transfer(w3) - t1 - Complex{2.0 * spec.delta_omega, 0.0} * dt;
    CHECK(resid.frobenius_norm() <= tdw * tdw);
  }
}

TEST_CASE("drift with zero rate leaves the base unitary untouched") {
  ChannelSpec spec = paper_spec();
  FiberChannel ch(spec);
  JonesMatrix before = ch.base_unitary();
  for (int i = 0; i < 10; ++i) ch.step(0.1);
  CHECK((ch.base_unitary() - before).frobenius_norm() == 0.0);
  CHECK(ch.sim_time() == doctest::Approx(1.0));
}

TEST_CASE("drift trajectories are a pure function of the seed") {
  ChannelSpec spec = paper_spec(77);
  spec.drift_rate = 1.3;
  FiberChannel a(spec), b(spec);
  for (int i = 0; i < 100; ++i) {
    a.step(1e-3);
    b.step(1e-3);
  }
  CHECK((a.base_unitary() - b.base_unitary()).frobenius_norm() == 0.0);
  ChannelSpec spec2 = paper_spec(78);
  spec2.drift_rate = 1.3;
  FiberChannel d(spec2);
  for (int i = 0; i < 100; ++i) d.step(1e-3);
  CHECK((d.base_unitary() - a.base_unitary()).frobenius_norm() > 1e-6);
}

TEST_CASE("ensemble drift angle grows like sqrt(t)") {
  const int seeds = 400;
  double mean_short = 0.0, mean_long = 0.0;
  for (int s = 0; s < seeds; ++s) {
    ChannelSpec spec = paper_spec(1000 + s);
    spec.drift_rate = 0.5;
    FiberChannel ch(spec);
    StokesVector start = rotate_stokes(ch.base_unitary(), {1, 0, 0});
    for (int i = 0; i < 40; ++i) ch.step(2.5e-5);
    mean_short += sphere_angle(rotate_stokes(ch.base_unitary(), {1, 0, 0}), start);
    for (int i = 0; i < 120; ++i) ch.step(2.5e-5);
    mean_long += sphere_angle(rotate_stokes(ch.base_unitary(), {1, 0, 0}), start);
  }
  mean_short /= seeds;
  mean_long /= seeds;
  double ratio = mean_long / mean_short;  // 4x the time should double the angle
  CHECK(ratio > 1.75);
  CHECK(ratio < 2.25);
}

TEST_CASE("step rejects non-positive dt") {
  FiberChannel ch(paper_spec());
  CHECK_THROWS_AS(ch.step(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ch.step(-1.0), std::invalid_argument);
}

TEST_CASE("perturb composes on the left") {
  FiberChannel ch(paper_spec());
  JonesMatrix before = ch.base_unitary();
  ch.perturb({0, 0, 1}, 0.0);
  CHECK((ch.base_unitary() - before).frobenius_norm() == 0.0);

  // half turn about the s3 axis sends the H-launched output to its antipode
  ch.perturb({0, 0, 1}, M_PI);
  StokesVector out = rotate_stokes(ch.transfer(ch.spec().omega0), {1, 0, 0});
  CHECK(sphere_angle(out, {1, 0, 0}) == doctest::Approx(M_PI).epsilon(1e-9));

  RngStream rng(5);
  JonesMatrix u0 = haar_random(rng);
  FiberChannel ch2(paper_spec(), u0);
  StokesVector axis = random_unit_stokes(rng);
  ch2.perturb(axis, 1.1);
  CHECK(phase_distance(ch2.base_unitary(), rotation_about_axis(axis, 1.1) * u0) < 1e-12);
}

TEST_CASE("dgd_from_derivative returns the configured DGD") {
  ChannelSpec spec = paper_spec();
  spec.drift_rate = 1.0;
  FiberChannel ch(spec);
  CHECK(std::abs(ch.dgd_from_derivative(spec.omega0) / kTau - 1.0) < 1e-12);
  for (int i = 0; i < 25; ++i) {
    ch.step(1e-2);
    CHECK(std::abs(ch.dgd_from_derivative(spec.omega0 + spec.delta_omega) / kTau - 1.0) < 1e-12);
  }
  ChannelSpec zero = paper_spec();
  zero.dgd_tau = 0.0;
  CHECK(FiberChannel(zero).dgd_from_derivative(zero.omega0) == 0.0);
}

TEST_CASE("dgd_jme recovers the DGD of the model channel") {
  RngStream rng(29);
  ChannelSpec spec = paper_spec();
  spec.pmd_axis = random_unit_stokes(rng);
  FiberChannel ch(spec, haar_random(rng));
  double w = spec.omega0;
  CHECK(dgd_jme(ch.transfer(w), ch.transfer(w), spec.delta_omega) == 0.0);
  double measured = dgd_jme(ch.transfer(w), ch.transfer(w + spec.delta_omega), spec.delta_omega);
  double oracle = ch.dgd_from_derivative(w);
  CHECK(std::abs(measured / oracle - 1.0) < 0.01);
  CHECK(std::abs(measured / kTau - 1.0) < 1e-9);
}

TEST_CASE("dgd_jme on the pure retarder closed form") {
  double d_omega = 3.0e11;
  double half = 0.5 * d_omega * kTau;
  JonesMatrix t_hi{std::polar(1.0, -half), {0, 0}, {0, 0}, std::polar(1.0, half)};
  CHECK(dgd_jme(JonesMatrix::identity(), t_hi, d_omega) == doctest::Approx(kTau).epsilon(1e-12));
}

TEST_CASE("dgd_jme flags the aliasing boundary") {
  double d_omega = M_PI / kTau;  // d_omega * tau = pi
  double half = 0.5 * d_omega * kTau;
  JonesMatrix t_hi{std::polar(1.0, -half), {0, 0}, {0, 0}, std::polar(1.0, half)};
  CHECK_THROWS_AS(dgd_jme(JonesMatrix::identity(), t_hi, d_omega), AliasingError);
}

TEST_CASE("channel spec validation") {
  ChannelSpec bad = paper_spec();
  bad.dgd_tau = -1.0;
  CHECK_THROWS_AS(FiberChannel{bad}, std::invalid_argument);
  ChannelSpec bad2 = paper_spec();
  bad2.pmd_axis = {0.5, 0, 0};
  CHECK_THROWS_AS(FiberChannel{bad2}, std::invalid_argument);
}
