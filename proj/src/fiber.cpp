#include "polctl/fiber.hpp"

#include <cmath>
#include <stdexcept>

#include "polctl/errors.hpp"

namespace polctl {

namespace {
constexpr double kSpeedOfLight = 299792458.0;  // m/s

void validate_spec(const ChannelSpec& spec) {
  if (!(spec.dgd_tau >= 0.0) || !std::isfinite(spec.dgd_tau))
    throw std::invalid_argument("ChannelSpec: dgd_tau must be >= 0");
  if (!(spec.delta_omega >= 0.0) || !std::isfinite(spec.delta_omega))
    throw std::invalid_argument("ChannelSpec: delta_omega must be >= 0");
  if (!(spec.drift_rate >= 0.0) || !std::isfinite(spec.drift_rate))
    throw std::invalid_argument("ChannelSpec: drift_rate must be >= 0");
  if (std::abs(spec.pmd_axis.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("ChannelSpec: pmd_axis must be unit norm");
}
}  // namespace

double condition_number(const ChannelSpec& spec) { return spec.dgd_tau * spec.delta_omega; }

double delta_omega_from_delta_lambda(double delta_lambda, double lambda0) {
  if (!(lambda0 > 0.0)) throw std::invalid_argument("delta_omega_from_delta_lambda: lambda0 must be > 0");
  return 2.0 * M_PI * kSpeedOfLight * delta_lambda / (lambda0 * lambda0);
}

double omega_from_lambda(double lambda0) {
  if (!(lambda0 > 0.0)) throw std::invalid_argument("omega_from_lambda: lambda0 must be > 0");
  return 2.0 * M_PI * kSpeedOfLight / lambda0;
}

FiberChannel::FiberChannel(const ChannelSpec& spec)
    : spec_(spec), rng_(spec.seed) {
  validate_spec(spec_);
  spec_.pmd_axis = spec_.pmd_axis.normalized();
}

FiberChannel::FiberChannel(const ChannelSpec& spec, const JonesMatrix& initial_unitary)
    : FiberChannel(spec) {
  if (unitarity_error(initial_unitary) > 1e-6)
    throw std::invalid_argument("FiberChannel: initial matrix is not unitary");
  u_ = nearest_unitary(initial_unitary);
}

JonesMatrix FiberChannel::transfer(double omega) const {
  double detuning = omega - spec_.omega0;
  if (spec_.dgd_tau == 0.0 || detuning == 0.0) return u_;
  return u_ * rotation_about_axis(spec_.pmd_axis, detuning * spec_.dgd_tau);
}

void FiberChannel::step(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("FiberChannel::step: dt must be > 0");
  double sigma = spec_.drift_rate * std::sqrt(dt);
  StokesVector db{rng_.normal(0.0, sigma), rng_.normal(0.0, sigma), rng_.normal(0.0, sigma)};
  double angle = db.norm();
  if (angle > 0.0) {
    u_ = rotation_about_axis({db.s1 / angle, db.s2 / angle, db.s3 / angle}, angle) * u_;
    u_ = nearest_unitary(u_);
  }
  time_ += dt;
}

void FiberChannel::perturb(const StokesVector& axis, double angle) {
  if (angle == 0.0) return;
  u_ = rotation_about_axis(axis, angle) * u_;
  u_ = nearest_unitary(u_);
}

double FiberChannel::dgd_from_derivative(double omega) const {
  double detuning = omega - spec_.omega0;
  JonesMatrix e = rotation_about_axis(spec_.pmd_axis, detuning * spec_.dgd_tau);
  JonesMatrix g = Complex{0.0, -0.5 * spec_.dgd_tau} * pauli_dot(spec_.pmd_axis);
  JonesMatrix dt_domega = u_ * (g * e);
  JonesMatrix t = transfer(omega);
  return 2.0 * (t.inverse() * dt_domega).spectral_norm();
}

double dgd_jme(const JonesMatrix& t_lo, const JonesMatrix& t_hi, double d_omega) {
  if (!(d_omega > 0.0)) throw std::invalid_argument("dgd_jme: d_omega must be > 0");
  if (unitarity_error(t_lo) > 1e-6 || unitarity_error(t_hi) > 1e-6)
    throw std::invalid_argument("dgd_jme: inputs must be unitary");
  JonesMatrix m = t_hi * t_lo.inverse();
  Complex tr = m.trace();
  Complex disc = std::sqrt(tr * tr - 4.0 * m.det());
  Complex rho1 = 0.5 * (tr + disc);
  Complex rho2 = 0.5 * (tr - disc);
  if (std::abs(rho2) < 1e-12) throw std::invalid_argument("dgd_jme: degenerate eigenvalues");
  double arg = std::arg(rho1 / rho2);
  if (std::abs(arg) >= M_PI * (1.0 - 1e-9))
    throw AliasingError("dgd_jme: eigenvalue argument at the wrap boundary (d_omega * tau >= pi)");
  return std::abs(arg) / d_omega;
}

}  // namespace polctl
