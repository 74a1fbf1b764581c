#pragma once

#include <cstdint>

#include "polctl/jones.hpp"
#include "polctl/rng.hpp"

namespace polctl {

/// Static description of a fiber link with first-order PMD: a drifting
/// wavelength-flat unitary U(t) followed by a fixed-axis retarder whose
/// retardance grows linearly in the detuning from the carrier.
struct ChannelSpec {
  double dgd_tau = 0.0;               // differential group delay, seconds
  StokesVector pmd_axis{0.0, 0.0, 1.0};
  double omega0 = 0.0;                // signal carrier, rad/s
  double delta_omega = 0.0;           // reference offset, rad/s (w1 = w0 - dw, w3 = w0 + dw)
  double drift_rate = 0.0;            // rad/sqrt(s), std scale of the SU(2) random walk
  bool time_multiplexed = false;      // references ride at the carrier (ideal isolation)
  std::uint64_t seed = 1;
};

/// tau * delta_omega, the small parameter of the wavelength-multiplexed
/// control condition.
double condition_number(const ChannelSpec& spec);

/// delta_omega = 2 pi c delta_lambda / lambda^2 (both lengths in meters).
double delta_omega_from_delta_lambda(double delta_lambda, double lambda0);
double omega_from_lambda(double lambda0);

/// Time-varying fiber transfer operator T(omega, t) = U(t) exp(-i (omega -
/// omega0) (tau/2) (b.sigma)). Single owner; independent channels may run
/// on different threads.
class FiberChannel {
 public:
  explicit FiberChannel(const ChannelSpec& spec);
  FiberChannel(const ChannelSpec& spec, const JonesMatrix& initial_unitary);

  const ChannelSpec& spec() const { return spec_; }
  const JonesMatrix& base_unitary() const { return u_; }
  double sim_time() const { return time_; }

  JonesMatrix transfer(double omega) const;

  /// Advance the drift process: U <- exp(-i db.sigma / 2) U with db three
  /// independent N(0, drift_rate^2 dt) components, then re-orthonormalize.
  void step(double dt);

  /// Instantaneous rotation about `axis` by `angle` applied in front of U.
  void perturb(const StokesVector& axis, double angle);

  /// 2 ||T^-1 dT/domega|| (spectral norm, analytic derivative). Equals the
  /// configured DGD for this model.
  double dgd_from_derivative(double omega) const;

 private:
  ChannelSpec spec_;
  JonesMatrix u_ = JonesMatrix::identity();
  RngStream rng_;
  double time_ = 0.0;
};

/// Jones matrix eigenanalysis: DGD = |arg(rho1/rho2)| / d_omega from two
/// transfer measurements spaced d_omega apart. Valid for d_omega * tau < pi;
/// throws AliasingError at the wrap boundary.
double dgd_jme(const JonesMatrix& t_lo, const JonesMatrix& t_hi, double d_omega);

}  // namespace polctl
