#pragma once

#include <complex>

#include "polctl/rng.hpp"

namespace polctl {

using Complex = std::complex<double>;

/// Point on (or near) the Poincare sphere. Components follow the fixed
/// convention s1 = |ex|^2 - |ey|^2, s2 = 2 Re(ex* ey), s3 = 2 Im(ex* ey),
/// so horizontal is (1,0,0), +45 linear is (0,1,0), right circular (0,0,1).
struct StokesVector {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  double norm() const;
  double dot(const StokesVector& o) const { return s1 * o.s1 + s2 * o.s2 + s3 * o.s3; }
  StokesVector cross(const StokesVector& o) const {
    return {s2 * o.s3 - s3 * o.s2, s3 * o.s1 - s1 * o.s3, s1 * o.s2 - s2 * o.s1};
  }
  StokesVector normalized() const;  // throws std::invalid_argument on ~zero norm
};

/// Fully polarized field amplitude pair. Global phase carries no meaning;
/// every comparison in this library is phase invariant.
struct JonesVector {
  Complex ex{0.0, 0.0};
  Complex ey{0.0, 0.0};

  double norm() const;
  JonesVector normalized() const;
};

/// 2x2 complex operator, row-major [a b; c d]. Channel and controller
/// constructions keep these unitary; nothing here enforces it except the
/// documented factory functions.
struct JonesMatrix {
  Complex a{0.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{0.0, 0.0};

  static JonesMatrix identity() { return {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}; }

  JonesMatrix dagger() const;
  JonesMatrix inverse() const;  // throws std::invalid_argument if singular
  Complex det() const { return a * d - b * c; }
  Complex trace() const { return a + d; }
  double frobenius_norm() const;
  double spectral_norm() const;
};

JonesMatrix operator*(const JonesMatrix& x, const JonesMatrix& y);
JonesMatrix operator+(const JonesMatrix& x, const JonesMatrix& y);
JonesMatrix operator-(const JonesMatrix& x, const JonesMatrix& y);
JonesMatrix operator*(Complex s, const JonesMatrix& x);

// Common pure states.
JonesVector jones_h();
JonesVector jones_v();
JonesVector jones_d45();   // +45 linear
JonesVector jones_m45();   // -45 linear
JonesVector jones_rcp();   // right circular, Stokes (0,0,1)

/// <a|b> = conj(a) . b
Complex inner(const JonesVector& a, const JonesVector& b);

/// y applied first, then x (matches the operator order R3 R1 T).
JonesMatrix compose(const JonesMatrix& x, const JonesMatrix& y);
JonesVector apply(const JonesMatrix& m, const JonesVector& v);

StokesVector jones_to_stokes(const JonesVector& v);
JonesVector stokes_to_jones(const StokesVector& s);

/// |<a|b>|^2 = cos^2(theta/2) for sphere angle theta. Phase invariant.
double fidelity(const JonesVector& a, const JonesVector& b);

/// arccos(a.b) in [0, pi].
double sphere_angle(const StokesVector& a, const StokesVector& b);

/// exp(-i (angle/2) axis.sigma): rotates the Poincare sphere by `angle`
/// (right-handed) about `axis`. Axis must be unit to 1e-6.
JonesMatrix rotation_about_axis(const StokesVector& axis, double angle);

/// (axis . sigma) with the Pauli triple matching the Stokes convention.
JonesMatrix pauli_dot(const StokesVector& axis);

/// Sphere action of a unitary: jones_to_stokes(m stokes_to_jones(s)).
StokesVector rotate_stokes(const JonesMatrix& m, const StokesVector& s);

/// ||M'M - I||_F
double unitarity_error(const JonesMatrix& m);

/// min over unit phase lambda of ||A - lambda B||_F (closed form).
double phase_distance(const JonesMatrix& x, const JonesMatrix& y);
double phase_distance(const JonesVector& x, const JonesVector& y);

/// Sphere rotation angle of a unitary, ignoring global phase: 2 acos(|tr|/2).
/// Equals the worst-case deviation any state suffers under m.
double rotation_angle(const JonesMatrix& m);

/// Unitary polar factor (nearest unitary in Frobenius norm), via the
/// quadratically convergent Newton iteration X <- (X + X^-dagger)/2.
JonesMatrix nearest_unitary(const JonesMatrix& m);

/// Haar-distributed SU(2) element (uniform unit quaternion).
JonesMatrix haar_random(RngStream& rng);

/// Isotropic random point on the unit sphere.
StokesVector random_unit_stokes(RngStream& rng);

}  // namespace polctl
