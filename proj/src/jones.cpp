#include "polctl/jones.hpp"

#include <cmath>
#include <stdexcept>

namespace polctl {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_finite(const JonesVector& v, const char* what) {
  if (!finite(v.ex) || !finite(v.ey)) throw std::invalid_argument(std::string(what) + ": non-finite amplitude");
}

void require_unit(const StokesVector& s, const char* what) {
  double n = s.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6)
    throw std::invalid_argument(std::string(what) + ": Stokes vector is not unit norm");
}

}  // namespace

double StokesVector::norm() const { return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3); }

StokesVector StokesVector::normalized() const {
  double n = norm();
  if (!(n > 1e-12) || !std::isfinite(n)) throw std::invalid_argument("StokesVector::normalized: zero or non-finite norm");
  return {s1 / n, s2 / n, s3 / n};
}

double JonesVector::norm() const { return std::sqrt(std::norm(ex) + std::norm(ey)); }

JonesVector JonesVector::normalized() const {
  require_finite(*this, "JonesVector::normalized");
  double n = norm();
  if (!(n > 1e-12)) throw std::invalid_argument("JonesVector::normalized: zero norm");
  return {ex / n, ey / n};
}

JonesMatrix JonesMatrix::dagger() const {
  return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
}

JonesMatrix JonesMatrix::inverse() const {
  Complex dd = det();
  if (!(std::abs(dd) > 1e-300)) throw std::invalid_argument("JonesMatrix::inverse: singular matrix");
  return {d / dd, -b / dd, -c / dd, a / dd};
}

double JonesMatrix::frobenius_norm() const {
  return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
}

double JonesMatrix::spectral_norm() const {
  // singular values: s1^2 + s2^2 = ||M||_F^2, s1 s2 = |det|
  double f = std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
  double dd = std::abs(det());
  double disc = f * f - 4.0 * dd * dd;
  if (disc < 0.0) disc = 0.0;
  return std::sqrt(0.5 * (f + std::sqrt(disc)));
}

JonesMatrix operator*(const JonesMatrix& x, const JonesMatrix& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
          x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

JonesMatrix operator+(const JonesMatrix& x, const JonesMatrix& y) {
  return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
}

JonesMatrix operator-(const JonesMatrix& x, const JonesMatrix& y) {
  return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
}

JonesMatrix operator*(Complex s, const JonesMatrix& x) {
  return {s * x.a, s * x.b, s * x.c, s * x.d};
}

JonesVector jones_h() { return {{1.0, 0.0}, {0.0, 0.0}}; }
JonesVector jones_v() { return {{0.0, 0.0}, {1.0, 0.0}}; }
JonesVector jones_d45() {
  double r = 1.0 / std::sqrt(2.0);
  return {{r, 0.0}, {r, 0.0}};
}
JonesVector jones_m45() {
  double r = 1.0 / std::sqrt(2.0);
  return {{r, 0.0}, {-r, 0.0}};
}
JonesVector jones_rcp() {
  double r = 1.0 / std::sqrt(2.0);
  return {{r, 0.0}, {0.0, r}};
}

Complex inner(const JonesVector& a, const JonesVector& b) {
  return std::conj(a.ex) * b.ex + std::conj(a.ey) * b.ey;
}

JonesMatrix compose(const JonesMatrix& x, const JonesMatrix& y) { return x * y; }

JonesVector apply(const JonesMatrix& m, const JonesVector& v) {
  return {m.a * v.ex + m.b * v.ey, m.c * v.ex + m.d * v.ey};
}

StokesVector jones_to_stokes(const JonesVector& v) {
  require_finite(v, "jones_to_stokes");
  double s0 = std::norm(v.ex) + std::norm(v.ey);
  if (!(s0 > 1e-300)) throw std::invalid_argument("jones_to_stokes: zero field");
  Complex x = std::conj(v.ex) * v.ey;
  return {(std::norm(v.ex) - std::norm(v.ey)) / s0, 2.0 * x.real() / s0, 2.0 * x.imag() / s0};
}

JonesVector stokes_to_jones(const StokesVector& s) {
  require_unit(s, "stokes_to_jones");
  StokesVector u = s.normalized();
  double half = 0.5 * std::acos(std::clamp(u.s1, -1.0, 1.0));
  double ex = std::cos(half);
  double ey = std::sin(half);
  // representative phase: ex real non-negative, ey phase from the equator
  // components; at the south pole (ex ~ 0, phase undefined) ey is fixed
  // real positive.
  double ph = (u.s2 * u.s2 + u.s3 * u.s3 > 1e-300) ? std::atan2(u.s3, u.s2) : 0.0;
  JonesVector v{{ex, 0.0}, {ey * std::cos(ph), ey * std::sin(ph)}};
  return v.normalized();
}

double fidelity(const JonesVector& a, const JonesVector& b) {
  require_finite(a, "fidelity");
  require_finite(b, "fidelity");
  double na = std::norm(a.ex) + std::norm(a.ey);
  double nb = std::norm(b.ex) + std::norm(b.ey);
  if (!(na > 1e-300) || !(nb > 1e-300)) throw std::invalid_argument("fidelity: zero field");
  return std::norm(inner(a, b)) / (na * nb);
}

double sphere_angle(const StokesVector& a, const StokesVector& b) {
  require_unit(a, "sphere_angle");
  require_unit(b, "sphere_angle");
  double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

JonesMatrix pauli_dot(const StokesVector& n) {
  // sigma_1 = diag(1,-1), sigma_2 = [[0,1],[1,0]], sigma_3 = [[0,-i],[i,0]]
  return {{n.s1, 0.0}, {n.s2, -n.s3}, {n.s2, n.s3}, {-n.s1, 0.0}};
}

JonesMatrix rotation_about_axis(const StokesVector& axis, double angle) {
  require_unit(axis, "rotation_about_axis");
  if (!std::isfinite(angle)) throw std::invalid_argument("rotation_about_axis: non-finite angle");
  StokesVector n = axis.normalized();
  double c = std::cos(0.5 * angle);
  double s = std::sin(0.5 * angle);
  return {{c, -s * n.s1}, {-s * n.s3, -s * n.s2}, {s * n.s3, -s * n.s2}, {c, s * n.s1}};
}

StokesVector rotate_stokes(const JonesMatrix& m, const StokesVector& s) {
  return jones_to_stokes(apply(m, stokes_to_jones(s)));
}

double unitarity_error(const JonesMatrix& m) {
  return (m.dagger() * m - JonesMatrix::identity()).frobenius_norm();
}

double phase_distance(const JonesMatrix& x, const JonesMatrix& y) {
  // optimal phase is tr(Y'X)/|tr(Y'X)|; forming the difference explicitly
  // keeps full precision near zero distance
  Complex t = (y.dagger() * x).trace();
  Complex lambda = std::abs(t) > 1e-300 ? t / std::abs(t) : Complex{1.0, 0.0};
  return (x - lambda * y).frobenius_norm();
}

double phase_distance(const JonesVector& x, const JonesVector& y) {
  Complex t = inner(y, x);
  Complex lambda = std::abs(t) > 1e-300 ? t / std::abs(t) : Complex{1.0, 0.0};
  JonesVector d{x.ex - lambda * y.ex, x.ey - lambda * y.ey};
  return d.norm();
}

double rotation_angle(const JonesMatrix& m) {
  return 2.0 * std::acos(std::clamp(0.5 * std::abs(m.trace()), 0.0, 1.0));
}

JonesMatrix nearest_unitary(const JonesMatrix& m) {
  JonesMatrix x = m;
  for (int i = 0; i < 32; ++i) {
    if (unitarity_error(x) < 1e-14) return x;
    JonesMatrix inv = x.inverse();
    x = Complex{0.5, 0.0} * (x + inv.dagger());
  }
  if (unitarity_error(x) < 1e-9) return x;
  throw std::invalid_argument("nearest_unitary: iteration failed (singular input?)");
}

JonesMatrix haar_random(RngStream& rng) {
  // uniform unit quaternion (q0, q) -> q0 I - i q.sigma
  for (;;) {
    double q0 = rng.normal();
    double q1 = rng.normal();
    double q2 = rng.normal();
    double q3 = rng.normal();
    double n = std::sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3);
    if (n < 1e-6) continue;
    q0 /= n;
    StokesVector q{q1 / n, q2 / n, q3 / n};
    return Complex{q0, 0.0} * JonesMatrix::identity() + Complex{0.0, -1.0} * pauli_dot(q);
  }
}

StokesVector random_unit_stokes(RngStream& rng) {
  for (;;) {
    StokesVector s{rng.normal(), rng.normal(), rng.normal()};
    double n = s.norm();
    if (n > 1e-6) return {s.s1 / n, s.s2 / n, s.s3 / n};
  }
}

}  // namespace polctl
