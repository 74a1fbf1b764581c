#include "polctl/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polctl/errors.hpp"

namespace polctl {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

double wrap_retardance(double r) {
  r = std::fmod(r, kTwoPi);
  return r < 0.0 ? r + kTwoPi : r;
}

const StokesVector kS1Axis{1.0, 0.0, 0.0};

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

/// Power behind a polarizer projecting on `ref` after the plate stack, the
/// R3 retarder and an already-propagated input `v`.
double stack_intensity(const std::array<double, 4>& rets, double r3_ret, const JonesVector& v,
                       const JonesVector& ref, double extinction) {
  JonesVector w = v;
  const auto& axes = plate_axes();
  for (int k = 0; k < 4; ++k) w = apply(rotation_about_axis(axes[k], rets[k]), w);
  w = apply(rotation_about_axis(kS1Axis, r3_ret), w);
  double f = fidelity(ref, w);
  return f + extinction * (1.0 - f);
}

double with_noise(double value, double noise_std, RngStream& rng) {
  if (noise_std != 0.0) value += noise_std * rng.normal();
  return clamp01(value);
}

struct Quaternion {
  double w, x, y, z;
};

/// Rotation-vector (log map) of an SU(2) element, sign-fixed to w >= 0.
Quaternion to_quaternion(const JonesMatrix& q) {
  Quaternion out{0.5 * (q.a.real() + q.d.real()),
                 0.5 * (q.d.imag() - q.a.imag()),
                 -0.5 * (q.b.imag() + q.c.imag()),
                 0.5 * (q.c.real() - q.b.real())};
  if (out.w < 0.0) {
    out.w = -out.w;
    out.x = -out.x;
    out.y = -out.y;
    out.z = -out.z;
  }
  return out;
}

struct RotationResidual {
  StokesVector eps;  // psi * unit axis
  double psi;        // rotation angle in [0, pi]
};

RotationResidual log_residual(const JonesMatrix& realized, const JonesMatrix& target_su2_inv) {
  Quaternion q = to_quaternion(realized * target_su2_inv);
  double vn = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
  double psi = 2.0 * std::atan2(vn, q.w);
  if (vn < 1e-300) return {{0.0, 0.0, 0.0}, psi};
  return {{psi * q.x / vn, psi * q.y / vn, psi * q.z / vn}, psi};
}

/// Solve (J J^T + lambda I) y = e for the 3x3 symmetric system, return -J^T y.
bool damped_step(const std::array<StokesVector, 4>& jac, const StokesVector& e, double lambda,
                 std::array<double, 4>& delta) {
  double m[3][3] = {{lambda, 0.0, 0.0}, {0.0, lambda, 0.0}, {0.0, 0.0, lambda}};
  for (const auto& col : jac) {
    double v[3] = {col.s1, col.s2, col.s3};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] += v[i] * v[j];
  }
  double rhs[3] = {e.s1, e.s2, e.s3};
  // Gaussian elimination with partial pivoting
  int idx[3] = {0, 1, 2};
  for (int i = 0; i < 3; ++i) {
    int p = i;
    for (int k = i + 1; k < 3; ++k)
      if (std::abs(m[idx[k]][i]) > std::abs(m[idx[p]][i])) p = k;
    std::swap(idx[i], idx[p]);
    double piv = m[idx[i]][i];
    if (std::abs(piv) < 1e-300) return false;
    for (int k = i + 1; k < 3; ++k) {
      double f = m[idx[k]][i] / piv;
      for (int j = i; j < 3; ++j) m[idx[k]][j] -= f * m[idx[i]][j];
      rhs[idx[k]] -= f * rhs[idx[i]];
    }
  }
  double y[3];
  for (int i = 2; i >= 0; --i) {
    double s = rhs[idx[i]];
    for (int j = i + 1; j < 3; ++j) s -= m[idx[i]][j] * y[j];
    y[i] = s / m[idx[i]][i];
  }
  StokesVector yv{y[0], y[1], y[2]};
  for (int k = 0; k < 4; ++k) delta[k] = -jac[k].dot(yv);
  return true;
}

JonesMatrix realize_r1(const std::array<double, 4>& rets) {
  const auto& axes = plate_axes();
  JonesMatrix r = rotation_about_axis(axes[0], rets[0]);
  for (int k = 1; k < 4; ++k) r = rotation_about_axis(axes[k], rets[k]) * r;
  return r;
}

}  // namespace

const std::array<StokesVector, 4>& plate_axes() {
  static const std::array<StokesVector, 4> axes{
      StokesVector{1.0, 0.0, 0.0}, StokesVector{0.0, 1.0, 0.0},
      StokesVector{1.0, 0.0, 0.0}, StokesVector{0.0, 1.0, 0.0}};
  return axes;
}

ReferenceBasis ReferenceBasis::standard() { return {jones_h(), jones_d45(), 0.0}; }

RealizedRotators realize(const ControllerState& ctrl) {
  return {realize_r1(ctrl.r1_retardances), rotation_about_axis(kS1Axis, ctrl.r3_retardance)};
}

FeedbackSample measure_feedback(const FiberChannel& ch, const ControllerState& ctrl,
                                const ReferenceBasis& basis, double noise_std, RngStream& rng) {
  double w0 = ch.spec().omega0;
  double dw = ch.spec().time_multiplexed ? 0.0 : ch.spec().delta_omega;
  JonesVector v1 = apply(ch.transfer(w0 - dw), basis.s1_state);
  JonesVector v3 = apply(ch.transfer(w0 + dw), basis.s3_state);
  double i1 = stack_intensity(ctrl.r1_retardances, ctrl.r3_retardance, v1, basis.s1_state,
                              basis.extinction);
  double i3 = stack_intensity(ctrl.r1_retardances, ctrl.r3_retardance, v3, basis.s3_state,
                              basis.extinction);
  return {with_noise(i1, noise_std, rng), with_noise(i3, noise_std, rng)};
}

OracleSolution oracle_solve(const JonesMatrix& t, double phi) {
  if (unitarity_error(t) > 1e-6) throw std::invalid_argument("oracle_solve: input is not unitary");
  JonesMatrix phase_plate{{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, std::polar(1.0, phi)};
  JonesMatrix r3{{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, std::polar(1.0, -phi)};
  return {phase_plate * t.inverse(), r3};
}

std::array<double, 4> retardances_for(const JonesMatrix& target_r1) {
  if (unitarity_error(target_r1) > 1e-6)
    throw std::invalid_argument("retardances_for: target is not unitary");
  // normalize to SU(2); the global phase is not realizable nor needed
  Complex det_root = std::sqrt(target_r1.det());
  JonesMatrix target = (Complex{1.0, 0.0} / det_root) * target_r1;
  JonesMatrix target_inv = target.dagger();

  static const std::array<std::array<double, 4>, 8> starts{{
      {0.0, 0.0, 0.0, 0.0},
      {M_PI_2, M_PI_2, M_PI_2, M_PI_2},
      {M_PI, 0.0, M_PI, 0.0},
      {0.0, M_PI, 0.0, M_PI},
      {M_PI_2, M_PI, 1.5 * M_PI, M_PI_2},
      {1.5 * M_PI, M_PI_2, M_PI_2, 1.5 * M_PI},
      {M_PI, M_PI_2, 0.0, 1.5 * M_PI},
      {0.25 * M_PI, 0.75 * M_PI, 1.25 * M_PI, 1.75 * M_PI},
  }};

  const auto& axes = plate_axes();
  for (const auto& start : starts) {
    std::array<double, 4> r = start;
    RotationResidual res = log_residual(realize_r1(r), target_inv);
    double lambda = 1e-6;
    for (int iter = 0; iter < 120 && res.psi >= 1e-11; ++iter) {
      // Jacobian column k: plate axis k carried through the plates above it
      std::array<StokesVector, 4> jac;
      JonesMatrix left = JonesMatrix::identity();
      for (int k = 3; k >= 0; --k) {
        jac[k] = rotate_stokes(left, axes[k]);
        left = left * rotation_about_axis(axes[k], r[k]);
      }
      bool improved = false;
      for (int attempt = 0; attempt < 9; ++attempt) {
        std::array<double, 4> delta;
        if (!damped_step(jac, res.eps, lambda, delta)) break;
        std::array<double, 4> r_try = r;
        for (int k = 0; k < 4; ++k) r_try[k] += delta[k];
        RotationResidual res_try = log_residual(realize_r1(r_try), target_inv);
        if (res_try.psi < res.psi) {
          r = r_try;
          res = res_try;
          lambda = std::max(lambda / 3.0, 1e-12);
          improved = true;
          break;
        }
        lambda *= 10.0;
      }
      if (!improved) break;
    }
    if (res.psi < 1e-11) {
      for (auto& v : r) v = wrap_retardance(v);
      return r;
    }
  }
  throw SolverError("retardances_for: no start converged to the target rotator");
}

StepReport control_step(ControllerState& ctrl, const FiberChannel& ch,
                        const ReferenceBasis& basis, double noise_std, RngStream& rng) {
  StepReport report;
  double w0 = ch.spec().omega0;
  double dw = ch.spec().time_multiplexed ? 0.0 : ch.spec().delta_omega;
  // channel is static within the cycle: propagate the references once
  JonesVector v1 = apply(ch.transfer(w0 - dw), basis.s1_state);
  JonesVector v3 = apply(ch.transfer(w0 + dw), basis.s3_state);

  auto probe = [&](const JonesVector& v, const JonesVector& ref) {
    double i = stack_intensity(ctrl.r1_retardances, ctrl.r3_retardance, v, ref, basis.extinction);
    ++report.probes;
    return with_noise(i, noise_std, rng);
  };

  double step = ctrl.dither_step;
  double kept_i1 = 0.0;
  for (int k = 0; k < 4; ++k) {
    double current = ctrl.r1_retardances[k];
    double best = probe(v1, basis.s1_state);
    double best_ret = current;
    for (double cand : {current + step, current - step}) {
      ctrl.r1_retardances[k] = cand;
      double i = probe(v1, basis.s1_state);
      if (i > best) {  // ties keep the earlier candidate (current first)
        best = i;
        best_ret = cand;
      }
    }
    ctrl.r1_retardances[k] = wrap_retardance(best_ret);
    if (best_ret != current) ++report.accepted;
    kept_i1 = best;
  }

  double current = ctrl.r3_retardance;
  double best = probe(v3, basis.s3_state);
  double best_ret = current;
  for (double cand : {current + step, current - step}) {
    ctrl.r3_retardance = cand;
    double i = probe(v3, basis.s3_state);
    if (i > best) {
      best = i;
      best_ret = cand;
    }
  }
  ctrl.r3_retardance = wrap_retardance(best_ret);
  if (best_ret != current) ++report.accepted;
  report.last = {kept_i1, best};

  if (report.accepted == 0)
    ctrl.dither_step = std::max(ctrl.dither_step * 0.7, ctrl.dither_min);
  else if (report.accepted == 5)
    ctrl.dither_step = std::min(ctrl.dither_step * 1.3, ctrl.dither_max);
  ++ctrl.iteration;
  return report;
}

std::vector<LoopRecord> run_closed_loop(FiberChannel& ch, ControllerState& ctrl,
                                        const ReferenceBasis& basis, const LoopSchedule& schedule,
                                        double noise_std, RngStream& rng,
                                        const JonesVector& signal_in, bool control_on) {
  if (!(schedule.loop_period > 0.0) || !(schedule.total_time > 0.0) || schedule.record_every < 1 ||
      schedule.dt < 0.0 || schedule.dt > schedule.loop_period)
    throw std::invalid_argument("run_closed_loop: invalid schedule");

  int n_sub = schedule.dt == 0.0
                  ? 1
                  : std::max(1, static_cast<int>(std::llround(schedule.loop_period / schedule.dt)));
  double dt_eff = schedule.loop_period / n_sub;
  auto n_cycles =
      std::max<std::int64_t>(1, std::llround(schedule.total_time / schedule.loop_period));

  std::vector<LoopRecord> records;
  records.reserve(static_cast<std::size_t>(n_cycles / schedule.record_every) + 1);
  StokesVector target = jones_to_stokes(signal_in);

  for (std::int64_t c = 1; c <= n_cycles; ++c) {
    if (control_on) control_step(ctrl, ch, basis, noise_std, rng);
    for (int s = 0; s < n_sub; ++s) ch.step(dt_eff);
    if (c % schedule.record_every == 0) {
      auto [r1, r3] = realize(ctrl);
      JonesVector out = apply(r3 * (r1 * ch.transfer(ch.spec().omega0)), signal_in);
      StokesVector so = jones_to_stokes(out);
      double dev = sphere_angle(so, target);
      FeedbackSample exact = measure_feedback(ch, ctrl, basis, 0.0, rng);
      records.push_back({ch.sim_time(), so, dev, 0.5 * (1.0 - std::cos(dev)), exact.i1, exact.i3,
                         ctrl});
    }
  }
  return records;
}

}  // namespace polctl
