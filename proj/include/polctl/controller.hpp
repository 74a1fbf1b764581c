#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "polctl/fiber.hpp"
#include "polctl/jones.hpp"
#include "polctl/rng.hpp"

namespace polctl {

/// The two non-orthogonal reference states (mutually unbiased pair) and the
/// feedback polarizers projecting onto them. `extinction` is the power
/// fraction the polarizers leak from the orthogonal state (0 = ideal).
struct ReferenceBasis {
  JonesVector s1_state;
  JonesVector s3_state;
  double extinction = 0.0;

  static ReferenceBasis standard();  // horizontal and +45 linear, ideal polarizers
};

/// Actuator state of the two-stage controller: four retarder plates with
/// fixed axes alternating H, +45, H, +45 (the general rotator R1) and one
/// H-axis plate (R3, which leaves the first reference state invariant).
struct ControllerState {
  std::array<double, 4> r1_retardances{0.0, 0.0, 0.0, 0.0};
  double r3_retardance = 0.0;
  double dither_step = 0.1;     // current probe amplitude, radians
  double dither_min = 0.01;     // adaptation floor
  double dither_max = 0.5;      // adaptation cap
  std::uint64_t iteration = 0;  // completed control cycles
};

/// Normalized detected powers behind the two reference polarizers.
struct FeedbackSample {
  double i1 = 0.0;
  double i3 = 0.0;
};

struct RealizedRotators {
  JonesMatrix r1;
  JonesMatrix r3;
};

/// Fixed plate axes of the R1 stage.
const std::array<StokesVector, 4>& plate_axes();

/// Jones matrices currently realized by the plate stack (plate 1 acts
/// first) and the R3 retarder.
RealizedRotators realize(const ControllerState& ctrl);

/// i1 = |<S1| R3 R1 T(w1) |S1>|^2, i3 = |<S3| R3 R1 T(w3) |S3>|^2, plus
/// Gaussian detector noise of std noise_std, clamped to [0,1]. No noise is
/// drawn when noise_std == 0.
FeedbackSample measure_feedback(const FiberChannel& ch, const ControllerState& ctrl,
                                const ReferenceBasis& basis, double noise_std, RngStream& rng);

/// Analytic solution of the control condition: r1 = diag(1, e^{i phi}) T^-1,
/// r3 = diag(1, e^{-i phi}); R3 R1 T is the identity up to global phase for
/// every phi.
struct OracleSolution {
  JonesMatrix r1;
  JonesMatrix r3;
};
OracleSolution oracle_solve(const JonesMatrix& t, double phi = 0.0);

/// Retardance 4-tuple whose realized stack matches `target_r1` up to global
/// phase within 1e-8 (damped Gauss-Newton on the rotation-vector residual,
/// fixed multi-starts). Throws SolverError if no start converges.
std::array<double, 4> retardances_for(const JonesMatrix& target_r1);

/// Outcome of one control cycle.
struct StepReport {
  int accepted = 0;          // actuator moves kept this cycle (max 5)
  int probes = 0;            // feedback measurements consumed
  FeedbackSample last;       // kept probe values after the final actuator of each stage
};

/// One dither cycle: for each R1 plate probe retardance and retardance +-
/// dither_step and keep the value maximizing i1, then the same for the R3
/// plate on i3. Ties keep the current retardance. Step adaptation: x0.7
/// (floored) after a cycle with no accepted move, x1.3 (capped) when all
/// five actuators moved.
StepReport control_step(ControllerState& ctrl, const FiberChannel& ch,
                        const ReferenceBasis& basis, double noise_std, RngStream& rng);

struct LoopSchedule {
  double dt = 0.0;           // channel integration step; 0 = one step per cycle
  double total_time = 0.0;   // seconds of simulated time to run
  double loop_period = 0.0;  // duration of one full control cycle, seconds
  int record_every = 1;      // emit one record per this many cycles
};

/// One emitted sample of the closed loop.
struct LoopRecord {
  double t = 0.0;                  // channel sim time, seconds
  StokesVector signal;             // received signal SOP at the carrier
  double deviation = 0.0;          // sphere angle to the launched SOP, radians
  double loss = 0.0;               // sin^2(deviation/2)
  double i1 = 0.0, i3 = 0.0;       // exact (noise-free) reference intensities
  ControllerState ctrl;            // controller snapshot
};

/// Interleave control cycles and channel drift at the stated cadence.
/// `signal_in` is the launched signal SOP probed at the carrier frequency.
/// Deterministic per (channel seed, rng, schedule).
std::vector<LoopRecord> run_closed_loop(FiberChannel& ch, ControllerState& ctrl,
                                        const ReferenceBasis& basis, const LoopSchedule& schedule,
                                        double noise_std, RngStream& rng,
                                        const JonesVector& signal_in, bool control_on);

/// Declares convergence after both intensities exceed 1 - threshold for
/// `cycles` consecutive control cycles.
class ConvergenceTracker {
 public:
  ConvergenceTracker(double threshold, int cycles) : threshold_(threshold), cycles_(cycles) {}
  void update(const FeedbackSample& s) {
    streak_ = (s.i1 > 1.0 - threshold_ && s.i3 > 1.0 - threshold_) ? streak_ + 1 : 0;
  }
  bool converged() const { return streak_ >= cycles_; }

 private:
  double threshold_;
  int cycles_;
  int streak_ = 0;
};

}  // namespace polctl
