#pragma once

#include <cstdint>
#include <span>

#include "polctl/jones.hpp"
#include "polctl/rng.hpp"

namespace polctl {

/// Gated single-photon receiver parameters (weak coherent source model).
struct DetectorParams {
  double mean_photons = 0.2;     // mu per gate
  double gate_width = 2.5e-9;    // seconds
  double gate_rate = 100e3;      // Hz
  double dark_rate = 4e-5;       // dark count probability per nanosecond
  double efficiency = 1.0;       // in [0,1]
  double crosstalk_prob = 0.0;   // reference leakage probability per gate
};

struct CountRecord {
  StokesVector analyzer_stokes;
  std::int64_t gates = 0;
  std::int64_t clicks = 0;
};

/// Per-gate click probability for a given fidelity F between the received
/// SOP and the analyzer: p = 1 - (1-p_sig)(1-p_dark)(1-p_xt) with
/// p_sig = 1 - exp(-mu eta F) and p_dark = 1 - exp(-dark_rate gate_ns).
double click_probability(const DetectorParams& params, double fidelity_to_analyzer);

/// Bernoulli-per-gate photon counting; F = (1 + analyzer.received)/2.
CountRecord simulate_counts(const DetectorParams& params, const StokesVector& analyzer,
                            const StokesVector& received, std::int64_t gates, RngStream& rng);

/// Mean of sin^2(theta/2) over a deviation-angle sequence: the optical QBER
/// added by imperfect polarization control.
double qber_added(std::span<const double> deviation_angles);

/// clicks_orthogonal / (clicks_orthogonal + clicks_correct).
double qber_measured(const CountRecord& correct, const CountRecord& orthogonal);

}  // namespace polctl
