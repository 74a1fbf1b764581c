#include "polctl/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polctl/errors.hpp"

namespace polctl {

namespace {
void validate_params(const DetectorParams& p) {
  if (!(p.mean_photons >= 0.0) || !(p.gate_width >= 0.0) || !(p.gate_rate > 0.0) ||
      !(p.dark_rate >= 0.0))
    throw std::invalid_argument("DetectorParams: negative rate or width");
  if (!(p.efficiency >= 0.0) || p.efficiency > 1.0)
    throw std::invalid_argument("DetectorParams: efficiency outside [0,1]");
  if (!(p.crosstalk_prob >= 0.0) || p.crosstalk_prob > 1.0)
    throw std::invalid_argument("DetectorParams: crosstalk_prob outside [0,1]");
}
}  // namespace

double click_probability(const DetectorParams& params, double fidelity_to_analyzer) {
  validate_params(params);
  if (!(fidelity_to_analyzer >= -1e-12) || fidelity_to_analyzer > 1.0 + 1e-12)
    throw std::invalid_argument("click_probability: fidelity outside [0,1]");
  double f = std::clamp(fidelity_to_analyzer, 0.0, 1.0);
  double p_sig = -std::expm1(-params.mean_photons * params.efficiency * f);
  double p_dark = -std::expm1(-params.dark_rate * params.gate_width * 1e9);
  double p = 1.0 - (1.0 - p_sig) * (1.0 - p_dark) * (1.0 - params.crosstalk_prob);
  return std::clamp(p, 0.0, 1.0);
}

CountRecord simulate_counts(const DetectorParams& params, const StokesVector& analyzer,
                            const StokesVector& received, std::int64_t gates, RngStream& rng) {
  if (gates <= 0) throw std::invalid_argument("simulate_counts: gates must be > 0");
  StokesVector a = analyzer.normalized();
  StokesVector r = received.normalized();
  double f = std::clamp(0.5 * (1.0 + a.dot(r)), 0.0, 1.0);
  double p = click_probability(params, f);
  std::int64_t clicks = 0;
  for (std::int64_t g = 0; g < gates; ++g)
    if (rng.u01() <= p) ++clicks;
  return {a, gates, clicks};
}

double qber_added(std::span<const double> deviation_angles) {
  if (deviation_angles.empty()) throw std::invalid_argument("qber_added: empty sequence");
  double sum = 0.0;
  for (double theta : deviation_angles) {
    double s = std::sin(0.5 * theta);
    sum += s * s;
  }
  return sum / static_cast<double>(deviation_angles.size());
}

double qber_measured(const CountRecord& correct, const CountRecord& orthogonal) {
  std::int64_t total = correct.clicks + orthogonal.clicks;
  if (total <= 0) throw UndefinedQberError("qber_measured: zero total clicks");
  return static_cast<double>(orthogonal.clicks) / static_cast<double>(total);
}

}  // namespace polctl
