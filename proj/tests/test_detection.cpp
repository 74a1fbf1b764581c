#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "polctl/detection.hpp"
#include "polctl/errors.hpp"

using namespace polctl;

namespace {

DetectorParams paper_detector() {
  // 0.2 photons per 2.5 ns gate at 100 kHz, 4e-5/ns dark probability
  return {0.2, 2.5e-9, 100e3, 4e-5, 1.0, 0.0};
}

}  // namespace

TEST_CASE("click_probability at the published operating point") {
  DetectorParams det = paper_detector();

  DetectorParams dark_only = det;
  dark_only.mean_photons = 0.0;
  double p_dark = 1.0 - std::exp(-1e-4);
  CHECK(click_probability(dark_only, 1.0) == doctest::Approx(p_dark).epsilon(1e-12));
  CHECK(p_dark == doctest::Approx(1.0e-4).epsilon(1e-3));

  // an orthogonal analyzer sees only dark counts
  CHECK(click_probability(det, 0.0) == doctest::Approx(p_dark).epsilon(1e-12));

  DetectorParams noiseless = det;
  noiseless.dark_rate = 0.0;
  CHECK(click_probability(noiseless, 1.0) == doctest::Approx(1.0 - std::exp(-0.2)).epsilon(1e-12));
  CHECK(1.0 - std::exp(-0.2) == doctest::Approx(0.1813).epsilon(1e-3));
}

TEST_CASE("click_probability is monotone in every rate") {
  DetectorParams det = paper_detector();
  double base = click_probability(det, 0.5);
  for (double f = 0.0; f <= 0.95; f += 0.05)
    CHECK(click_probability(det, f) <= click_probability(det, std::min(1.0, f + 0.05)) + 1e-15);
  DetectorParams d = det;
  d.mean_photons *= 2.0;
  CHECK(click_probability(d, 0.5) > base);
  d = det;
  d.dark_rate *= 2.0;
  CHECK(click_probability(d, 0.5) > base);
  d = det;
  d.crosstalk_prob = 0.01;
  CHECK(click_probability(d, 0.5) > base);
  d = det;
  d.efficiency = 0.5;
  CHECK(click_probability(d, 0.5) < base);
  CHECK_THROWS_AS(click_probability(det, 1.5), std::invalid_argument);
}

TEST_CASE("simulate_counts: zero probability yields zero clicks") {
  DetectorParams det{0.0, 2.5e-9, 100e3, 0.0, 1.0, 0.0};
  RngStream rng(1);
  CountRecord rec = simulate_counts(det, {1, 0, 0}, {-1, 0, 0}, 100000, rng);
  CHECK(rec.clicks == 0);
  CHECK(rec.gates == 100000);
  CHECK_THROWS_AS(simulate_counts(det, {1, 0, 0}, {1, 0, 0}, 0, rng), std::invalid_argument);
}

TEST_CASE("simulate_counts matches the binomial expectation at the dark floor") {
  DetectorParams det = paper_detector();
  RngStream rng(21);
  const std::int64_t gates = 1000000;
  // orthogonal analyzer: p = p_dark ~ 1e-4, sigma ~ 10 counts
  CountRecord rec = simulate_counts(det, {1, 0, 0}, {-1, 0, 0}, gates, rng);
  double expect = click_probability(det, 0.0) * gates;
  double sigma = std::sqrt(expect * (1.0 - expect / gates));
  CHECK(std::abs(rec.clicks - expect) < 3.0 * sigma);
}

TEST_CASE("empirical click rate converges to click_probability") {
  DetectorParams det = paper_detector();
  RngStream rng(23);
  const std::int64_t gates = 1000000;
  for (double f : {0.25, 1.0}) {
    StokesVector received{2.0 * f - 1.0,
                          std::sqrt(std::max(0.0, 1.0 - (2 * f - 1) * (2 * f - 1))), 0.0};
    CountRecord rec = simulate_counts(det, {1, 0, 0}, received, gates, rng);
    double p = click_probability(det, f);
    double sigma = std::sqrt(p * (1.0 - p) * gates);
    CHECK(std::abs(rec.clicks - p * gates) < 4.0 * sigma);
  }
}

TEST_CASE("equator sweep produces a raised cosine with a dark floor") {
  DetectorParams det = paper_detector();
  RngStream rng(29);
  const std::int64_t gates = 200000;
  StokesVector received{1, 0, 0};
  std::int64_t peak = 0, trough = gates;
  for (int k = 0; k < 36; ++k) {
    double eq = 2.0 * M_PI * k / 36;
    StokesVector analyzer{std::cos(eq), std::sin(eq), 0.0};
    CountRecord rec = simulate_counts(det, analyzer, received, gates, rng);
    double p = click_probability(det, 0.5 * (1.0 + analyzer.dot(received)));
    double sigma = std::sqrt(p * (1.0 - p) * gates);
    CHECK(std::abs(rec.clicks - p * gates) <= 5.0 * sigma + 1.0);
    peak = std::max(peak, rec.clicks);
    trough = std::min(trough, rec.clicks);
  }
  CHECK(peak > 0.9 * (1.0 - std::exp(-0.2)) * gates);
  CHECK(trough < 3.0 * 1e-4 * gates);
}

TEST_CASE("qber_added examples") {
  std::vector<double> zeros(100, 0.0);
  CHECK(qber_added(zeros) == 0.0);

  std::vector<double> two_deg(50, 2.0 * M_PI / 180.0);
  CHECK(qber_added(two_deg) == doctest::Approx(3.0459e-4).epsilon(1e-3));

  std::vector<double> ten_deg(50, 10.0 * M_PI / 180.0);
  CHECK(qber_added(ten_deg) == doctest::Approx(7.596e-3).epsilon(1e-3));

  CHECK_THROWS_AS(qber_added(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("qber_added is bounded by the worst angle") {
  RngStream rng(31);
  std::vector<double> angles;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    angles.push_back(rng.u01() * M_PI);
    worst = std::max(worst, angles.back());
  }
  double s = std::sin(worst / 2);
  CHECK(qber_added(angles) <= s * s);
}

TEST_CASE("qber_measured") {
  CountRecord correct{{1, 0, 0}, 1000000, 181269};
  CountRecord none{{-1, 0, 0}, 1000000, 0};
  CHECK(qber_measured(correct, none) == 0.0);

  CountRecord equal_a{{1, 0, 0}, 1000, 250};
  CountRecord equal_b{{-1, 0, 0}, 1000, 250};
  CHECK(qber_measured(equal_a, equal_b) == doctest::Approx(0.5));

  // detector-floor QBER at the published parameters: dark/(dark + signal)
  DetectorParams det = paper_detector();
  double p_sig = click_probability(det, 1.0);
  double p_dark = click_probability(det, 0.0);
  CountRecord c{{1, 0, 0}, 1000000, static_cast<std::int64_t>(p_sig * 1000000)};
  CountRecord o{{-1, 0, 0}, 1000000, static_cast<std::int64_t>(p_dark * 1000000)};
  CHECK(qber_measured(c, o) == doctest::Approx(5.5e-4).epsilon(0.02));

  CountRecord empty_a{{1, 0, 0}, 10, 0};
  CountRecord empty_b{{-1, 0, 0}, 10, 0};
  CHECK_THROWS_AS(qber_measured(empty_a, empty_b), UndefinedQberError);
}
