#include <cmath>
#include <vector>

#include "doctest.h"
#include "splitgibbs/errors.hpp"
#include "splitgibbs/metrics.hpp"
#include "splitgibbs/random.hpp"

using namespace splitgibbs;

TEST_CASE("SNR and PSNR") {
  const ImageField x(1, 2, {3.0, 4.0});
  CHECK(snr_db(x, x) == kInfiniteDb);
  CHECK(psnr_db(x, x) == kInfiniteDb);
  CHECK(snr_db(x, ImageField(1, 2, {3.0, 3.0})) == doctest::Approx(10.0 * std::log10(25.0)));
  // Unit error everywhere: mse 1.
  const ImageField flat(4, 4, 100.0), off(4, 4, 101.0);
  CHECK(psnr_db(flat, off) == doctest::Approx(20.0 * std::log10(255.0)));
  CHECK_THROWS_AS(snr_db(x, ImageField(2, 1)), DimensionError);
}

TEST_CASE("ISNR") {
  const ImageField x(1, 3, {1.0, 2.0, 3.0});
  const ImageField y(1, 3, {1.5, 2.0, 2.0});
  CHECK(isnr_db(x, y, y) == 0.0);
  CHECK(isnr_db(x, y, x) == kInfiniteDb);
  // |x - y|^2 = 1.25, |x - xhat|^2 = 0.125.
  CHECK(isnr_db(x, y, ImageField(1, 3, {1.0, 2.5, 3.0})) == doctest::Approx(10.0 * std::log10(5.0)));
}

TEST_CASE("Lifting a masked observation") {
  const MaskOperator mask({2, 2}, {1, 2});
  const ImageField y(2, 1, {4.0, 8.0});
  const ImageField lifted = lift_observation(mask, y, -1.0);
  CHECK(lifted == ImageField(2, 2, {-1.0, 4.0, 8.0, -1.0}));
  CHECK(fill_with_observed_mean(mask, y) == ImageField(2, 2, {6.0, 4.0, 8.0, 6.0}));
  CHECK_THROWS_AS(lift_observation(mask, ImageField(3, 1), 0.0), DimensionError);
}

TEST_CASE("ACF by hand") {
  const std::vector<double> t{1.0, 2.0, 3.0, 4.0};
  const auto a = acf(t, 10);
  REQUIRE(a.size() == 4);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == doctest::Approx(0.25));
  CHECK(a[2] == doctest::Approx(-0.3));
  CHECK(a[3] == doctest::Approx(-0.45));
  CHECK_THROWS_AS(acf(std::vector<double>{}, 3), ParameterError);
}

TEST_CASE("ACF of a constant trace") {
  const std::vector<double> t(50, 7.0);
  const auto a = acf(t, 5);
  CHECK(a == std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("ACF of white noise stays inside the large-sample band") {
  RandomStream rng(1);
  const std::size_t n = 10000;
  std::vector<double> t(n);
  for (double& v : t) v = rng.normal();
  const auto a = acf(t, 30);
  for (std::size_t lag = 1; lag < a.size(); ++lag) CHECK(std::abs(a[lag]) <= 4.0 / std::sqrt(double(n)));
}

TEST_CASE("ACF of an AR(1) process decays geometrically") {
  RandomStream rng(2);
  const double phi = 0.7;
  const std::size_t n = 200000;
  std::vector<double> t(n);
  double v = 0.0;
  for (double& s : t) s = v = phi * v + rng.normal();
  const auto a = acf(t, 5);
  for (std::size_t lag = 1; lag <= 5; ++lag) CHECK(a[lag] == doctest::Approx(std::pow(phi, lag)).epsilon(0.03));
}

TEST_CASE("Averaging ACF curves") {
  const auto avg = average_acf({{1.0, 0.5, 0.2}, {1.0, 0.3}});
  REQUIRE(avg.size() == 2);
  CHECK(avg[1] == doctest::Approx(0.4));
  CHECK(average_acf({}).empty());
}

TEST_CASE("Quantiles interpolate between order statistics") {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile(v, 0.9) == doctest::Approx(3.7));
  CHECK(quantile({5.0}, 0.3) == 5.0);
  CHECK_THROWS_AS(quantile({}, 0.5), ParameterError);
  CHECK_THROWS_AS(quantile(v, 1.5), ParameterError);
}

TEST_CASE("Credibility bounds and coverage") {
  std::vector<ImageField> samples;
  for (int s = 0; s <= 100; ++s) samples.emplace_back(1, 2, std::vector<double>{double(s), -double(s)});
  const auto b = credibility(samples, 0.9);
  CHECK(b.low[0] == doctest::Approx(5.0));
  CHECK(b.high[0] == doctest::Approx(95.0));
  CHECK(b.low[1] == doctest::Approx(-95.0));
  CHECK(b.high[1] == doctest::Approx(-5.0));
  CHECK(coverage(b, ImageField(1, 2, {50.0, 0.0})) == 0.5);
  CHECK(coverage(b, ImageField(1, 2, {5.0, -95.0})) == 1.0);
  CHECK_THROWS_AS(credibility({}, 0.9), ParameterError);
  CHECK_THROWS_AS(credibility(samples, 1.0), ParameterError);
}

TEST_CASE("Credibility intervals of independent Gaussian draws cover about the nominal fraction") {
  RandomStream rng(3);
  std::vector<ImageField> samples;
  for (int s = 0; s < 2000; ++s) {
    ImageField f(20, 20);
    rng.fill_normal(f.values());
    samples.push_back(std::move(f));
  }
  ImageField truth(20, 20);
  rng.fill_normal(truth.values());
  const double c = coverage(credibility(samples, 0.9), truth);
  // Binomial spread over 400 pixels is 1.5%.
  CHECK(std::abs(c - 0.9) < 0.05);
}
