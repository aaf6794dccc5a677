#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "splitgibbs/image_field.hpp"
#include "splitgibbs/operators.hpp"

namespace splitgibbs {

/// Returned by the dB metrics when the error term is exactly zero.
inline constexpr double kInfiniteDb = std::numeric_limits<double>::infinity();

/// 10 log10 |x|^2 / |x - xhat|^2.
double snr_db(const ImageField& truth, const ImageField& estimate);
/// 10 log10 255^2 / (|x - xhat|^2 / N).
double psnr_db(const ImageField& truth, const ImageField& estimate);
/// 10 log10 |x - y|^2 / |x - xhat|^2, y already lifted to the image lattice.
double isnr_db(const ImageField& truth, const ImageField& observed_filled,
               const ImageField& estimate);

/// M x 1 masked observation lifted to the lattice, missing pixels set to `fill`.
ImageField lift_observation(const MaskOperator& mask, const ImageField& y, double fill);
/// lift_observation with the mean of the observed values as fill.
ImageField fill_with_observed_mean(const MaskOperator& mask, const ImageField& y);

/// Sample autocorrelation for lags 0..max_lag, normalized so lag 0 is 1. A
/// constant trace gives 1 followed by zeros.
std::vector<double> acf(std::span<const double> trace, std::size_t max_lag);

/// Mean of several autocorrelation curves of equal length.
std::vector<double> average_acf(const std::vector<std::vector<double>>& curves);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

struct CredibilityBounds {
  ImageField low;
  ImageField high;
};

/// Pixel-wise (1-level)/2 and 1-(1-level)/2 empirical quantiles.
CredibilityBounds credibility(const std::vector<ImageField>& samples, double level);

/// Fraction of pixels with low <= truth <= high.
double coverage(const CredibilityBounds& bounds, const ImageField& truth);

}  // namespace splitgibbs
