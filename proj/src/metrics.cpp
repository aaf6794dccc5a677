#include "splitgibbs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "splitgibbs/errors.hpp"

namespace splitgibbs {

namespace {

double ratio_db(double num, double den) {
  if (den == 0.0) return kInfiniteDb;
  return 10.0 * std::log10(num / den);
}

}  // namespace

double snr_db(const ImageField& truth, const ImageField& estimate) {
  require_same_shape(truth, estimate, "snr_db");
  return ratio_db(squared_norm(truth), squared_norm(truth - estimate));
}

double psnr_db(const ImageField& truth, const ImageField& estimate) {
  require_same_shape(truth, estimate, "psnr_db");
  const double mse = squared_norm(truth - estimate) / static_cast<double>(truth.size());
  return ratio_db(255.0 * 255.0, mse);
}

double isnr_db(const ImageField& truth, const ImageField& observed_filled,
               const ImageField& estimate) {
  require_same_shape(truth, observed_filled, "isnr_db");
  require_same_shape(truth, estimate, "isnr_db");
  return ratio_db(squared_norm(truth - observed_filled), squared_norm(truth - estimate));
}

ImageField lift_observation(const MaskOperator& mask, const ImageField& y, double fill) {
  const Shape s = mask.input_shape();
  if (y.size() != mask.kept_indices().size())
    throw DimensionError("lift_observation: observation length does not match the mask");
  ImageField out(s.rows, s.cols, fill);
  const auto& kept = mask.kept_indices();
  for (std::size_t j = 0; j < kept.size(); ++j) out[kept[j]] = y[j];
  return out;
}

ImageField fill_with_observed_mean(const MaskOperator& mask, const ImageField& y) {
  return lift_observation(mask, y, mean(y));
}

std::vector<double> acf(std::span<const double> trace, std::size_t max_lag) {
  const std::size_t n = trace.size();
  if (n == 0) throw ParameterError("acf: empty trace");
  if (max_lag >= n) max_lag = n - 1;
  double m = 0.0;
  for (double v : trace) m += v;
  m /= static_cast<double>(n);

  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = trace[i] - m;
  double c0 = 0.0;
  for (double v : centered) c0 += v * v;

  std::vector<double> out(max_lag + 1, 0.0);
  out[0] = 1.0;
  if (c0 == 0.0) return out;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += centered[i] * centered[i + lag];
    out[lag] = c / c0;
  }
  return out;
}

std::vector<double> average_acf(const std::vector<std::vector<double>>& curves) {
  if (curves.empty()) return {};
  std::size_t len = curves.front().size();
  for (const auto& c : curves) len = std::min(len, c.size());
  std::vector<double> out(len, 0.0);
  for (const auto& c : curves)
    for (std::size_t i = 0; i < len; ++i) out[i] += c[i];
  for (double& v : out) v /= static_cast<double>(curves.size());
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ParameterError("quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("quantile: level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

CredibilityBounds credibility(const std::vector<ImageField>& samples, double level) {
  if (samples.empty()) throw ParameterError("credibility: no samples");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("credibility: level must be in (0, 1)");
  const double tail = 0.5 * (1.0 - level);
  CredibilityBounds b{ImageField::like(samples.front()), ImageField::like(samples.front())};
  std::vector<double> column(samples.size());
  for (std::size_t i = 0; i < b.low.size(); ++i) {
    for (std::size_t s = 0; s < samples.size(); ++s) column[s] = samples[s][i];
    b.low[i] = quantile(column, tail);
    b.high[i] = quantile(column, 1.0 - tail);
  }
  return b;
}

double coverage(const CredibilityBounds& bounds, const ImageField& truth) {
  require_same_shape(bounds.low, truth, "coverage");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (bounds.low[i] <= truth[i] && truth[i] <= bounds.high[i]) ++inside;
  return static_cast<double>(inside) / static_cast<double>(truth.size());
}

}  // namespace splitgibbs
