#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "splitgibbs/gaussian.hpp"
#include "splitgibbs/image_field.hpp"
#include "splitgibbs/random.hpp"

namespace sgtest {

using splitgibbs::ImageField;
using splitgibbs::RandomStream;

inline ImageField random_field(std::size_t rows, std::size_t cols, RandomStream& rng,
                               double scale = 1.0) {
  ImageField f(rows, cols);
  for (double& v : f.values()) v = scale * rng.normal();
  return f;
}

inline ImageField uniform_field(std::size_t rows, std::size_t cols, RandomStream& rng, double lo,
                                double hi) {
  ImageField f(rows, cols);
  for (double& v : f.values()) v = lo + (hi - lo) * rng.uniform();
  return f;
}

/// Per-pixel sample mean and unbiased variance accumulated by brute force.
struct Moments {
  std::vector<double> sum, sum2;
  std::size_t n = 0;

  void add(const ImageField& x) {
    if (sum.empty()) sum.assign(x.size(), 0.0), sum2.assign(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum[i] += x[i];
      sum2[i] += x[i] * x[i];
    }
    ++n;
  }
  double mean(std::size_t i) const { return sum[i] / static_cast<double>(n); }
  double var(std::size_t i) const {
    const double m = mean(i);
    return (sum2[i] - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
  }
};

/// Worst z-score of the sample mean and sample variance against exact values,
/// assuming independent draws.
struct MomentCheck {
  double mean_z = 0.0;
  double var_z = 0.0;
};

inline MomentCheck compare_moments(const Moments& m, const splitgibbs::DenseVector& mean,
                                   const splitgibbs::DenseMatrix& cov) {
  MomentCheck out;
  const double n = static_cast<double>(m.n);
  for (std::size_t i = 0; i < m.sum.size(); ++i) {
    const double v = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    out.mean_z = std::max(out.mean_z, std::abs(m.mean(i) - mean(static_cast<Eigen::Index>(i))) /
                                          std::sqrt(v / n));
    // Var of the sample variance of a Gaussian: 2 v^2 / (n - 1).
    out.var_z = std::max(out.var_z, std::abs(m.var(i) - v) / (v * std::sqrt(2.0 / (n - 1.0))));
  }
  return out;
}

/// Dense periodic convolution matrix for a zero-shifted kernel: y = K x.
inline splitgibbs::DenseMatrix circulant_matrix(const ImageField& shifted_kernel) {
  const std::size_t R = shifted_kernel.rows(), C = shifted_kernel.cols(), N = R * C;
  splitgibbs::DenseMatrix m = splitgibbs::DenseMatrix::Zero(N, N);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t r2 = 0; r2 < R; ++r2)
        for (std::size_t c2 = 0; c2 < C; ++c2)
          m(r * C + c, r2 * C + c2) = shifted_kernel((r + R - r2) % R, (c + C - c2) % C);
  return m;
}

/// Forward differences with Neumann edges, horizontal block over vertical.
inline splitgibbs::DenseMatrix gradient_matrix(std::size_t R, std::size_t C) {
  const std::size_t N = R * C;
  splitgibbs::DenseMatrix m = splitgibbs::DenseMatrix::Zero(2 * N, N);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t i = r * C + c;
      if (c + 1 < C) m(i, i + 1) = 1.0, m(i, i) = -1.0;
      if (r + 1 < R) m(N + i, i + C) = 1.0, m(N + i, i) = -1.0;
    }
  return m;
}

/// Moment check for a correlated chain: the series is cut into `batches`
/// contiguous batches and standard errors come from the spread of the
/// per-batch estimates.
class BatchMoments {
 public:
  BatchMoments(splitgibbs::DenseVector mean, splitgibbs::DenseMatrix cov, std::size_t per_batch)
      : mean_(std::move(mean)), cov_(std::move(cov)), per_batch_(per_batch) {}

  void add(const ImageField& x) {
    if (cur_m_.empty()) cur_m_.assign(x.size(), 0.0), cur_v_.assign(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean_(static_cast<Eigen::Index>(i));
      cur_m_[i] += x[i];
      cur_v_[i] += d * d;
    }
    if (++filled_ == per_batch_) {
      for (double& v : cur_m_) v /= static_cast<double>(per_batch_);
      for (double& v : cur_v_) v /= static_cast<double>(per_batch_);
      batch_m_.push_back(cur_m_);
      batch_v_.push_back(cur_v_);
      std::fill(cur_m_.begin(), cur_m_.end(), 0.0);
      std::fill(cur_v_.begin(), cur_v_.end(), 0.0);
      filled_ = 0;
    }
  }

  /// Worst |estimate - exact| / standard error over pixels, for the mean
  /// and for the variance (taken about the exact mean).
  MomentCheck check() const {
    MomentCheck out;
    const double b = static_cast<double>(batch_m_.size());
    for (std::size_t i = 0; i < batch_m_.front().size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      out.mean_z = std::max(out.mean_z, z_score(batch_m_, i, mean_(ii), b));
      out.var_z = std::max(out.var_z, z_score(batch_v_, i, cov_(ii, ii), b));
    }
    return out;
  }

 private:
  static double z_score(const std::vector<std::vector<double>>& batches, std::size_t i,
                        double exact, double b) {
    double s = 0.0, s2 = 0.0;
    for (const auto& v : batches) s += v[i], s2 += v[i] * v[i];
    const double m = s / b;
    const double var = (s2 - b * m * m) / (b - 1.0);
    return std::abs(m - exact) / std::sqrt(var / b);
  }

  splitgibbs::DenseVector mean_;
  splitgibbs::DenseMatrix cov_;
  std::size_t per_batch_;
  std::size_t filled_ = 0;
  std::vector<double> cur_m_, cur_v_;
  std::vector<std::vector<double>> batch_m_, batch_v_;
};

/// Zero-shifted five-point Laplacian on the side x side torus.
inline ImageField shifted_laplacian(std::size_t side) {
  ImageField k(side, side);
  k(0, 0) = -4.0;
  k(0, 1) = k(0, side - 1) = k(1, 0) = k(side - 1, 0) = 1.0;
  return k;
}

/// Zero-shifted 3x3 box blur on the side x side torus.
inline ImageField shifted_box(std::size_t side) {
  ImageField k(side, side);
  const int n = static_cast<int>(side);
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) k((dr + n) % n, (dc + n) % n) = 1.0 / 9.0;
  return k;
}

// Projected gradient on the TV dual: u = x - theta D^T p, p minimizes
// 0.5 |x/theta - D^T p|^2 over pixel-wise unit balls.
inline ImageField tv_dual_oracle(const ImageField& x, double theta, int iters) {
  const std::size_t n = x.size();
  const splitgibbs::DenseMatrix d = gradient_matrix(x.rows(), x.cols());
  const splitgibbs::DenseVector xv = splitgibbs::to_vector(x) / theta;
  splitgibbs::DenseVector p = splitgibbs::DenseVector::Zero(static_cast<Eigen::Index>(2 * n));
  for (int it = 0; it < iters; ++it) {
    p += 0.125 * d * (xv - d.transpose() * p);
    for (std::size_t i = 0; i < n; ++i) {
      const auto h = static_cast<Eigen::Index>(i), v = static_cast<Eigen::Index>(n + i);
      const double norm = std::hypot(p(h), p(v));
      if (norm > 1.0) p(h) /= norm, p(v) /= norm;
    }
  }
  return splitgibbs::to_field(theta * (xv - d.transpose() * p), {x.rows(), x.cols()});
}

}  // namespace sgtest
