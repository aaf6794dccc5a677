#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "splitgibbs/image_field.hpp"

namespace splitgibbs {

using cplx = std::complex<double>;

/// 2-D discrete Fourier transform on a fixed rows x cols lattice (FFTW
/// backend). Forward is unnormalized, inverse carries the 1/N factor, so
/// inverse(forward(x)) == x. Instances are cheap to copy and safe to use
/// from several threads at once.
class FourierTransform {
 public:
  FourierTransform(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }

  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  void inverse(std::span<const cplx> in, std::span<cplx> out) const;

  std::vector<cplx> forward(const ImageField& x) const;
  /// Inverse transform keeping the real part. If max_imag is non-null it
  /// receives the largest discarded imaginary magnitude.
  ImageField inverse_real(std::span<const cplx> spectrum, double* max_imag = nullptr) const;

  struct Plans;  // FFTW plan pair, shared per lattice size

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace splitgibbs
