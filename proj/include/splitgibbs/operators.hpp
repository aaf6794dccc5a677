#pragma once

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "splitgibbs/fourier.hpp"
#include "splitgibbs/image_field.hpp"

namespace splitgibbs {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const noexcept { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline Shape shape_of(const ImageField& x) { return {x.rows(), x.cols()}; }

/// Periodic convolution on a rows x cols lattice, diagonal in the Fourier
/// basis. The kernel is kept zero-shifted (its centre at index (0, 0)), so a
/// symmetric stencil gives a self-adjoint operator with real eigenvalues.
class CirculantOperator {
 public:
  /// Kernel already zero-shifted: entry (0,0) multiplies the pixel itself.
  static CirculantOperator from_shifted_kernel(ImageField kernel);
  /// Full-lattice kernel centred at (rows/2, cols/2).
  static CirculantOperator from_centered_kernel(const ImageField& kernel);
  /// Small odd-sized stencil (centre at its middle) embedded into the lattice.
  static CirculantOperator from_stencil(const ImageField& stencil, std::size_t rows,
                                        std::size_t cols);

  Shape input_shape() const noexcept { return shape_; }
  Shape output_shape() const noexcept { return shape_; }
  const ImageField& kernel() const noexcept { return kernel_; }
  const std::vector<cplx>& eigenvalues() const noexcept { return eigenvalues_; }
  /// |eigenvalue|^2, the spectrum of K^T K.
  const std::vector<double>& gram_spectrum() const noexcept { return gram_; }
  const FourierTransform& fourier() const noexcept { return fft_; }

  ImageField apply(const ImageField& x) const;
  ImageField adjoint(const ImageField& y) const;

 private:
  explicit CirculantOperator(ImageField kernel);

  Shape shape_;
  ImageField kernel_;
  FourierTransform fft_;
  std::vector<cplx> eigenvalues_;
  std::vector<double> gram_;
};

/// Keeps a subset of pixels: R^N -> R^M, output stored as an M x 1 field.
class MaskOperator {
 public:
  MaskOperator(Shape lattice, std::vector<std::size_t> kept_indices);

  Shape input_shape() const noexcept { return lattice_; }
  Shape output_shape() const noexcept { return {kept_.size(), 1}; }
  const std::vector<std::size_t>& kept_indices() const noexcept { return kept_; }
  /// Diagonal of H^T H (1 on kept pixels, 0 elsewhere) on the input lattice.
  const ImageField& gram_diagonal() const noexcept { return gram_; }

  ImageField apply(const ImageField& x) const;
  ImageField adjoint(const ImageField& y) const;

 private:
  Shape lattice_;
  std::vector<std::size_t> kept_;
  ImageField gram_;
};

/// Pixel-wise scaling.
class DiagonalOperator {
 public:
  explicit DiagonalOperator(ImageField weights) : weights_(std::move(weights)) {}
  Shape input_shape() const noexcept { return shape_of(weights_); }
  Shape output_shape() const noexcept { return shape_of(weights_); }
  const ImageField& weights() const noexcept { return weights_; }
  ImageField apply(const ImageField& x) const;
  ImageField adjoint(const ImageField& y) const { return apply(y); }

 private:
  ImageField weights_;
};

class IdentityOperator {
 public:
  explicit IdentityOperator(Shape shape) : shape_(shape) {}
  Shape input_shape() const noexcept { return shape_; }
  Shape output_shape() const noexcept { return shape_; }
  ImageField apply(const ImageField& x) const;
  ImageField adjoint(const ImageField& y) const { return apply(y); }

 private:
  Shape shape_;
};

struct GradientField {
  ImageField horizontal;  // x(r, c+1) - x(r, c)
  ImageField vertical;    // x(r+1, c) - x(r, c)
};

/// Forward differences with replicate (Neumann) boundary: the last column of
/// the horizontal part and the last row of the vertical part are zero.
GradientField gradient(const ImageField& x);
/// Discrete divergence, the negative adjoint of gradient().
ImageField divergence(const GradientField& p);
/// divergence() without allocating: out must have the lattice shape.
void divergence_into(const GradientField& p, ImageField& out);
void gradient_into(const ImageField& x, GradientField& out);

enum class Boundary { Neumann };

/// Gradient as a linear map R^N -> R^{2N}; the output stacks the horizontal
/// part on top of the vertical part in a (2*rows) x cols field.
class GradientOperator {
 public:
  explicit GradientOperator(Shape lattice, Boundary boundary = Boundary::Neumann)
      : lattice_(lattice), boundary_(boundary) {}
  Shape input_shape() const noexcept { return lattice_; }
  Shape output_shape() const noexcept { return {2 * lattice_.rows, lattice_.cols}; }
  Boundary boundary() const noexcept { return boundary_; }
  ImageField apply(const ImageField& x) const;
  ImageField adjoint(const ImageField& y) const;

  GradientField unstack(const ImageField& stacked) const;
  ImageField stack(const GradientField& g) const;

 private:
  Shape lattice_;
  Boundary boundary_;
};

using LinearOperator =
    std::variant<IdentityOperator, CirculantOperator, MaskOperator, DiagonalOperator, GradientOperator>;

ImageField apply(const LinearOperator& op, const ImageField& x);
ImageField adjoint_apply(const LinearOperator& op, const ImageField& y);
Shape input_shape(const LinearOperator& op);
Shape output_shape(const LinearOperator& op);

/// 3x3 five-point Laplacian [0 1 0; 1 -4 1; 0 1 0].
ImageField laplacian_stencil();
/// size x size Gaussian blur with standard deviation `width` pixels, sum 1.
ImageField gaussian_stencil(std::size_t size, double width);

}  // namespace splitgibbs
