#include "splitgibbs/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "splitgibbs/kernels.hpp"

namespace splitgibbs {

namespace {

void require_shape(const ImageField& x, Shape expected, const char* where) {
  if (x.rows() != expected.rows || x.cols() != expected.cols)
    throw DimensionError(std::string(where) + ": expected " + std::to_string(expected.rows) +
                         "x" + std::to_string(expected.cols) + ", got " +
                         std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
}

}  // namespace

// ---------------------------------------------------------------- circulant

CirculantOperator::CirculantOperator(ImageField kernel)
    : shape_(shape_of(kernel)), kernel_(std::move(kernel)), fft_(shape_.rows, shape_.cols) {
  eigenvalues_ = fft_.forward(kernel_);
  gram_.resize(eigenvalues_.size());
  for (std::size_t i = 0; i < eigenvalues_.size(); ++i) gram_[i] = std::norm(eigenvalues_[i]);
}

CirculantOperator CirculantOperator::from_shifted_kernel(ImageField kernel) {
  return CirculantOperator(std::move(kernel));
}

CirculantOperator CirculantOperator::from_centered_kernel(const ImageField& kernel) {
  const std::size_t rows = kernel.rows(), cols = kernel.cols();
  ImageField shifted(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      shifted(r, c) = kernel((r + rows / 2) % rows, (c + cols / 2) % cols);
  return CirculantOperator(std::move(shifted));
}

CirculantOperator CirculantOperator::from_stencil(const ImageField& stencil, std::size_t rows,
                                                  std::size_t cols) {
  if (stencil.rows() % 2 == 0 || stencil.cols() % 2 == 0)
    throw DimensionError("from_stencil: stencil sides must be odd");
  if (stencil.rows() > rows || stencil.cols() > cols)
    throw DimensionError("from_stencil: stencil larger than lattice");
  ImageField shifted(rows, cols);
  const std::size_t cr = stencil.rows() / 2, cc = stencil.cols() / 2;
  for (std::size_t a = 0; a < stencil.rows(); ++a)
    for (std::size_t b = 0; b < stencil.cols(); ++b) {
      const std::size_t r = (a + rows - cr) % rows;
      const std::size_t c = (b + cols - cc) % cols;
      shifted(r, c) += stencil(a, b);
    }
  return CirculantOperator(std::move(shifted));
}

ImageField CirculantOperator::apply(const ImageField& x) const {
  require_shape(x, shape_, "CirculantOperator::apply");
  std::vector<cplx> spectrum = fft_.forward(x);
  kernels::table().cmul(eigenvalues_.data(), spectrum.data(), spectrum.data(), spectrum.size());
  return fft_.inverse_real(spectrum);
}

ImageField CirculantOperator::adjoint(const ImageField& y) const {
  require_shape(y, shape_, "CirculantOperator::adjoint");
  std::vector<cplx> spectrum = fft_.forward(y);
  kernels::table().cmul_conj(eigenvalues_.data(), spectrum.data(), spectrum.data(),
                             spectrum.size());
  return fft_.inverse_real(spectrum);
}

// --------------------------------------------------------------------- mask

MaskOperator::MaskOperator(Shape lattice, std::vector<std::size_t> kept_indices)
    : lattice_(lattice), kept_(std::move(kept_indices)), gram_(lattice.rows, lattice.cols) {
  if (kept_.empty()) throw DimensionError("MaskOperator: no kept pixels");
  for (std::size_t i = 0; i < kept_.size(); ++i) {
    if (kept_[i] >= lattice.size())
      throw DimensionError("MaskOperator: index " + std::to_string(kept_[i]) + " out of range");
    if (i > 0 && kept_[i] <= kept_[i - 1])
      throw DimensionError("MaskOperator: kept indices must be sorted and distinct");
    gram_[kept_[i]] = 1.0;
  }
}

ImageField MaskOperator::apply(const ImageField& x) const {
  require_shape(x, lattice_, "MaskOperator::apply");
  ImageField out(kept_.size(), 1);
  for (std::size_t i = 0; i < kept_.size(); ++i) out[i] = x[kept_[i]];
  return out;
}

ImageField MaskOperator::adjoint(const ImageField& y) const {
  require_shape(y, output_shape(), "MaskOperator::adjoint");
  ImageField out(lattice_.rows, lattice_.cols);
  for (std::size_t i = 0; i < kept_.size(); ++i) out[kept_[i]] = y[i];
  return out;
}

// ---------------------------------------------------------- diagonal / identity

ImageField DiagonalOperator::apply(const ImageField& x) const {
  require_shape(x, shape_of(weights_), "DiagonalOperator::apply");
  ImageField out(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= weights_[i];
  return out;
}

ImageField IdentityOperator::apply(const ImageField& x) const {
  require_shape(x, shape_, "IdentityOperator::apply");
  return x;
}

// ----------------------------------------------------------------- gradient

void gradient_into(const ImageField& x, GradientField& out) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (!out.horizontal.same_shape(x)) out.horizontal = ImageField::like(x);
  if (!out.vertical.same_shape(x)) out.vertical = ImageField::like(x);
  const auto& k = kernels::table();
  for (std::size_t r = 0; r < rows; ++r)
    k.forward_diff(x.data() + r * cols, out.horizontal.data() + r * cols, cols);
  for (std::size_t r = 0; r + 1 < rows; ++r)
    k.sub(x.data() + (r + 1) * cols, x.data() + r * cols, out.vertical.data() + r * cols, cols);
  std::fill_n(out.vertical.data() + (rows - 1) * cols, cols, 0.0);
}

GradientField gradient(const ImageField& x) {
  GradientField g;
  gradient_into(x, g);
  return g;
}

void divergence_into(const GradientField& p, ImageField& out) {
  require_same_shape(p.horizontal, p.vertical, "divergence");
  const std::size_t rows = p.horizontal.rows(), cols = p.horizontal.cols();
  if (!out.same_shape(p.horizontal)) out = ImageField::like(p.horizontal);
  const auto& k = kernels::table();
  for (std::size_t r = 0; r < rows; ++r)
    k.backward_diff(p.horizontal.data() + r * cols, out.data() + r * cols, cols);

  // Vertical part: p(r) - p(r-1), with p(-1) = 0 and p(rows-1) treated as 0.
  const double* pv = p.vertical.data();
  double* o = out.data();
  if (rows == 1) return;
  for (std::size_t c = 0; c < cols; ++c) o[c] += pv[c];
  for (std::size_t r = 1; r + 1 < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      o[r * cols + c] += pv[r * cols + c] - pv[(r - 1) * cols + c];
  for (std::size_t c = 0; c < cols; ++c) o[(rows - 1) * cols + c] -= pv[(rows - 2) * cols + c];
}

ImageField divergence(const GradientField& p) {
  ImageField out = ImageField::like(p.horizontal);
  divergence_into(p, out);
  return out;
}

GradientField GradientOperator::unstack(const ImageField& stacked) const {
  require_shape(stacked, output_shape(), "GradientOperator::unstack");
  const std::size_t half = lattice_.size();
  GradientField g{ImageField(lattice_.rows, lattice_.cols), ImageField(lattice_.rows, lattice_.cols)};
  std::copy_n(stacked.data(), half, g.horizontal.data());
  std::copy_n(stacked.data() + half, half, g.vertical.data());
  return g;
}

ImageField GradientOperator::stack(const GradientField& g) const {
  ImageField out(2 * lattice_.rows, lattice_.cols);
  std::copy_n(g.horizontal.data(), lattice_.size(), out.data());
  std::copy_n(g.vertical.data(), lattice_.size(), out.data() + lattice_.size());
  return out;
}

ImageField GradientOperator::apply(const ImageField& x) const {
  require_shape(x, lattice_, "GradientOperator::apply");
  return stack(gradient(x));
}

ImageField GradientOperator::adjoint(const ImageField& y) const {
  ImageField d = divergence(unstack(y));
  d *= -1.0;
  return d;
}

// ------------------------------------------------------------------ variant

ImageField apply(const LinearOperator& op, const ImageField& x) {
  return std::visit([&](const auto& o) { return o.apply(x); }, op);
}

ImageField adjoint_apply(const LinearOperator& op, const ImageField& y) {
  return std::visit([&](const auto& o) { return o.adjoint(y); }, op);
}

Shape input_shape(const LinearOperator& op) {
  return std::visit([](const auto& o) { return o.input_shape(); }, op);
}

Shape output_shape(const LinearOperator& op) {
  return std::visit([](const auto& o) { return o.output_shape(); }, op);
}

// ----------------------------------------------------------------- stencils

ImageField laplacian_stencil() {
  return ImageField(3, 3, std::vector<double>{0, 1, 0, 1, -4, 1, 0, 1, 0});
}

ImageField gaussian_stencil(std::size_t size, double width) {
  if (size % 2 == 0) throw DimensionError("gaussian_stencil: size must be odd");
  ImageField s(size, size);
  const double c = static_cast<double>(size / 2);
  double total = 0.0;
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t k = 0; k < size; ++k) {
      const double dr = static_cast<double>(r) - c, dc = static_cast<double>(k) - c;
      s(r, k) = std::exp(-(dr * dr + dc * dc) / (2.0 * width * width));
      total += s(r, k);
    }
  s *= 1.0 / total;
  return s;
}

}  // namespace splitgibbs
