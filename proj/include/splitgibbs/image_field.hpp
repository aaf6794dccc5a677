#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace splitgibbs {

/// Raised when two lattices that must agree do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Real pixel lattice, row-major. 1-D signals are stored as rows x 1.
class ImageField {
 public:
  ImageField() = default;
  ImageField(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw DimensionError("ImageField: empty lattice");
  }
  ImageField(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows == 0 || cols == 0) throw DimensionError("ImageField: empty lattice");
    if (values_.size() != rows * cols)
      throw DimensionError("ImageField: value count " + std::to_string(values_.size()) +
                           " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }

  static ImageField like(const ImageField& other, double fill = 0.0) {
    return ImageField(other.rows_, other.cols_, fill);
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  bool same_shape(const ImageField& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const noexcept;

  ImageField& operator+=(const ImageField& other);
  ImageField& operator-=(const ImageField& other);
  ImageField& operator*=(double s);

  friend bool operator==(const ImageField&, const ImageField&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

ImageField operator+(ImageField a, const ImageField& b);
ImageField operator-(ImageField a, const ImageField& b);
ImageField operator*(double s, ImageField a);

void require_same_shape(const ImageField& a, const ImageField& b, const char* where);

double dot(const ImageField& a, const ImageField& b);
double squared_norm(const ImageField& a);
double sum(const ImageField& a);
double mean(const ImageField& a);
double max_abs_diff(const ImageField& a, const ImageField& b);

}  // namespace splitgibbs
