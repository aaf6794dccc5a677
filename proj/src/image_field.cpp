#include "splitgibbs/image_field.hpp"

#include <algorithm>
#include <cmath>

#include "splitgibbs/kernels.hpp"

namespace splitgibbs {

bool ImageField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const ImageField& a, const ImageField& b, const char* where) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(where) + ": shape " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
}

ImageField& ImageField::operator+=(const ImageField& other) {
  require_same_shape(*this, other, "ImageField::operator+=");
  kernels::axpby(1.0, values_, 1.0, other.values_, values_);
  return *this;
}

ImageField& ImageField::operator-=(const ImageField& other) {
  require_same_shape(*this, other, "ImageField::operator-=");
  kernels::axpby(1.0, values_, -1.0, other.values_, values_);
  return *this;
}

ImageField& ImageField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ImageField operator+(ImageField a, const ImageField& b) { return a += b; }
ImageField operator-(ImageField a, const ImageField& b) { return a -= b; }
ImageField operator*(double s, ImageField a) { return a *= s; }

double dot(const ImageField& a, const ImageField& b) {
  require_same_shape(a, b, "dot");
  return kernels::dot(a.values(), b.values());
}

double squared_norm(const ImageField& a) { return kernels::dot(a.values(), a.values()); }

double sum(const ImageField& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  return total;
}

double mean(const ImageField& a) { return sum(a) / static_cast<double>(a.size()); }

double max_abs_diff(const ImageField& a, const ImageField& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace splitgibbs
