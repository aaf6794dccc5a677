#include "splitgibbs/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace splitgibbs {

struct FourierTransform::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ~Plans() {
    // fftw_destroy_plan is not thread-safe either.
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
};

namespace {

std::shared_ptr<const FourierTransform::Plans> cached_plans(std::size_t rows, std::size_t cols);

}  // namespace

FourierTransform::FourierTransform(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), plans_(cached_plans(rows, cols)) {}

namespace {

std::shared_ptr<const FourierTransform::Plans> cached_plans(std::size_t rows, std::size_t cols) {
  // Mutex first so it outlives the cache during static destruction.
  std::mutex& planner = FourierTransform::Plans::planner_mutex();
  static std::map<std::pair<std::size_t, std::size_t>,
                  std::shared_ptr<const FourierTransform::Plans>>
      cache;
  std::lock_guard lock(planner);
  auto it = cache.find({rows, cols});
  if (it != cache.end()) return it->second;

  const std::size_t n = rows * cols;
  fftw_complex* a = fftw_alloc_complex(n);
  fftw_complex* b = fftw_alloc_complex(n);
  auto plans = std::make_shared<FourierTransform::Plans>();
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans->forward = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), a, b,
                                    FFTW_FORWARD, flags);
  plans->inverse = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), a, b,
                                    FFTW_BACKWARD, flags);
  fftw_free(a);
  fftw_free(b);
  cache.emplace(std::make_pair(rows, cols), plans);
  return plans;
}

}  // namespace

void FourierTransform::forward(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != size() || out.size() != size())
    throw DimensionError("FourierTransform::forward: length mismatch");
  std::vector<cplx> buffer(in.begin(), in.end());
  fftw_execute_dft(plans_->forward, reinterpret_cast<fftw_complex*>(buffer.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

void FourierTransform::inverse(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != size() || out.size() != size())
    throw DimensionError("FourierTransform::inverse: length mismatch");
  std::vector<cplx> buffer(in.begin(), in.end());
  fftw_execute_dft(plans_->inverse, reinterpret_cast<fftw_complex*>(buffer.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(size());
  for (cplx& v : out) v *= scale;
}

std::vector<cplx> FourierTransform::forward(const ImageField& x) const {
  if (x.rows() != rows_ || x.cols() != cols_)
    throw DimensionError("FourierTransform::forward: lattice mismatch");
  std::vector<cplx> in(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) in[i] = cplx(x[i], 0.0);
  std::vector<cplx> out(x.size());
  fftw_execute_dft(plans_->forward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

ImageField FourierTransform::inverse_real(std::span<const cplx> spectrum, double* max_imag) const {
  std::vector<cplx> out(size());
  inverse(spectrum, out);
  ImageField x(rows_, cols_);
  double worst = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    x[i] = out[i].real();
    worst = std::max(worst, std::abs(out[i].imag()));
  }
  if (max_imag) *max_imag = worst;
  return x;
}

}  // namespace splitgibbs
