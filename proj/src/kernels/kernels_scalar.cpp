// Scalar reference kernels. The SIMD variants must reproduce these results
// bit for bit; keep the operation order in sync when editing.

#include <cmath>

#include "splitgibbs/kernels.hpp"

namespace splitgibbs::kernels::scalar {

namespace {

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lane[0] += x[i] * y[i];
    lane[1] += x[i + 1] * y[i + 1];
    lane[2] += x[i + 2] * y[i + 2];
    lane[3] += x[i + 3] * y[i + 3];
  }
  double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

void langevin(double cz, const double* z, double cp, const double* p, double step,
              const double* grad, double scale, const double* noise, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = ((cz * z[i] + cp * p[i]) - step * grad[i]) + scale * noise[i];
}

void diag_gaussian(const double* b, const double* d, double r, const double* anchor,
                   const double* noise, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double prec = d[i] + r;
    out[i] = (b[i] + r * anchor[i]) / prec + noise[i] / std::sqrt(prec);
  }
}

// Complex products are spelled out so that the SIMD variants can match the
// exact rounding sequence (std::complex operator* may take other paths).
void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

void cmul_conj(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(ar * br + ai * bi, ar * bi - ai * br);
  }
}

void spectral_draw(const cplx* rhs, const cplx* noise, const double* lambda, cplx* out,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sqrt(lambda[i]);
    out[i] = cplx(rhs[i].real() / lambda[i] + noise[i].real() / s,
                  rhs[i].imag() / lambda[i] + noise[i].imag() / s);
  }
}

void chambolle(double* ph, double* pv, const double* gh, const double* gv, double tau,
               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = 1.0 + tau * std::sqrt(gh[i] * gh[i] + gv[i] * gv[i]);
    ph[i] = (ph[i] + tau * gh[i]) / denom;
    pv[i] = (pv[i] + tau * gv[i]) / denom;
  }
}

double pair_norm_sum(const double* h, const double* v, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k)
      lane[k] += std::sqrt(h[i + k] * h[i + k] + v[i + k] * v[i + k]);
  double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) total += std::sqrt(h[i] * h[i] + v[i] * v[i]);
  return total;
}

void forward_diff(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i + 1 < n; ++i) out[i] = x[i + 1] - x[i];
  if (n > 0) out[n - 1] = 0.0;
}

void backward_diff(const double* p, double* out, std::size_t n) {
  if (n == 0) return;
  if (n == 1) {
    out[0] = 0.0;
    return;
  }
  out[0] = p[0];
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = p[i] - p[i - 1];
  out[n - 1] = -p[n - 2];
}

void sub(const double* x1, const double* x0, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x1[i] - x0[i];
}

}  // namespace

const KernelTable kTable = {axpby,         dot,       langevin,      diag_gaussian,
                            cmul,          cmul_conj, spectral_draw, chambolle,
                            pair_norm_sum, forward_diff, backward_diff, sub};

}  // namespace splitgibbs::kernels::scalar
