// NEON kernels for aarch64 (Advanced SIMD is baseline there, no runtime
// check needed). Two doubles per register; the four reduction lanes of the
// scalar reference are carried in two registers.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

#include "splitgibbs/kernels.hpp"

namespace splitgibbs::kernels::neon {

namespace {

inline double combine(float64x2_t lo, float64x2_t hi) {
  return (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
         (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
}

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a), vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vaddq_f64(vmulq_f64(va, vld1q_f64(x + i)), vmulq_f64(vb, vld1q_f64(y + i))));
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double total = combine(lo, hi);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

void langevin(double cz, const double* z, double cp, const double* p, double step,
              const double* grad, double scale, const double* noise, double* out, std::size_t n) {
  const float64x2_t vcz = vdupq_n_f64(cz), vcp = vdupq_n_f64(cp);
  const float64x2_t vstep = vdupq_n_f64(step), vscale = vdupq_n_f64(scale);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t r = vaddq_f64(vmulq_f64(vcz, vld1q_f64(z + i)), vmulq_f64(vcp, vld1q_f64(p + i)));
    r = vsubq_f64(r, vmulq_f64(vstep, vld1q_f64(grad + i)));
    r = vaddq_f64(r, vmulq_f64(vscale, vld1q_f64(noise + i)));
    vst1q_f64(out + i, r);
  }
  for (; i < n; ++i) out[i] = ((cz * z[i] + cp * p[i]) - step * grad[i]) + scale * noise[i];
}

void diag_gaussian(const double* b, const double* d, double r, const double* anchor,
                   const double* noise, double* out, std::size_t n) {
  const float64x2_t vr = vdupq_n_f64(r);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t prec = vaddq_f64(vld1q_f64(d + i), vr);
    const float64x2_t num = vaddq_f64(vld1q_f64(b + i), vmulq_f64(vr, vld1q_f64(anchor + i)));
    vst1q_f64(out + i, vaddq_f64(vdivq_f64(num, prec), vdivq_f64(vld1q_f64(noise + i), vsqrtq_f64(prec))));
  }
  for (; i < n; ++i) {
    const double prec = d[i] + r;
    out[i] = (b[i] + r * anchor[i]) / prec + noise[i] / std::sqrt(prec);
  }
}

void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    const float64x2_t t1 = vmulq_f64(vdupq_n_f64(ar), float64x2_t{br, bi});
    const float64x2_t t2 = vmulq_f64(vdupq_n_f64(ai), float64x2_t{bi, br});
    out[i] = cplx(vgetq_lane_f64(t1, 0) - vgetq_lane_f64(t2, 0),
                  vgetq_lane_f64(t1, 1) + vgetq_lane_f64(t2, 1));
  }
}

void cmul_conj(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    const float64x2_t t1 = vmulq_f64(vdupq_n_f64(ar), float64x2_t{br, bi});
    const float64x2_t t2 = vmulq_f64(vdupq_n_f64(ai), float64x2_t{bi, br});
    out[i] = cplx(vgetq_lane_f64(t1, 0) + vgetq_lane_f64(t2, 0),
                  vgetq_lane_f64(t1, 1) - vgetq_lane_f64(t2, 1));
  }
}

void spectral_draw(const cplx* rhs, const cplx* noise, const double* lambda, cplx* out,
                   std::size_t n) {
  const double* pr = reinterpret_cast<const double*>(rhs);
  const double* pn = reinterpret_cast<const double*>(noise);
  double* po = reinterpret_cast<double*>(out);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t lam = vdupq_n_f64(lambda[i]);
    vst1q_f64(po + 2 * i, vaddq_f64(vdivq_f64(vld1q_f64(pr + 2 * i), lam),
                                    vdivq_f64(vld1q_f64(pn + 2 * i), vsqrtq_f64(lam))));
  }
}

void chambolle(double* ph, double* pv, const double* gh, const double* gv, double tau,
               std::size_t n) {
  const float64x2_t vtau = vdupq_n_f64(tau), one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t h = vld1q_f64(gh + i), v = vld1q_f64(gv + i);
    const float64x2_t mag = vsqrtq_f64(vaddq_f64(vmulq_f64(h, h), vmulq_f64(v, v)));
    const float64x2_t denom = vaddq_f64(one, vmulq_f64(vtau, mag));
    vst1q_f64(ph + i, vdivq_f64(vaddq_f64(vld1q_f64(ph + i), vmulq_f64(vtau, h)), denom));
    vst1q_f64(pv + i, vdivq_f64(vaddq_f64(vld1q_f64(pv + i), vmulq_f64(vtau, v)), denom));
  }
  for (; i < n; ++i) {
    const double denom = 1.0 + tau * std::sqrt(gh[i] * gh[i] + gv[i] * gv[i]);
    ph[i] = (ph[i] + tau * gh[i]) / denom;
    pv[i] = (pv[i] + tau * gv[i]) / denom;
  }
}

double pair_norm_sum(const double* h, const double* v, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t a0 = vld1q_f64(h + i), b0 = vld1q_f64(v + i);
    const float64x2_t a1 = vld1q_f64(h + i + 2), b1 = vld1q_f64(v + i + 2);
    lo = vaddq_f64(lo, vsqrtq_f64(vaddq_f64(vmulq_f64(a0, a0), vmulq_f64(b0, b0))));
    hi = vaddq_f64(hi, vsqrtq_f64(vaddq_f64(vmulq_f64(a1, a1), vmulq_f64(b1, b1))));
  }
  double total = combine(lo, hi);
  for (; i < n; ++i) total += std::sqrt(h[i] * h[i] + v[i] * v[i]);
  return total;
}

void forward_diff(const double* x, double* out, std::size_t n) {
  if (n == 0) return;
  std::size_t i = 0;
  for (; i + 3 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(x + i + 1), vld1q_f64(x + i)));
  for (; i + 1 < n; ++i) out[i] = x[i + 1] - x[i];
  out[n - 1] = 0.0;
}

void backward_diff(const double* p, double* out, std::size_t n) {
  if (n == 0) return;
  if (n == 1) {
    out[0] = 0.0;
    return;
  }
  out[0] = p[0];
  std::size_t i = 1;
  for (; i + 2 < n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(p + i), vld1q_f64(p + i - 1)));
  for (; i + 1 < n; ++i) out[i] = p[i] - p[i - 1];
  out[n - 1] = -p[n - 2];
}

void sub(const double* x1, const double* x0, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(x1 + i), vld1q_f64(x0 + i)));
  for (; i < n; ++i) out[i] = x1[i] - x0[i];
}

}  // namespace

const KernelTable kTable = {axpby,         dot,       langevin,      diag_gaussian,
                            cmul,          cmul_conj, spectral_draw, chambolle,
                            pair_norm_sum, forward_diff, backward_diff, sub};

}  // namespace splitgibbs::kernels::neon

#endif  // __aarch64__
