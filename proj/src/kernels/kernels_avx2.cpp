// AVX2 kernels. Compiled with -mavx2 only (no -mfma) and called only after a
// runtime CPU check. Operation order mirrors kernels_scalar.cpp exactly.

#include <immintrin.h>

#include <cmath>

#include "splitgibbs/kernels.hpp"

namespace splitgibbs::kernels::avx2 {

namespace {

inline double hsum_lanes(__m256d acc) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                    _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double total = hsum_lanes(acc);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

void langevin(double cz, const double* z, double cp, const double* p, double step,
              const double* grad, double scale, const double* noise, double* out, std::size_t n) {
  const __m256d vcz = _mm256_set1_pd(cz), vcp = _mm256_set1_pd(cp);
  const __m256d vstep = _mm256_set1_pd(step), vscale = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_add_pd(_mm256_mul_pd(vcz, _mm256_loadu_pd(z + i)),
                              _mm256_mul_pd(vcp, _mm256_loadu_pd(p + i)));
    r = _mm256_sub_pd(r, _mm256_mul_pd(vstep, _mm256_loadu_pd(grad + i)));
    r = _mm256_add_pd(r, _mm256_mul_pd(vscale, _mm256_loadu_pd(noise + i)));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] = ((cz * z[i] + cp * p[i]) - step * grad[i]) + scale * noise[i];
}

void diag_gaussian(const double* b, const double* d, double r, const double* anchor,
                   const double* noise, double* out, std::size_t n) {
  const __m256d vr = _mm256_set1_pd(r);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prec = _mm256_add_pd(_mm256_loadu_pd(d + i), vr);
    const __m256d num = _mm256_add_pd(_mm256_loadu_pd(b + i), _mm256_mul_pd(vr, _mm256_loadu_pd(anchor + i)));
    const __m256d res = _mm256_add_pd(_mm256_div_pd(num, prec),
                                      _mm256_div_pd(_mm256_loadu_pd(noise + i), _mm256_sqrt_pd(prec)));
    _mm256_storeu_pd(out + i, res);
  }
  for (; i < n; ++i) {
    const double prec = d[i] + r;
    out[i] = (b[i] + r * anchor[i]) / prec + noise[i] / std::sqrt(prec);
  }
}

// Two complex values per register: [re0, im0, re1, im1].
void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* po = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    const __m256d re = _mm256_movedup_pd(va);
    const __m256d im = _mm256_permute_pd(va, 0xF);
    const __m256d t1 = _mm256_mul_pd(re, vb);
    const __m256d t2 = _mm256_mul_pd(im, _mm256_permute_pd(vb, 0x5));
    _mm256_storeu_pd(po + 2 * i, _mm256_addsub_pd(t1, t2));
  }
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

void cmul_conj(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* po = reinterpret_cast<double*>(out);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    const __m256d re = _mm256_movedup_pd(va);
    const __m256d im = _mm256_permute_pd(va, 0xF);
    const __m256d t1 = _mm256_mul_pd(re, vb);
    const __m256d t2 = _mm256_xor_pd(_mm256_mul_pd(im, _mm256_permute_pd(vb, 0x5)), sign);
    // even lanes: t1 - (-t2) = t1 + t2; odd lanes: t1 + (-t2)
    _mm256_storeu_pd(po + 2 * i, _mm256_addsub_pd(t1, t2));
  }
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(ar * br + ai * bi, ar * bi - ai * br);
  }
}

void spectral_draw(const cplx* rhs, const cplx* noise, const double* lambda, cplx* out,
                   std::size_t n) {
  const double* pr = reinterpret_cast<const double*>(rhs);
  const double* pn = reinterpret_cast<const double*>(noise);
  double* po = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d lam = _mm256_setr_pd(lambda[i], lambda[i], lambda[i + 1], lambda[i + 1]);
    const __m256d r = _mm256_add_pd(_mm256_div_pd(_mm256_loadu_pd(pr + 2 * i), lam),
                                    _mm256_div_pd(_mm256_loadu_pd(pn + 2 * i), _mm256_sqrt_pd(lam)));
    _mm256_storeu_pd(po + 2 * i, r);
  }
  for (; i < n; ++i) {
    const double s = std::sqrt(lambda[i]);
    out[i] = cplx(rhs[i].real() / lambda[i] + noise[i].real() / s,
                  rhs[i].imag() / lambda[i] + noise[i].imag() / s);
  }
}

void chambolle(double* ph, double* pv, const double* gh, const double* gv, double tau,
               std::size_t n) {
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d h = _mm256_loadu_pd(gh + i);
    const __m256d v = _mm256_loadu_pd(gv + i);
    const __m256d mag = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(h, h), _mm256_mul_pd(v, v)));
    const __m256d denom = _mm256_add_pd(one, _mm256_mul_pd(vtau, mag));
    _mm256_storeu_pd(ph + i, _mm256_div_pd(_mm256_add_pd(_mm256_loadu_pd(ph + i), _mm256_mul_pd(vtau, h)), denom));
    _mm256_storeu_pd(pv + i, _mm256_div_pd(_mm256_add_pd(_mm256_loadu_pd(pv + i), _mm256_mul_pd(vtau, v)), denom));
  }
  for (; i < n; ++i) {
    const double denom = 1.0 + tau * std::sqrt(gh[i] * gh[i] + gv[i] * gv[i]);
    ph[i] = (ph[i] + tau * gh[i]) / denom;
    pv[i] = (pv[i] + tau * gv[i]) / denom;
  }
}

double pair_norm_sum(const double* h, const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(h + i);
    const __m256d b = _mm256_loadu_pd(v + i);
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b))));
  }
  double total = hsum_lanes(acc);
  for (; i < n; ++i) total += std::sqrt(h[i] * h[i] + v[i] * v[i]);
  return total;
}

void forward_diff(const double* x, double* out, std::size_t n) {
  if (n == 0) return;
  std::size_t i = 0;
  for (; i + 5 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i + 1), _mm256_loadu_pd(x + i)));
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
  for (; i + 4 < n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), _mm256_loadu_pd(p + i - 1)));
  for (; i + 1 < n; ++i) out[i] = p[i] - p[i - 1];
  out[n - 1] = -p[n - 2];
}

void sub(const double* x1, const double* x0, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x1 + i), _mm256_loadu_pd(x0 + i)));
  for (; i < n; ++i) out[i] = x1[i] - x0[i];
}

}  // namespace

const KernelTable kTable = {axpby,         dot,       langevin,      diag_gaussian,
                            cmul,          cmul_conj, spectral_draw, chambolle,
                            pair_norm_sum, forward_diff, backward_diff, sub};

}  // namespace splitgibbs::kernels::avx2
