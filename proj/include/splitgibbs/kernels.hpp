#pragma once

// Pixel-wise inner loops shared by the samplers, the TV prox and the
// spectral solvers. Each kernel has a scalar reference implementation and
// SIMD variants; the active table is chosen once from the host CPU and can be
// overridden (tests compare variants against the reference).
//
// Every variant performs the same IEEE operations in the same order: no
// fused multiply-add, and reductions accumulate in four interleaved lanes
// combined as (l0 + l1) + (l2 + l3) followed by the tail. Results are
// therefore bit-identical across variants.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace splitgibbs::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;
bool isa_available(Isa isa) noexcept;
/// Best variant the host supports.
Isa detect_isa() noexcept;
Isa active_isa() noexcept;
/// Switch the process-wide table; throws std::invalid_argument if unsupported.
void select_isa(Isa isa);

using cplx = std::complex<double>;

struct KernelTable {
  // out = a*x + b*y
  void (*axpby)(double a, const double* x, double b, const double* y, double* out, std::size_t n);
  // sum_i x_i y_i
  double (*dot)(const double* x, const double* y, std::size_t n);
  // out = cz*z + cp*p - step*grad + scale*noise   (one Langevin move)
  void (*langevin)(double cz, const double* z, double cp, const double* p, double step,
                   const double* grad, double scale, const double* noise, double* out,
                   std::size_t n);
  // out = (b + r*anchor)/(d + r) + noise/sqrt(d + r)   (diagonal-precision draw)
  void (*diag_gaussian)(const double* b, const double* d, double r, const double* anchor,
                        const double* noise, double* out, std::size_t n);
  // out = a * b  (complex, elementwise)
  void (*cmul)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
  // out = conj(a) * b
  void (*cmul_conj)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
  // out = rhs / lambda + noise / sqrt(lambda), lambda real and positive
  void (*spectral_draw)(const cplx* rhs, const cplx* noise, const double* lambda, cplx* out,
                        std::size_t n);
  // Chambolle dual update: p <- (p + tau*g) / (1 + tau*|g|), g = (gh, gv)
  void (*chambolle)(double* ph, double* pv, const double* gh, const double* gv, double tau,
                    std::size_t n);
  // sum_i sqrt(h_i^2 + v_i^2)
  double (*pair_norm_sum)(const double* h, const double* v, std::size_t n);
  // out_i = x_{i+1} - x_i for i < n-1, out_{n-1} = 0
  void (*forward_diff)(const double* x, double* out, std::size_t n);
  // out_i = p_i - p_{i-1} with p_{-1} = 0 and p_{n-1} treated as 0
  void (*backward_diff)(const double* p, double* out, std::size_t n);
  // out = x1 - x0 (vertical difference between two rows)
  void (*sub)(const double* x1, const double* x0, double* out, std::size_t n);
};

const KernelTable& table() noexcept;
const KernelTable& table_for(Isa isa);

// Convenience wrappers over the active table.
void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
           std::span<double> out);
double dot(std::span<const double> x, std::span<const double> y);

namespace scalar {
extern const KernelTable kTable;
}
#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
extern const KernelTable kTable;
}
#endif
#if defined(__aarch64__)
namespace neon {
extern const KernelTable kTable;
}
#endif

}  // namespace splitgibbs::kernels
