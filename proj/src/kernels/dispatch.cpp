#include <atomic>
#include <stdexcept>
#include <string>

#include "splitgibbs/kernels.hpp"

namespace splitgibbs::kernels {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() noexcept {
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

const KernelTable& table_for(Isa isa) {
  if (!isa_available(isa))
    throw std::invalid_argument("kernel variant '" + std::string(isa_name(isa)) +
                                "' is not supported on this CPU");
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return avx2::kTable;
#endif
#if defined(__aarch64__)
    case Isa::Neon: return neon::kTable;
#endif
    default: return scalar::kTable;
  }
}

namespace {

struct ActiveTable {
  std::atomic<const KernelTable*> table;
  std::atomic<Isa> isa;
  ActiveTable() {
    const Isa best = detect_isa();
    table.store(&table_for(best));
    isa.store(best);
  }
};

ActiveTable& active() {
  static ActiveTable instance;
  return instance;
}

}  // namespace

Isa active_isa() noexcept { return active().isa.load(std::memory_order_relaxed); }

void select_isa(Isa isa) {
  const KernelTable& t = table_for(isa);
  active().table.store(&t);
  active().isa.store(isa);
}

const KernelTable& table() noexcept { return *active().table.load(std::memory_order_relaxed); }

void axpby(double a, std::span<const double> x, double b, std::span<const double> y,
           std::span<double> out) {
  table().axpby(a, x.data(), b, y.data(), out.data(), out.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
  return table().dot(x.data(), y.data(), x.size());
}

}  // namespace splitgibbs::kernels
