#include "splitgibbs/cg.hpp"

#include <cmath>

#include "splitgibbs/errors.hpp"
#include "splitgibbs/kernels.hpp"

namespace splitgibbs {

CgResult cg_solve(const SpdOperator& apply_a, const ImageField& b, const CgConfig& config,
                  const ImageField* initial) {
  if (!(config.tol > 0.0)) throw ParameterError("cg_solve: tolerance must be positive");
  const auto& k = kernels::table();
  const std::size_t n = b.size();

  CgResult result;
  result.x = initial ? *initial : ImageField::like(b);
  if (initial) require_same_shape(*initial, b, "cg_solve");

  const double b_norm = std::sqrt(squared_norm(b));
  if (b_norm == 0.0) {
    result.x = ImageField::like(b);
    result.converged = true;
    return result;
  }

  ImageField r = b;
  if (initial) r -= apply_a(result.x);
  ImageField p = r;
  double rr = squared_norm(r);
  result.relative_residual = std::sqrt(rr) / b_norm;
  if (result.relative_residual <= config.tol) {
    result.converged = true;
    return result;
  }

  for (std::size_t it = 0; it < config.max_iters; ++it) {
    const ImageField ap = apply_a(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;  // operator not SPD along p
    const double step = rr / pap;
    k.axpby(1.0, result.x.data(), step, p.data(), result.x.data(), n);
    k.axpby(1.0, r.data(), -step, ap.data(), r.data(), n);
    const double rr_next = squared_norm(r);
    result.iterations = it + 1;
    result.relative_residual = std::sqrt(rr_next) / b_norm;
    if (result.relative_residual <= config.tol) {
      result.converged = true;
      break;
    }
    k.axpby(1.0, r.data(), rr_next / rr, p.data(), p.data(), n);
    rr = rr_next;
  }
  return result;
}

}  // namespace splitgibbs
