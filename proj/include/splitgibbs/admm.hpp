#pragma once

// Scaled ADMM with penalty rho^-2: the optimization counterpart of the SPA
// sweep, where each conditional draw is replaced by the conditional mode.

#include <cstddef>
#include <functional>
#include <vector>

#include "splitgibbs/image_field.hpp"
#include "splitgibbs/samplers.hpp"

namespace splitgibbs {

struct AdmmConfig {
  double rho2 = 1.0;
  std::size_t max_iters = 1000;
  double tol_primal = 1e-6;  // |x - z| / max(|x|, |z|, 1)
  double tol_dual = 1e-6;    // |z_t - z_{t-1}| / max(|z_t|, 1)

  void validate() const;
};

struct AdmmResiduals {
  double primal;
  double dual;
};

struct AdmmResult {
  ImageField x;
  ImageField z;
  ImageField u;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<AdmmResiduals> trace;
};

/// argmin_x f(x) + |x - anchor|^2 / (2 rho2).
using XMinimizer = std::function<ImageField(const ImageField& anchor, double rho2)>;
/// argmin_z g(z) + |z - v|^2 / (2 rho2).
using ZProx = std::function<ImageField(const ImageField& v, double rho2)>;

struct AdmmInit {
  ImageField z;
  ImageField u;  // empty means zero
};

AdmmResult admm_solve(const XMinimizer& f_min, const ZProx& g_prox, const AdmmConfig& config,
                      const AdmmInit& init);

/// ADMM on a split model, each step taken as the mode of the matching
/// SPA conditional (same potentials, same rho2).
AdmmResult admm_solve(const SplitModel& model, const AdmmConfig& config, const AdmmInit& init);

}  // namespace splitgibbs
