#include "splitgibbs/admm.hpp"

#include <algorithm>
#include <cmath>

#include "splitgibbs/errors.hpp"

namespace splitgibbs {

void AdmmConfig::validate() const {
  if (!(rho2 > 0.0)) throw ParameterError("AdmmConfig: rho^2 must be positive");
  if (max_iters == 0) throw ParameterError("AdmmConfig: max_iters must be >= 1");
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0))
    throw ParameterError("AdmmConfig: tolerances must be positive");
}

AdmmResult admm_solve(const XMinimizer& f_min, const ZProx& g_prox, const AdmmConfig& config,
                      const AdmmInit& init) {
  config.validate();
  if (!f_min || !g_prox) throw ConfigurationError("admm_solve: both steps are required");

  AdmmResult res;
  res.z = init.z;
  res.u = init.u.empty() ? ImageField::like(init.z) : init.u;
  require_same_shape(res.z, res.u, "admm_solve init");
  res.trace.reserve(std::min<std::size_t>(config.max_iters, 4096));

  for (std::size_t it = 0; it < config.max_iters; ++it) {
    res.x = f_min(res.z - res.u, config.rho2);
    const ImageField z_prev = res.z;
    res.z = g_prox(res.x + res.u, config.rho2);
    const ImageField gap = res.x - res.z;
    res.u += gap;

    const double nx = std::sqrt(squared_norm(res.x)), nz = std::sqrt(squared_norm(res.z));
    const double primal = std::sqrt(squared_norm(gap)) / std::max({nx, nz, 1.0});
    const double dual = std::sqrt(squared_norm(res.z - z_prev)) / std::max(nz, 1.0);
    res.trace.push_back({primal, dual});
    res.iterations = it + 1;
    if (primal <= config.tol_primal && dual <= config.tol_dual) {
      res.converged = true;
      break;
    }
  }
  return res;
}

AdmmResult admm_solve(const SplitModel& model, const AdmmConfig& config, const AdmmInit& init) {
  model.validate();
  ImageField x_warm = init.z;
  const XMinimizer f_min = [&](const ImageField& anchor, double rho2) {
    x_warm = conditional_mode(model.f, anchor, rho2, &x_warm);
    return x_warm;
  };
  const ZProx g_prox = [&](const ImageField& v, double rho2) {
    return conditional_mode(model.g, v, rho2);
  };
  return admm_solve(f_min, g_prox, config, init);
}

}  // namespace splitgibbs
