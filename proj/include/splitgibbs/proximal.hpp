#pragma once

// Total-variation prox (Chambolle's dual projection) and the P-MYULA
// Langevin kernel used for non-smooth conditionals.

#include <cstddef>
#include <functional>
#include <vector>

#include "splitgibbs/image_field.hpp"
#include "splitgibbs/operators.hpp"
#include "splitgibbs/random.hpp"

namespace splitgibbs {

/// weight * TV, prox taken with step lambda.
struct ProxSpec {
  double weight = 0.0;
  double step = 1.0;

  void validate() const;
  double theta() const noexcept { return step * weight; }
};

struct MyulaParams {
  double lambda = 1.0;
  double gamma = 0.25;
  std::size_t prox_iters = 25;

  void validate() const;
};

/// Isotropic TV: sum over pixels of the Euclidean norm of the forward-difference gradient.
double tv_value(const ImageField& x);

/// 0.5 |u - x|^2 + theta TV(u).
double tv_prox_objective(const ImageField& u, const ImageField& x, double theta);

/// Chambolle iterate state; keep one alive to warm-start repeated proxes of
/// nearby inputs.
struct ChambolleDual {
  GradientField p;
};

/// argmin_u 0.5 |u - x|^2 + step*weight*TV(u) by `iters` Chambolle dual
/// steps with tau = 1/8. When `primal_trace` is given it receives the
/// objective after every iteration.
ImageField tv_prox(const ImageField& x, const ProxSpec& spec, std::size_t iters,
                   ChambolleDual* warm = nullptr, std::vector<double>* primal_trace = nullptr);

/// Prox of threshold * sum_i |(h_i, v_i)|_2 on a stacked gradient field
/// (2*rows x cols, horizontal block on top).
ImageField group_shrink(const ImageField& stacked, double threshold);

using GradientCallback = std::function<ImageField(const ImageField&)>;
using ProxCallback = std::function<ImageField(const ImageField& v, double lambda)>;

/// z' = (1 - g/l) z + (g/l) prox_l(z) - g grad(z) + sqrt(2g) xi.
/// An empty gradient callback means the smooth part is zero.
ImageField myula_step(const ImageField& z, const GradientCallback& grad_smooth,
                      const ProxCallback& prox, const MyulaParams& params, RandomStream& rng);

/// Same move with the standard normal field supplied by the caller.
ImageField myula_step_with_noise(const ImageField& z, const GradientCallback& grad_smooth,
                                 const ProxCallback& prox, const MyulaParams& params,
                                 const ImageField& noise);

}  // namespace splitgibbs
