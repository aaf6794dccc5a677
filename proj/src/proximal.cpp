#include "splitgibbs/proximal.hpp"

#include <cmath>
#include <string>

#include "splitgibbs/errors.hpp"
#include "splitgibbs/kernels.hpp"

namespace splitgibbs {

namespace {

constexpr double kChambolleTau = 0.125;

void ensure_dual(GradientField& p, const ImageField& x) {
  if (!p.horizontal.same_shape(x) || !p.vertical.same_shape(x)) {
    p.horizontal = ImageField::like(x);
    p.vertical = ImageField::like(x);
  }
}

}  // namespace

void ProxSpec::validate() const {
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw ParameterError("ProxSpec: weight must be finite and >= 0");
  if (!(step > 0.0) || !std::isfinite(step))
    throw ParameterError("ProxSpec: step must be finite and > 0");
}

void MyulaParams::validate() const {
  if (!(lambda > 0.0) || !(gamma > 0.0))
    throw ParameterError("MyulaParams: lambda and gamma must be positive");
  if (gamma > lambda)
    throw ParameterError("MyulaParams: gamma " + std::to_string(gamma) + " exceeds lambda " +
                         std::to_string(lambda));
  if (prox_iters == 0) throw ParameterError("MyulaParams: prox_iters must be >= 1");
}

double tv_value(const ImageField& x) {
  const GradientField g = gradient(x);
  return kernels::table().pair_norm_sum(g.horizontal.data(), g.vertical.data(), x.size());
}

double tv_prox_objective(const ImageField& u, const ImageField& x, double theta) {
  require_same_shape(u, x, "tv_prox_objective");
  const ImageField d = u - x;
  return 0.5 * squared_norm(d) + theta * tv_value(u);
}

ImageField tv_prox(const ImageField& x, const ProxSpec& spec, std::size_t iters,
                   ChambolleDual* warm, std::vector<double>* primal_trace) {
  spec.validate();
  if (iters == 0) throw ParameterError("tv_prox: iters must be >= 1");
  const double theta = spec.theta();
  if (theta == 0.0) return x;

  ChambolleDual local;
  GradientField& p = warm ? warm->p : local.p;
  ensure_dual(p, x);

  const auto& k = kernels::table();
  const std::size_t n = x.size();
  const double inv_theta = 1.0 / theta;
  ImageField div = ImageField::like(x);
  ImageField w = ImageField::like(x);
  GradientField g{ImageField::like(x), ImageField::like(x)};
  ImageField u = ImageField::like(x);

  auto primal_from_dual = [&] {
    divergence_into(p, div);
    k.axpby(1.0, x.data(), -theta, div.data(), u.data(), n);
  };

  if (primal_trace) primal_trace->clear();
  for (std::size_t it = 0; it < iters; ++it) {
    divergence_into(p, div);
    k.axpby(1.0, div.data(), -inv_theta, x.data(), w.data(), n);
    gradient_into(w, g);
    k.chambolle(p.horizontal.data(), p.vertical.data(), g.horizontal.data(), g.vertical.data(),
                kChambolleTau, n);
    if (primal_trace) {
      primal_from_dual();
      primal_trace->push_back(tv_prox_objective(u, x, theta));
    }
  }
  primal_from_dual();
  return u;
}

ImageField group_shrink(const ImageField& stacked, double threshold) {
  if (stacked.rows() % 2 != 0) throw DimensionError("group_shrink: expected a stacked gradient");
  if (!(threshold >= 0.0)) throw ParameterError("group_shrink: threshold must be >= 0");
  const std::size_t half = stacked.size() / 2;
  ImageField out = stacked;
  for (std::size_t i = 0; i < half; ++i) {
    const double h = stacked[i], v = stacked[half + i];
    const double norm = std::sqrt(h * h + v * v);
    const double scale = norm > threshold ? 1.0 - threshold / norm : 0.0;
    out[i] = scale * h;
    out[half + i] = scale * v;
  }
  return out;
}

ImageField myula_step_with_noise(const ImageField& z, const GradientCallback& grad_smooth,
                                 const ProxCallback& prox, const MyulaParams& params,
                                 const ImageField& noise) {
  params.validate();
  require_same_shape(z, noise, "myula_step");
  if (!prox) throw ConfigurationError("myula_step: a prox callback is required");
  const ImageField p = prox(z, params.lambda);
  require_same_shape(z, p, "myula_step prox");
  ImageField grad = grad_smooth ? grad_smooth(z) : ImageField::like(z);
  require_same_shape(z, grad, "myula_step gradient");

  const double ratio = params.gamma / params.lambda;
  ImageField out = ImageField::like(z);
  kernels::table().langevin(1.0 - ratio, z.data(), ratio, p.data(), params.gamma, grad.data(),
                            std::sqrt(2.0 * params.gamma), noise.data(), out.data(), z.size());
  return out;
}

ImageField myula_step(const ImageField& z, const GradientCallback& grad_smooth,
                      const ProxCallback& prox, const MyulaParams& params, RandomStream& rng) {
  ImageField noise = ImageField::like(z);
  rng.fill_normal(noise.values());
  return myula_step_with_noise(z, grad_smooth, prox, params, noise);
}

}  // namespace splitgibbs
