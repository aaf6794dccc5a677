#include "splitgibbs/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "splitgibbs/errors.hpp"
#include "splitgibbs/kernels.hpp"

namespace splitgibbs {

namespace {

constexpr std::size_t kDenseCheckLimit = 4096;

void require_lattice(const ImageField& x, Shape shape, const std::string& where) {
  if (x.rows() != shape.rows || x.cols() != shape.cols)
    throw DimensionError(where + ": expected " + std::to_string(shape.rows) + "x" +
                         std::to_string(shape.cols) + ", got " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()));
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ParameterError(std::string(what) + " must be finite and positive");
}

ImageField standard_normal_like(const ImageField& like, RandomStream& rng) {
  ImageField noise = ImageField::like(like);
  rng.fill_normal(noise.values());
  return noise;
}

// u | x, z ~ N(alpha2 (z - x) / (alpha2 + rho2), alpha2 rho2 / (alpha2 + rho2) I).
ImageField draw_u(const ImageField& x_side, const ImageField& z, double rho2, double alpha2,
                  RandomStream& rng) {
  const double total = alpha2 + rho2;
  const double c = alpha2 / total;
  const double s = std::sqrt(alpha2 * rho2 / total);
  const ImageField diff = z - x_side;
  const ImageField noise = standard_normal_like(diff, rng);
  ImageField u = ImageField::like(diff);
  kernels::table().axpby(c, diff.data(), s, noise.data(), u.data(), u.size());
  return u;
}

}  // namespace

// --------------------------------------------------------------- QuadraticTerm

QuadraticTerm::QuadraticTerm(PrecisionStructure precision_in, ImageField linear_in,
                             double constant_in)
    : precision(std::move(precision_in)), linear(std::move(linear_in)), constant(constant_in) {
  require_lattice(linear, precision.shape, "QuadraticTerm");
  if (precision.fourier_diagonal()) spectrum_ = precision.fourier_spectrum();
}

double QuadraticTerm::value(const ImageField& x) const {
  return 0.5 * dot(x, precision.apply(x)) - dot(linear, x) + constant;
}

ImageField QuadraticTerm::gradient(const ImageField& x) const {
  return precision.apply(x) - linear;
}

bool QuadraticTerm::single_weighted() const noexcept {
  return precision.weighted.size() == 1 && precision.circulant.empty() && !precision.diagonal &&
         precision.identity == 0.0;
}

// -------------------------------------------------------------- PotentialModel

double PotentialModel::value(const ImageField& x) const {
  if (value_fn) return value_fn(x);
  if (quadratic) return quadratic->value(x);
  if (diagonal) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      total += 0.5 * diagonal->precision_diag[i] * x[i] * x[i] - diagonal->linear[i] * x[i];
    return total;
  }
  if (mask) {
    const ImageField r = mask->mask.apply(x) - mask->y;
    return squared_norm(r) / (2.0 * mask->sigma2);
  }
  return 0.0;
}

void PotentialModel::validate() const {
  const std::string label = name.empty() ? std::string("potential") : name;
  switch (strategy) {
    case Strategy::ExactGaussian:
      if (!quadratic)
        throw ConfigurationError(label + ": exact-Gaussian strategy without a quadratic term");
      if (!(quadratic->precision.shape == shape))
        throw DimensionError(label + ": quadratic term lattice mismatch");
      break;
    case Strategy::DiagonalGaussian:
      if (diagonal.has_value() == mask.has_value())
        throw ConfigurationError(label + ": diagonal strategy needs exactly one of diagonal/mask");
      if (diagonal) {
        require_lattice(diagonal->precision_diag, shape, label);
        require_lattice(diagonal->linear, shape, label);
      } else {
        if (!(mask->mask.input_shape() == shape)) throw DimensionError(label + ": mask lattice");
        require_positive(mask->sigma2, "mask likelihood sigma^2");
      }
      break;
    case Strategy::Myula:
      if (!prox) throw ConfigurationError(label + ": MYULA strategy requested without a prox");
      if (!(myula.lambda_scale > 0.0) || !(myula.gamma_scale > 0.0) ||
          myula.gamma_scale > myula.lambda_scale || myula.substeps == 0)
        throw ConfigurationError(label + ": invalid MYULA schedule");
      break;
  }
}

PotentialModel make_zero_potential(Shape shape) {
  return make_diagonal_potential("zero", ImageField(shape.rows, shape.cols),
                                 ImageField(shape.rows, shape.cols));
}

PotentialModel make_quadratic_potential(std::string name, PrecisionStructure precision,
                                        ImageField linear, double constant) {
  PotentialModel m;
  m.name = std::move(name);
  m.strategy = Strategy::ExactGaussian;
  m.shape = precision.shape;
  m.quadratic.emplace(std::move(precision), std::move(linear), constant);
  return m;
}

PotentialModel make_weighted_likelihood(const CirculantOperator& h, const NoisePrecision& omega,
                                        const ImageField& y) {
  const Shape shape = h.input_shape();
  require_lattice(y, shape, "make_weighted_likelihood");
  require_lattice(omega.diag(), shape, "make_weighted_likelihood");
  ImageField wy = y;
  double constant = 0.0;
  for (std::size_t i = 0; i < wy.size(); ++i) {
    wy[i] *= omega.diag()[i];
    constant += 0.5 * wy[i] * y[i];
  }
  PrecisionStructure q{shape, {}, {WeightedCirculantQuadratic{h, omega}}, std::nullopt, 0.0};
  return make_quadratic_potential("likelihood", std::move(q), h.adjoint(wy), constant);
}

PotentialModel make_smooth_prior(const CirculantOperator& l, double gamma) {
  require_positive(gamma, "smooth prior weight");
  const Shape shape = l.input_shape();
  PrecisionStructure q{shape, {CirculantQuadratic{gamma, l}}, {}, std::nullopt, 0.0};
  return make_quadratic_potential("smooth-prior", std::move(q), ImageField(shape.rows, shape.cols));
}

PotentialModel make_mask_likelihood(const MaskOperator& mask, double sigma2, ImageField y) {
  require_positive(sigma2, "mask likelihood sigma^2");
  require_lattice(y, mask.output_shape(), "make_mask_likelihood");
  PotentialModel m;
  m.name = "mask-likelihood";
  m.strategy = Strategy::DiagonalGaussian;
  m.shape = mask.input_shape();
  m.mask = MaskLikelihood{mask, sigma2, std::move(y)};
  return m;
}

PotentialModel make_diagonal_potential(std::string name, ImageField precision_diag,
                                       ImageField linear) {
  require_same_shape(precision_diag, linear, "make_diagonal_potential");
  for (double d : precision_diag.values())
    if (!(d >= 0.0)) throw ParameterError("make_diagonal_potential: negative precision");
  PotentialModel m;
  m.name = std::move(name);
  m.strategy = Strategy::DiagonalGaussian;
  m.shape = shape_of(precision_diag);
  m.diagonal = DiagonalTerm{std::move(precision_diag), std::move(linear)};
  return m;
}

PotentialModel make_tv_potential(Shape shape, double beta, std::size_t prox_iters) {
  if (!(beta >= 0.0)) throw ParameterError("TV weight must be >= 0");
  if (prox_iters == 0) throw ParameterError("TV prox needs at least one iteration");
  PotentialModel m;
  m.name = "tv";
  m.strategy = Strategy::Myula;
  m.shape = shape;
  m.value_fn = [beta](const ImageField& x) { return beta * tv_value(x); };
  m.prox = [beta, prox_iters](const ImageField& v, double lambda) {
    return tv_prox(v, ProxSpec{beta, lambda}, prox_iters);
  };
  return m;
}

PotentialModel make_group_l21_potential(Shape lattice, double beta) {
  if (!(beta >= 0.0)) throw ParameterError("group weight must be >= 0");
  PotentialModel m;
  m.name = "gradient-l21";
  m.strategy = Strategy::Myula;
  m.shape = {2 * lattice.rows, lattice.cols};
  m.value_fn = [beta](const ImageField& s) {
    const std::size_t half = s.size() / 2;
    return beta * kernels::table().pair_norm_sum(s.data(), s.data() + half, half);
  };
  m.prox = [beta](const ImageField& v, double lambda) { return group_shrink(v, beta * lambda); };
  return m;
}

GradientCallback smooth_gradient_of(const PotentialModel& model) {
  if (model.quadratic) {
    const QuadraticTerm* q = &*model.quadratic;
    return [q](const ImageField& x) { return q->gradient(x); };
  }
  if (model.diagonal) {
    const DiagonalTerm* d = &*model.diagonal;
    return [d](const ImageField& x) {
      ImageField g = ImageField::like(x);
      for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = d->precision_diag[i] * x[i] - d->linear[i];
      return g;
    };
  }
  if (model.mask) {
    const MaskLikelihood* m = &*model.mask;
    return [m](const ImageField& x) {
      ImageField g = m->mask.adjoint(m->mask.apply(x) - m->y);
      g *= 1.0 / m->sigma2;
      return g;
    };
  }
  return model.smooth_gradient;
}

// ---------------------------------------------------------------- conditionals

ImageField sample_conditional(const PotentialModel& model, const ImageField& anchor, double rho2,
                              const ImageField& current, RandomStream& rng,
                              std::optional<ImageField>* aux) {
  require_positive(rho2, "rho^2");
  require_lattice(anchor, model.shape, model.name + " anchor");
  const double r = 1.0 / rho2;
  const auto& k = kernels::table();

  switch (model.strategy) {
    case Strategy::ExactGaussian: {
      const QuadraticTerm& q = *model.quadratic;
      if (!q.spectrum().empty()) {
        ImageField rhs = ImageField::like(anchor);
        k.axpby(1.0, q.linear.data(), r, anchor.data(), rhs.data(), rhs.size());
        std::vector<double> spectrum(q.spectrum());
        for (double& s : spectrum) s += r;
        const FourierTransform fft(model.shape.rows, model.shape.cols);
        return sample_with_spectrum(fft, spectrum, rhs, rng);
      }
      if (q.single_weighted()) {
        const auto& term = q.precision.weighted.front();
        const double mu1 = q.mu1 > 0.0 ? q.mu1 : default_mu1(term.weights);
        AuxDissociatedDraw draw =
            sample_aux_dissociated(term.op, term.weights, rho2, q.linear, anchor, current, mu1, rng);
        if (aux) *aux = std::move(draw.v);
        return std::move(draw.x);
      }
      ImageField rhs = ImageField::like(anchor);
      k.axpby(1.0, q.linear.data(), r, anchor.data(), rhs.data(), rhs.size());
      const GaussianSpec spec(std::move(rhs), q.precision.plus_identity(r));
      return sample_perturbation_optimization(spec, rng, q.cg);
    }
    case Strategy::DiagonalGaussian:
      if (model.mask)
        return sample_sherman_morrison(model.mask->mask, model.mask->sigma2, rho2, model.mask->y,
                                       anchor, rng);
      return sample_diagonal(model.diagonal->precision_diag, model.diagonal->linear, r, anchor, rng);
    case Strategy::Myula: {
      require_lattice(current, model.shape, model.name + " current");
      const MyulaParams params{model.myula.lambda_scale * rho2, model.myula.gamma_scale * rho2, 1};
      const GradientCallback& smooth = model.smooth_gradient;
      GradientCallback grad = [&](const ImageField& v) {
        ImageField g = smooth ? smooth(v) : ImageField::like(v);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += r * (v[i] - anchor[i]);
        return g;
      };
      ImageField v = current;
      for (std::size_t s = 0; s < model.myula.substeps; ++s)
        v = myula_step(v, grad, model.prox, params, rng);
      return v;
    }
  }
  throw ConfigurationError("unknown sampling strategy");
}

ImageField conditional_mode(const PotentialModel& model, const ImageField& anchor, double rho2,
                            const ImageField* warm) {
  require_positive(rho2, "rho^2");
  require_lattice(anchor, model.shape, model.name + " anchor");
  const double r = 1.0 / rho2;
  const auto& k = kernels::table();

  switch (model.strategy) {
    case Strategy::ExactGaussian: {
      const QuadraticTerm& q = *model.quadratic;
      ImageField rhs = ImageField::like(anchor);
      k.axpby(1.0, q.linear.data(), r, anchor.data(), rhs.data(), rhs.size());
      if (!q.spectrum().empty()) {
        std::vector<double> spectrum(q.spectrum());
        for (double& s : spectrum) s += r;
        return solve_with_spectrum(FourierTransform(model.shape.rows, model.shape.cols), spectrum,
                                   rhs);
      }
      const PrecisionStructure shifted = q.precision.plus_identity(r);
      CgResult solved =
          cg_solve([&](const ImageField& x) { return shifted.apply(x); }, rhs, q.cg, warm);
      return std::move(solved.x);
    }
    case Strategy::DiagonalGaussian: {
      ImageField out = ImageField::like(anchor);
      if (model.mask) {
        const ImageField cov =
            sherman_morrison_covariance(model.mask->mask, model.mask->sigma2, rho2);
        const ImageField hty = model.mask->mask.adjoint(model.mask->y);
        for (std::size_t i = 0; i < out.size(); ++i)
          out[i] = cov[i] * (hty[i] / model.mask->sigma2 + r * anchor[i]);
        return out;
      }
      const DiagonalTerm& d = *model.diagonal;
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (d.linear[i] + r * anchor[i]) / (d.precision_diag[i] + r);
      return out;
    }
    case Strategy::Myula:
      if (model.smooth_gradient)
        throw ConfigurationError(model.name + ": mode needs a potential given by its prox alone");
      return model.prox(anchor, rho2);
  }
  throw ConfigurationError("unknown sampling strategy");
}

// ------------------------------------------------------------------ SP / SPA

void SplitModel::validate() const {
  require_positive(rho2, "rho^2");
  if (!(alpha2 >= 0.0) || !std::isfinite(alpha2)) throw ParameterError("alpha^2 must be >= 0");
  f.validate();
  g.validate();
  if (!(f.shape == g.shape)) throw DimensionError("f and g live on different lattices");
}

ChainState ChainState::from_z(ImageField z0) {
  ChainState s;
  s.x = z0;
  s.u = ImageField::like(z0);
  s.z = std::move(z0);
  return s;
}

namespace {

void check_state(const SplitModel& model, const ChainState& state) {
  require_lattice(state.x, model.f.shape, "chain x");
  require_lattice(state.z, model.f.shape, "chain z");
  require_lattice(state.u, model.f.shape, "chain u");
}

}  // namespace

ChainState sp_sweep(const SplitModel& model, ChainState state, RandomStream& rng) {
  if (model.augmented()) throw ConfigurationError("sp_sweep requires alpha^2 = 0");
  model.validate();
  check_state(model, state);
  state.x = sample_conditional(model.f, state.z, model.rho2, state.x, rng, &state.aux_x);
  state.z = sample_conditional(model.g, state.x, model.rho2, state.z, rng, &state.aux_z);
  ++state.sweep_index;
  return state;
}

ChainState spa_sweep(const SplitModel& model, ChainState state, RandomStream& rng) {
  if (!model.augmented()) throw ConfigurationError("spa_sweep requires alpha^2 > 0");
  model.validate();
  check_state(model, state);
  state.x = sample_conditional(model.f, state.z - state.u, model.rho2, state.x, rng, &state.aux_x);
  state.z = sample_conditional(model.g, state.x + state.u, model.rho2, state.z, rng, &state.aux_z);
  state.u = draw_u(state.x, state.z, model.rho2, model.alpha2, rng);
  ++state.sweep_index;
  return state;
}

ChainState sweep(const SplitModel& model, ChainState state, RandomStream& rng) {
  return model.augmented() ? spa_sweep(model, std::move(state), rng)
                           : sp_sweep(model, std::move(state), rng);
}

// ------------------------------------------------------------------ recording

void RunningMoments::add(const ImageField& x) {
  if (count_ == 0) {
    mean_ = ImageField::like(x);
    m2_ = ImageField::like(x);
  }
  require_same_shape(mean_, x, "RunningMoments");
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double delta = x[i] - mean_[i];
    mean_[i] += delta * inv;
    m2_[i] += delta * (x[i] - mean_[i]);
  }
}

const ImageField& RunningMoments::mean() const {
  if (count_ == 0) throw std::logic_error("RunningMoments: no samples");
  return mean_;
}

ImageField RunningMoments::variance() const {
  if (count_ == 0) throw std::logic_error("RunningMoments: no samples");
  ImageField v = m2_;
  if (count_ < 2) return ImageField::like(v);
  v *= 1.0 / static_cast<double>(count_ - 1);
  return v;
}

void validate_schedule(std::size_t t_mc, std::size_t t_bi) {
  if (t_mc == 0) throw ParameterError("t_mc must be >= 1");
  if (t_bi >= t_mc)
    throw ParameterError("burn-in (" + std::to_string(t_bi) + ") must be smaller than t_mc (" +
                         std::to_string(t_mc) + ")");
}

namespace {

void check_options(const RunOptions& options) {
  if (options.thinning == 0) throw ParameterError("thinning must be >= 1");
}

bool keep_this(const RunOptions& options, std::size_t t, std::size_t t_bi) {
  return options.keep_samples && (t - t_bi - 1) % options.thinning == 0;
}

}  // namespace

ChainRecord run_chain(const SplitModel& model, std::size_t t_mc, std::size_t t_bi, ChainState init,
                      RandomStream& rng, const RunOptions& options) {
  validate_schedule(t_mc, t_bi);
  check_options(options);
  model.validate();
  if (!model.augmented()) init.u = ImageField::like(init.z);

  ChainRecord rec;
  rec.scalar_trace.reserve(t_mc);
  ChainState state = std::move(init);
  for (std::size_t t = 1; t <= t_mc; ++t) {
    state = sweep(model, std::move(state), rng);
    rec.scalar_trace.push_back(model.target_value(state.x));
    if (t <= t_bi) continue;
    rec.x.add(state.x);
    rec.z.add(state.z);
    rec.u.add(state.u);
    if (keep_this(options, t, t_bi)) rec.kept_samples.push_back(state.x);
  }
  rec.final_state = std::move(state);
  return rec;
}

ChainRecord run_myula_chain(const std::function<double(const ImageField&)>& value,
                            const GradientCallback& grad_smooth, const ProxCallback& prox,
                            const MyulaParams& params, std::size_t t_mc, std::size_t t_bi,
                            ImageField init, RandomStream& rng, const RunOptions& options) {
  validate_schedule(t_mc, t_bi);
  check_options(options);
  params.validate();

  ChainRecord rec;
  rec.scalar_trace.reserve(t_mc);
  ImageField x = std::move(init);
  for (std::size_t t = 1; t <= t_mc; ++t) {
    x = myula_step(x, grad_smooth, prox, params, rng);
    if (value) rec.scalar_trace.push_back(value(x));
    if (t <= t_bi) continue;
    rec.x.add(x);
    if (keep_this(options, t, t_bi)) rec.kept_samples.push_back(x);
  }
  rec.final_state.z = x;
  rec.final_state.u = ImageField::like(x);
  rec.final_state.x = std::move(x);
  rec.final_state.sweep_index = t_mc;
  return rec;
}

// ---------------------------------------------------------------- multi-block

namespace {

enum class XStep { Diagonal, Fourier, General };

XStep classify(const MultiBlockModel& model) {
  bool diagonal = true, fourier = true;
  for (const auto& b : model.blocks) {
    const bool id = std::holds_alternative<IdentityOperator>(b.op);
    diagonal = diagonal && (id || std::holds_alternative<MaskOperator>(b.op) ||
                            std::holds_alternative<DiagonalOperator>(b.op));
    fourier = fourier && (id || std::holds_alternative<CirculantOperator>(b.op));
  }
  if (diagonal) return XStep::Diagonal;
  if (fourier) return XStep::Fourier;
  return XStep::General;
}

// Diagonal of K^T K for the pixel-wise operators.
ImageField gram_diagonal(const LinearOperator& op, Shape lattice) {
  if (const auto* m = std::get_if<MaskOperator>(&op)) return m->gram_diagonal();
  if (const auto* d = std::get_if<DiagonalOperator>(&op)) {
    ImageField g = d->weights();
    for (double& w : g.values()) w *= w;
    return g;
  }
  return ImageField(lattice.rows, lattice.cols, 1.0);
}

bool injective(const LinearOperator& op) {
  if (std::holds_alternative<IdentityOperator>(op)) return true;
  if (const auto* c = std::get_if<CirculantOperator>(&op)) {
    const auto& g = c->gram_spectrum();
    return *std::min_element(g.begin(), g.end()) > 0.0;
  }
  if (const auto* d = std::get_if<DiagonalOperator>(&op))
    return std::all_of(d->weights().values().begin(), d->weights().values().end(),
                       [](double w) { return w != 0.0; });
  if (const auto* m = std::get_if<MaskOperator>(&op))
    return m->kept_indices().size() == m->input_shape().size();
  return false;
}

bool certify_spd(const MultiBlockModel& model) {
  const Shape lattice = shape_of(model.x);
  const XStep kind = classify(model);
  if (kind == XStep::Diagonal) {
    ImageField total(lattice.rows, lattice.cols);
    for (const auto& b : model.blocks) total += gram_diagonal(b.op, lattice);
    return std::all_of(total.values().begin(), total.values().end(),
                       [](double v) { return v > 0.0; });
  }
  if (kind == XStep::Fourier) {
    std::vector<double> spectrum(lattice.size(), 0.0);
    for (const auto& b : model.blocks) {
      if (const auto* c = std::get_if<CirculantOperator>(&b.op)) {
        for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] += c->gram_spectrum()[i];
      } else {
        for (double& s : spectrum) s += 1.0;
      }
    }
    return *std::min_element(spectrum.begin(), spectrum.end()) > 0.0;
  }
  for (const auto& b : model.blocks)
    if (injective(b.op)) return true;
  // The Neumann gradient only annihilates constants on a connected lattice,
  // so any other block that sees constants closes the gap.
  const bool has_gradient = std::any_of(model.blocks.begin(), model.blocks.end(), [](const auto& b) {
    return std::holds_alternative<GradientOperator>(b.op);
  });
  if (has_gradient) {
    const ImageField ones(lattice.rows, lattice.cols, 1.0);
    for (const auto& b : model.blocks)
      if (!std::holds_alternative<GradientOperator>(b.op) && squared_norm(splitgibbs::apply(b.op, ones)) > 0.0)
        return true;
  }
  if (lattice.size() > kDenseCheckLimit)
    throw ConfigurationError("multi-block x precision cannot be certified on this lattice");
  DenseMatrix q = DenseMatrix::Zero(lattice.size(), lattice.size());
  for (const auto& b : model.blocks) {
    const DenseMatrix k = densify(b.op);
    q += k.transpose() * k;
  }
  // LLT happily factors a singular PSD matrix through rounding noise.
  const DenseVector eig = Eigen::SelfAdjointEigenSolver<DenseMatrix>(q, Eigen::EigenvaluesOnly).eigenvalues();
  return eig.minCoeff() > 1e-10 * eig.maxCoeff();
}

}  // namespace

void MultiBlockModel::validate() const {
  require_positive(rho2, "rho^2");
  if (!(alpha2 >= 0.0)) throw ParameterError("alpha^2 must be >= 0");
  if (blocks.empty()) throw ConfigurationError("multi-block model without blocks");
  const Shape lattice = shape_of(x);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const std::string label = "block " + std::to_string(i);
    if (!(input_shape(b.op) == lattice)) throw DimensionError(label + ": operator input lattice");
    const Shape out = output_shape(b.op);
    require_lattice(b.z, out, label + " z");
    require_lattice(b.u, out, label + " u");
    if (!(b.potential.shape == out)) throw DimensionError(label + ": potential lattice");
    b.potential.validate();
  }
  if (!certify_spd(*this))
    throw ConfigurationError("x-conditional precision sum_i K_i^T K_i is singular");
}

double MultiBlockModel::target_value(const ImageField& at) const {
  double total = 0.0;
  for (const auto& b : blocks) total += b.potential.value(splitgibbs::apply(b.op, at));
  return total;
}

ImageField multiblock_x_precision_apply(const MultiBlockModel& model, const ImageField& x) {
  const double r = 1.0 / model.rho2;
  ImageField out = ImageField::like(x);
  for (const auto& b : model.blocks) {
    const ImageField kk = splitgibbs::adjoint_apply(b.op, splitgibbs::apply(b.op, x));
    kernels::table().axpby(1.0, out.data(), r, kk.data(), out.data(), out.size());
  }
  return out;
}

ImageField multiblock_x_rhs(const MultiBlockModel& model) {
  const double r = 1.0 / model.rho2;
  ImageField rhs = ImageField::like(model.x);
  for (const auto& b : model.blocks) {
    const ImageField back = splitgibbs::adjoint_apply(b.op, b.z - b.u);
    kernels::table().axpby(1.0, rhs.data(), r, back.data(), rhs.data(), rhs.size());
  }
  return rhs;
}

void multiblock_sweep(MultiBlockModel& model, RandomStream& rng) {
  model.validate();
  const Shape lattice = shape_of(model.x);
  const double r = 1.0 / model.rho2;
  const auto& k = kernels::table();
  const ImageField rhs = multiblock_x_rhs(model);

  switch (classify(model)) {
    case XStep::Diagonal: {
      ImageField d(lattice.rows, lattice.cols);
      for (const auto& b : model.blocks) {
        const ImageField g = gram_diagonal(b.op, lattice);
        k.axpby(1.0, d.data(), r, g.data(), d.data(), d.size());
      }
      const ImageField zero = ImageField::like(d);
      const ImageField noise = standard_normal_like(d, rng);
      k.diag_gaussian(rhs.data(), d.data(), 0.0, zero.data(), noise.data(), model.x.data(),
                      model.x.size());
      break;
    }
    case XStep::Fourier: {
      std::vector<double> spectrum(lattice.size(), 0.0);
      for (const auto& b : model.blocks) {
        if (const auto* c = std::get_if<CirculantOperator>(&b.op)) {
          for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] += r * c->gram_spectrum()[i];
        } else {
          for (double& s : spectrum) s += r;
        }
      }
      model.x = sample_with_spectrum(FourierTransform(lattice.rows, lattice.cols), spectrum, rhs, rng);
      break;
    }
    case XStep::General: {
      // Perturbation-optimization: eta = rhs + sum_i sqrt(r) K_i^T xi_i has
      // covariance equal to the precision, so Q^{-1} eta is an exact draw.
      ImageField eta = rhs;
      const double sr = std::sqrt(r);
      for (const auto& b : model.blocks) {
        const ImageField xi = standard_normal_like(b.z, rng);
        const ImageField back = splitgibbs::adjoint_apply(b.op, xi);
        k.axpby(1.0, eta.data(), sr, back.data(), eta.data(), eta.size());
      }
      CgResult solved = cg_solve(
          [&](const ImageField& v) { return multiblock_x_precision_apply(model, v); }, eta, model.cg,
          &model.x);
      model.x = std::move(solved.x);
      break;
    }
  }

  for (auto& b : model.blocks) {
    const ImageField kx = splitgibbs::apply(b.op, model.x);
    b.z = sample_conditional(b.potential, kx + b.u, model.rho2, b.z, rng, &b.aux);
  }
  if (model.alpha2 > 0.0)
    for (auto& b : model.blocks) b.u = draw_u(splitgibbs::apply(b.op, model.x), b.z, model.rho2, model.alpha2, rng);
  ++model.sweep_index;
}

}  // namespace splitgibbs
