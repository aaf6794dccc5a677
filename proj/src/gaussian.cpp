#include "splitgibbs/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "splitgibbs/kernels.hpp"

namespace splitgibbs {

namespace {

constexpr std::size_t kDenseLimit = 4096;

double min_of(const ImageField& x) { return *std::min_element(x.values().begin(), x.values().end()); }

bool is_constant_field(const ImageField& x) {
  return std::all_of(x.values().begin(), x.values().end(), [&](double v) { return v == x[0]; });
}

void require_lattice(const ImageField& x, Shape shape, const char* where) {
  if (x.rows() != shape.rows || x.cols() != shape.cols)
    throw DimensionError(std::string(where) + ": field does not match the precision lattice");
}

}  // namespace

// ------------------------------------------------------------ NoisePrecision

NoisePrecision::NoisePrecision(ImageField diag) : diag_(std::move(diag)) {
  for (double v : diag_.values())
    if (!(v > 0.0) || !std::isfinite(v))
      throw ParameterError("NoisePrecision: entries must be finite and strictly positive");
  max_ = *std::max_element(diag_.values().begin(), diag_.values().end());
  constant_ = is_constant_field(diag_);
}

NoisePrecision NoisePrecision::homoscedastic(Shape shape, double sigma2) {
  if (!(sigma2 > 0.0)) throw ParameterError("NoisePrecision: sigma^2 must be positive");
  return NoisePrecision(ImageField(shape.rows, shape.cols, 1.0 / sigma2));
}

// --------------------------------------------------------- PrecisionStructure

bool PrecisionStructure::fourier_diagonal() const noexcept {
  for (const auto& w : weighted)
    if (!w.weights.is_constant()) return false;
  if (diagonal && !is_constant_field(*diagonal)) return false;
  return true;
}

std::vector<double> PrecisionStructure::fourier_spectrum() const {
  if (!fourier_diagonal())
    throw StructureError("precision has a term that is not diagonal in the Fourier basis");
  double constant = identity;
  if (diagonal) constant += (*diagonal)[0];
  std::vector<double> spectrum(shape.size(), constant);
  for (const auto& term : circulant) {
    if (!(term.op.input_shape() == shape)) throw DimensionError("circulant term lattice mismatch");
    const auto& g = term.op.gram_spectrum();
    for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] += term.weight * g[i];
  }
  for (const auto& term : weighted) {
    if (!(term.op.input_shape() == shape)) throw DimensionError("weighted term lattice mismatch");
    const double w = term.weights.diag()[0];
    const auto& g = term.op.gram_spectrum();
    for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] += w * g[i];
  }
  return spectrum;
}

ImageField PrecisionStructure::apply(const ImageField& x) const {
  require_lattice(x, shape, "PrecisionStructure::apply");
  ImageField out = ImageField::like(x);
  const auto& k = kernels::table();
  for (const auto& term : circulant) {
    const ImageField kk = term.op.adjoint(term.op.apply(x));
    k.axpby(1.0, out.data(), term.weight, kk.data(), out.data(), out.size());
  }
  for (const auto& term : weighted) {
    ImageField kx = term.op.apply(x);
    for (std::size_t i = 0; i < kx.size(); ++i) kx[i] *= term.weights.diag()[i];
    out += term.op.adjoint(kx);
  }
  if (diagonal)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*diagonal)[i] * x[i];
  if (identity != 0.0) k.axpby(1.0, out.data(), identity, x.data(), out.data(), out.size());
  return out;
}

PrecisionStructure PrecisionStructure::plus_identity(double extra) const {
  PrecisionStructure copy = *this;
  copy.identity += extra;
  return copy;
}

double PrecisionStructure::eigenvalue_lower_bound() const {
  double bound = identity;
  if (diagonal) bound += min_of(*diagonal);
  for (const auto& term : circulant) {
    const auto& g = term.op.gram_spectrum();
    const double gmin = *std::min_element(g.begin(), g.end());
    bound += term.weight >= 0.0 ? term.weight * gmin
                                : term.weight * *std::max_element(g.begin(), g.end());
  }
  for (const auto& term : weighted) {
    const auto& g = term.op.gram_spectrum();
    bound += min_of(term.weights.diag()) * *std::min_element(g.begin(), g.end());
  }
  return bound;
}

// ---------------------------------------------------------------- GaussianSpec

GaussianSpec::GaussianSpec(ImageField rhs, PrecisionStructure precision)
    : rhs_(std::move(rhs)), precision_(std::move(precision)) {
  require_lattice(rhs_, precision_.shape, "GaussianSpec");
  if (precision_.fourier_diagonal()) {
    const auto spectrum = precision_.fourier_spectrum();
    if (!(*std::min_element(spectrum.begin(), spectrum.end()) > 0.0))
      throw ParameterError("GaussianSpec: precision is not positive definite");
    return;
  }
  if (precision_.eigenvalue_lower_bound() > 0.0) return;
  if (precision_.shape.size() > kDenseLimit)
    throw ParameterError("GaussianSpec: cannot certify positive definiteness");
  const DenseVector eig =
      Eigen::SelfAdjointEigenSolver<DenseMatrix>(densify(precision_), Eigen::EigenvaluesOnly).eigenvalues();
  if (!(eig.minCoeff() > 1e-10 * eig.maxCoeff()))
    throw ParameterError("GaussianSpec: precision is not positive definite");
}

// ------------------------------------------------------------ Fourier sampler

ImageField sample_with_spectrum(const FourierTransform& fft, std::span<const double> spectrum,
                                const ImageField& rhs, RandomStream& rng, double* max_imag) {
  ImageField noise = ImageField::like(rhs);
  rng.fill_normal(noise.values());
  const std::vector<cplx> rhs_hat = fft.forward(rhs);
  std::vector<cplx> draw = fft.forward(noise);
  kernels::table().spectral_draw(rhs_hat.data(), draw.data(), spectrum.data(), draw.data(),
                                 draw.size());
  return fft.inverse_real(draw, max_imag);
}

ImageField solve_with_spectrum(const FourierTransform& fft, std::span<const double> spectrum,
                               const ImageField& rhs) {
  std::vector<cplx> hat = fft.forward(rhs);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] /= spectrum[i];
  return fft.inverse_real(hat);
}

ImageField sample_fourier_diagonal(const GaussianSpec& spec, RandomStream& rng, double* max_imag) {
  const auto spectrum = spec.precision().fourier_spectrum();
  const FourierTransform fft(spec.precision().shape.rows, spec.precision().shape.cols);
  return sample_with_spectrum(fft, spectrum, spec.rhs(), rng, max_imag);
}

ImageField solve_fourier_diagonal(const GaussianSpec& spec) {
  const auto spectrum = spec.precision().fourier_spectrum();
  const FourierTransform fft(spec.precision().shape.rows, spec.precision().shape.cols);
  return solve_with_spectrum(fft, spectrum, spec.rhs());
}

// ------------------------------------------------------ auxiliary dissociation

double default_mu1(const NoisePrecision& omega) { return 0.9 / omega.max(); }

AuxDissociatedDraw sample_aux_dissociated(const CirculantOperator& h, const NoisePrecision& omega,
                                          double rho2, const ImageField& data_rhs,
                                          const ImageField& anchor, const ImageField& current_x,
                                          double mu1, RandomStream& rng) {
  if (!(rho2 > 0.0)) throw ParameterError("sample_aux_dissociated: rho^2 must be positive");
  if (!(mu1 > 0.0) || !(mu1 * omega.max() < 1.0))
    throw ParameterError("sample_aux_dissociated: need 0 < mu1 * max(Omega) < 1, got " +
                         std::to_string(mu1 * omega.max()));
  const Shape shape = h.input_shape();
  require_lattice(data_rhs, shape, "sample_aux_dissociated");
  require_lattice(anchor, shape, "sample_aux_dissociated");
  require_lattice(current_x, shape, "sample_aux_dissociated");

  const double inv_mu = 1.0 / mu1;
  const ImageField& w = omega.diag();

  // v | x ~ N(H x, (mu^{-1} - Omega)^{-1}), pixel-wise.
  AuxDissociatedDraw out;
  out.v = h.apply(current_x);
  ImageField weighted_v = ImageField::like(out.v);
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    const double prec = inv_mu - w[i];
    out.v[i] += rng.normal() / std::sqrt(prec);
    weighted_v[i] = prec * out.v[i];
  }

  // x | v: precision mu^{-1} H^T H + rho^{-2} I, rhs H^T Omega y + H^T (mu^{-1} - Omega) v + rho^{-2} anchor.
  ImageField rhs = h.adjoint(weighted_v);
  rhs += data_rhs;
  const double r = 1.0 / rho2;
  kernels::table().axpby(1.0, rhs.data(), r, anchor.data(), rhs.data(), rhs.size());

  const auto& gram = h.gram_spectrum();
  std::vector<double> spectrum(gram.size());
  for (std::size_t i = 0; i < gram.size(); ++i) spectrum[i] = inv_mu * gram[i] + r;
  out.x = sample_with_spectrum(h.fourier(), spectrum, rhs, rng);
  return out;
}

// ---------------------------------------------------------- diagonal samplers

ImageField sherman_morrison_covariance(const MaskOperator& mask, double sigma2, double rho2) {
  if (!(sigma2 > 0.0) || !(rho2 > 0.0))
    throw ParameterError("sherman_morrison_covariance: variances must be positive");
  const ImageField& hth = mask.gram_diagonal();
  const double shrink = rho2 / (sigma2 + rho2);
  ImageField cov = ImageField::like(hth);
  for (std::size_t i = 0; i < cov.size(); ++i) cov[i] = rho2 * (1.0 - shrink * hth[i]);
  return cov;
}

ImageField sample_sherman_morrison(const MaskOperator& mask, double sigma2, double rho2,
                                   const ImageField& y, const ImageField& anchor,
                                   RandomStream& rng) {
  require_lattice(anchor, mask.input_shape(), "sample_sherman_morrison");
  const ImageField cov = sherman_morrison_covariance(mask, sigma2, rho2);
  const ImageField hty = mask.adjoint(y);
  ImageField noise = ImageField::like(anchor);
  rng.fill_normal(noise.values());
  ImageField x = ImageField::like(anchor);
  const double inv_s2 = 1.0 / sigma2, inv_r2 = 1.0 / rho2;
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = cov[i] * (inv_s2 * hty[i] + inv_r2 * anchor[i]) + std::sqrt(cov[i]) * noise[i];
  return x;
}

ImageField sample_diagonal(const ImageField& precision_diag, const ImageField& rhs, double r,
                           const ImageField& anchor, RandomStream& rng) {
  require_same_shape(precision_diag, rhs, "sample_diagonal");
  require_same_shape(precision_diag, anchor, "sample_diagonal");
  ImageField noise = ImageField::like(anchor);
  rng.fill_normal(noise.values());
  ImageField out = ImageField::like(anchor);
  kernels::table().diag_gaussian(rhs.data(), precision_diag.data(), r, anchor.data(), noise.data(),
                                 out.data(), out.size());
  return out;
}

// ------------------------------------------------- perturbation-optimization

ImageField sample_perturbation_optimization(const GaussianSpec& spec, RandomStream& rng,
                                            const CgConfig& cg) {
  const PrecisionStructure& q = spec.precision();
  ImageField eta = spec.rhs();
  auto normal_field = [&](Shape s) {
    ImageField f(s.rows, s.cols);
    rng.fill_normal(f.values());
    return f;
  };
  for (const auto& term : q.circulant) {
    if (term.weight < 0.0) throw StructureError("perturbation-optimization needs nonnegative weights");
    ImageField xi = normal_field(term.op.output_shape());
    xi *= std::sqrt(term.weight);
    eta += term.op.adjoint(xi);
  }
  for (const auto& term : q.weighted) {
    ImageField xi = normal_field(term.op.output_shape());
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] *= std::sqrt(term.weights.diag()[i]);
    eta += term.op.adjoint(xi);
  }
  if (q.diagonal) {
    ImageField xi = normal_field(q.shape);
    for (std::size_t i = 0; i < xi.size(); ++i) {
      if ((*q.diagonal)[i] < 0.0) throw StructureError("perturbation-optimization needs D >= 0");
      eta[i] += std::sqrt((*q.diagonal)[i]) * xi[i];
    }
  }
  if (q.identity > 0.0) {
    ImageField xi = normal_field(q.shape);
    kernels::table().axpby(1.0, eta.data(), std::sqrt(q.identity), xi.data(), eta.data(), eta.size());
  }
  CgResult solved = cg_solve([&](const ImageField& x) { return q.apply(x); }, eta, cg);
  return std::move(solved.x);
}

// ----------------------------------------------------------------- dense

DenseVector sample_dense_oracle(const DenseMatrix& q, const DenseVector& b, RandomStream& rng) {
  if (q.rows() != q.cols() || q.rows() != b.size())
    throw DimensionError("sample_dense_oracle: size mismatch");
  if (static_cast<std::size_t>(q.rows()) > kDenseLimit)
    throw ParameterError("sample_dense_oracle: dimension above 4096");
  Eigen::LLT<DenseMatrix> llt(q);
  if (llt.info() != Eigen::Success) throw FactorizationError("sample_dense_oracle: Q is not SPD");
  DenseVector mean = llt.solve(b);
  DenseVector xi(b.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
  // Q = L L^T, so L^{-T} xi has covariance Q^{-1}.
  DenseVector perturbation = llt.matrixU().solve(xi);
  return mean + perturbation;
}

DenseMatrix densify(const LinearOperator& op) {
  const Shape in = input_shape(op), out = output_shape(op);
  DenseMatrix m(out.size(), in.size());
  ImageField e(in.rows, in.cols);
  for (std::size_t j = 0; j < in.size(); ++j) {
    e[j] = 1.0;
    const ImageField col = splitgibbs::apply(op, e);
    for (std::size_t i = 0; i < out.size(); ++i) m(i, j) = col[i];
    e[j] = 0.0;
  }
  return m;
}

DenseMatrix densify(const PrecisionStructure& precision) {
  const std::size_t n = precision.shape.size();
  DenseMatrix m(n, n);
  ImageField e(precision.shape.rows, precision.shape.cols);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const ImageField col = precision.apply(e);
    for (std::size_t i = 0; i < n; ++i) m(i, j) = col[i];
    e[j] = 0.0;
  }
  return 0.5 * (m + m.transpose());
}

DenseVector to_vector(const ImageField& x) {
  DenseVector v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i];
  return v;
}

ImageField to_field(const DenseVector& v, Shape shape) {
  if (static_cast<std::size_t>(v.size()) != shape.size())
    throw DimensionError("to_field: size mismatch");
  ImageField x(shape.rows, shape.cols);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = v[i];
  return x;
}

}  // namespace splitgibbs
