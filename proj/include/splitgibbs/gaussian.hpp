#pragma once

// Samplers for the Gaussian conditionals that appear once the data term and
// the prior are split apart:
//   * Fourier-diagonal precisions (circulant quadratics + scaled identity),
//   * K^T W K + tau I with circulant K and diagonal W, through an auxiliary
//     variable that leaves a Fourier-diagonal x-step,
//   * masked likelihoods, whose precision is diagonal (Sherman-Morrison form),
//   * anything else built from the same terms, by perturbation-optimization
//     with conjugate gradients,
// plus a dense Cholesky sampler used as the reference in tests.
//
// All samplers draw from N(Q^{-1} b, Q^{-1}) where (Q, b) is given in
// precision form.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

#include "splitgibbs/cg.hpp"
#include "splitgibbs/errors.hpp"
#include "splitgibbs/image_field.hpp"
#include "splitgibbs/operators.hpp"
#include "splitgibbs/random.hpp"

namespace splitgibbs {

/// Diagonal of a noise precision matrix Omega (inverse noise variances).
class NoisePrecision {
 public:
  explicit NoisePrecision(ImageField diag);
  static NoisePrecision homoscedastic(Shape shape, double sigma2);

  const ImageField& diag() const noexcept { return diag_; }
  double max() const noexcept { return max_; }
  bool is_constant() const noexcept { return constant_; }

 private:
  ImageField diag_;
  double max_ = 0.0;
  bool constant_ = true;
};

struct CirculantQuadratic {
  double weight;          // weight * K^T K
  CirculantOperator op;
};

struct WeightedCirculantQuadratic {
  CirculantOperator op;   // K^T W K
  NoisePrecision weights;
};

/// Q = sum_i w_i K_i^T K_i + sum_j K_j^T W_j K_j + D + tau I.
struct PrecisionStructure {
  Shape shape;
  std::vector<CirculantQuadratic> circulant;
  std::vector<WeightedCirculantQuadratic> weighted;
  std::optional<ImageField> diagonal;
  double identity = 0.0;

  /// True when every term is diagonal in the same Fourier basis.
  bool fourier_diagonal() const noexcept;
  /// Eigenvalues of Q in DFT order; throws StructureError if not Fourier-diagonal.
  std::vector<double> fourier_spectrum() const;
  ImageField apply(const ImageField& x) const;
  /// Copy with tau increased by `extra`.
  PrecisionStructure plus_identity(double extra) const;
  /// Cheap lower bound on the smallest eigenvalue.
  double eigenvalue_lower_bound() const;
};

/// Gaussian in precision form: Q m = b, covariance Q^{-1}.
class GaussianSpec {
 public:
  /// Checks that Q is SPD (spectrum, lower bound, or dense factorization for
  /// lattices up to 4096 pixels); throws ParameterError otherwise.
  GaussianSpec(ImageField rhs, PrecisionStructure precision);

  const ImageField& rhs() const noexcept { return rhs_; }
  const PrecisionStructure& precision() const noexcept { return precision_; }

 private:
  ImageField rhs_;
  PrecisionStructure precision_;
};

/// Exact draw when Q is Fourier-diagonal. `max_imag` (optional) receives the
/// largest imaginary residue discarded after the inverse transform.
ImageField sample_fourier_diagonal(const GaussianSpec& spec, RandomStream& rng,
                                   double* max_imag = nullptr);
/// Mean Q^{-1} b for a Fourier-diagonal Q.
ImageField solve_fourier_diagonal(const GaussianSpec& spec);

/// Lower-level entry shared by the samplers: spectrum already assembled.
ImageField sample_with_spectrum(const FourierTransform& fft, std::span<const double> spectrum,
                                const ImageField& rhs, RandomStream& rng,
                                double* max_imag = nullptr);
ImageField solve_with_spectrum(const FourierTransform& fft, std::span<const double> spectrum,
                               const ImageField& rhs);

/// Default auxiliary step: 0.9 / max(Omega).
double default_mu1(const NoisePrecision& omega);

struct AuxDissociatedDraw {
  ImageField x;
  ImageField v;
};

/// Gibbs sub-sweep for the conditional with precision H^T Omega H + rho^-2 I
/// and right-hand side H^T Omega y + rho^-2 anchor. First v | x is drawn
/// from N(H x, (mu1^{-1} I - Omega)^{-1}), then x | v from the
/// Fourier-diagonal Gaussian with precision mu1^{-1} H^T H + rho^-2 I. The
/// x-marginal of the invariant law is the target conditional.
///
/// Requires mu1 * max(Omega) < 1 (ParameterError otherwise).
AuxDissociatedDraw sample_aux_dissociated(const CirculantOperator& h, const NoisePrecision& omega,
                                          double rho2, const ImageField& data_rhs,
                                          const ImageField& anchor, const ImageField& current_x,
                                          double mu1, RandomStream& rng);

/// Diagonal covariance rho^2 (I - rho^2/(sigma^2+rho^2) H^T H) of the masked
/// conditional, on the image lattice.
ImageField sherman_morrison_covariance(const MaskOperator& mask, double sigma2, double rho2);

/// Exact draw from the masked-likelihood conditional
/// exp(-|Hx - y|^2/(2 sigma^2) - |x - anchor|^2/(2 rho^2)).
ImageField sample_sherman_morrison(const MaskOperator& mask, double sigma2, double rho2,
                                   const ImageField& y, const ImageField& anchor,
                                   RandomStream& rng);

/// Draw from N((d + r)^{-1}(b + r anchor), (d + r)^{-1}) with diagonal d.
ImageField sample_diagonal(const ImageField& precision_diag, const ImageField& rhs, double r,
                           const ImageField& anchor, RandomStream& rng);

/// Perturbation-optimization draw for any PrecisionStructure: the
/// right-hand side is perturbed so that the CG solution has covariance
/// Q^{-1} exactly (up to the solver tolerance).
ImageField sample_perturbation_optimization(const GaussianSpec& spec, RandomStream& rng,
                                            const CgConfig& cg);

// ------------------------------------------------------------ dense oracle

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

/// Exact draw from N(Q^{-1} b, Q^{-1}) through a Cholesky factorization.
/// Throws FactorizationError when Q is not SPD, ParameterError above 4096.
DenseVector sample_dense_oracle(const DenseMatrix& q, const DenseVector& b, RandomStream& rng);

/// Column-by-column densification (small lattices only).
DenseMatrix densify(const LinearOperator& op);
DenseMatrix densify(const PrecisionStructure& precision);
DenseVector to_vector(const ImageField& x);
ImageField to_field(const DenseVector& v, Shape shape);

}  // namespace splitgibbs
