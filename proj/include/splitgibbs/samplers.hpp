#pragma once

// Split (SP) and split-augmented (SPA) Gibbs samplers, the multi-block
// variant, and chain recording.
//
// Every conditional has the same shape: a potential h plus the quadratic
// coupling |v - anchor|^2 / (2 rho^2), so one routine samples x | z, z | x
// and each z_i of the multi-block model, given how h is to be handled.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "splitgibbs/cg.hpp"
#include "splitgibbs/gaussian.hpp"
#include "splitgibbs/image_field.hpp"
#include "splitgibbs/operators.hpp"
#include "splitgibbs/proximal.hpp"
#include "splitgibbs/random.hpp"

namespace splitgibbs {

enum class Strategy { ExactGaussian, Myula, DiagonalGaussian };

/// h(x) = 0.5 x^T Q x - b^T x + c.
struct QuadraticTerm {
  QuadraticTerm(PrecisionStructure precision, ImageField linear, double constant = 0.0);

  PrecisionStructure precision;
  ImageField linear;
  double constant = 0.0;
  /// Auxiliary step for the single weighted-circulant case; 0 picks the default.
  double mu1 = 0.0;
  CgConfig cg{};

  double value(const ImageField& x) const;
  ImageField gradient(const ImageField& x) const;
  /// Q is one weighted circulant term K^T W K and nothing else.
  bool single_weighted() const noexcept;
  /// Eigenvalues of Q when it is Fourier-diagonal, empty otherwise. Computed
  /// at construction; rebuild the term after editing `precision`.
  const std::vector<double>& spectrum() const noexcept { return spectrum_; }

 private:
  std::vector<double> spectrum_;
};

/// h(x) = 0.5 sum d_i x_i^2 - b^T x.
struct DiagonalTerm {
  ImageField precision_diag;
  ImageField linear;
};

/// h(x) = |M x - y|^2 / (2 sigma^2).
struct MaskLikelihood {
  MaskOperator mask;
  double sigma2;
  ImageField y;
};

/// MYULA moves use lambda = lambda_scale * rho^2 and gamma = gamma_scale * rho^2.
struct MyulaSchedule {
  double lambda_scale = 1.0;
  double gamma_scale = 0.25;
  std::size_t substeps = 1;
};

/// One term of the log-posterior together with the way its conditionals are drawn.
struct PotentialModel {
  std::string name;
  Strategy strategy = Strategy::DiagonalGaussian;
  Shape shape;

  std::function<double(const ImageField&)> value_fn;  // overrides the built-in value
  GradientCallback smooth_gradient;                   // Myula: smooth part, may be empty
  ProxCallback prox;                                  // Myula: non-smooth part
  MyulaSchedule myula;

  std::optional<QuadraticTerm> quadratic;
  std::optional<DiagonalTerm> diagonal;
  std::optional<MaskLikelihood> mask;

  double value(const ImageField& x) const;
  /// Throws ConfigurationError when the declared strategy lacks its data.
  void validate() const;
};

PotentialModel make_zero_potential(Shape shape);
PotentialModel make_quadratic_potential(std::string name, PrecisionStructure precision,
                                        ImageField linear, double constant = 0.0);
/// 0.5 (Hx - y)^T Omega (Hx - y).
PotentialModel make_weighted_likelihood(const CirculantOperator& h, const NoisePrecision& omega,
                                        const ImageField& y);
/// (gamma / 2) |L x|^2.
PotentialModel make_smooth_prior(const CirculantOperator& l, double gamma);
PotentialModel make_mask_likelihood(const MaskOperator& mask, double sigma2, ImageField y);
PotentialModel make_diagonal_potential(std::string name, ImageField precision_diag,
                                       ImageField linear);
/// beta * TV(x), handled by MYULA with a Chambolle prox.
PotentialModel make_tv_potential(Shape shape, double beta, std::size_t prox_iters);
/// beta * sum_i |(h_i, v_i)|_2 on a stacked gradient field.
PotentialModel make_group_l21_potential(Shape lattice, double beta);

/// Gradient of the smooth potentials (quadratic, diagonal, mask likelihood).
GradientCallback smooth_gradient_of(const PotentialModel& model);

/// Draw from exp(-h(v) - |v - anchor|^2/(2 rho2)). `current` is the chain's
/// present value (MYULA moves from it); `aux` holds the auxiliary variable of
/// the weighted-circulant case and is created on first use.
ImageField sample_conditional(const PotentialModel& model, const ImageField& anchor, double rho2,
                              const ImageField& current, RandomStream& rng,
                              std::optional<ImageField>* aux = nullptr);

/// Mode of the same conditional (the prox of rho2 * h at the anchor).
ImageField conditional_mode(const PotentialModel& model, const ImageField& anchor, double rho2,
                            const ImageField* warm = nullptr);

struct SplitModel {
  PotentialModel f;
  PotentialModel g;
  double rho2 = 1.0;
  double alpha2 = 0.0;  // 0 gives SP

  void validate() const;
  bool augmented() const noexcept { return alpha2 > 0.0; }
  /// f(x) + g(x), the negative log-posterior up to a constant.
  double target_value(const ImageField& x) const { return f.value(x) + g.value(x); }
};

struct ChainState {
  ImageField x;
  ImageField z;
  ImageField u;
  std::size_t sweep_index = 0;
  std::optional<ImageField> aux_x;
  std::optional<ImageField> aux_z;

  /// z given, x = z, u = 0.
  static ChainState from_z(ImageField z0);
};

ChainState sp_sweep(const SplitModel& model, ChainState state, RandomStream& rng);
ChainState spa_sweep(const SplitModel& model, ChainState state, RandomStream& rng);
/// sp_sweep or spa_sweep according to alpha2.
ChainState sweep(const SplitModel& model, ChainState state, RandomStream& rng);

/// Per-pixel Welford accumulator.
class RunningMoments {
 public:
  void add(const ImageField& x);
  std::size_t count() const noexcept { return count_; }
  const ImageField& mean() const;
  /// Unbiased sample variance (zero with fewer than two samples).
  ImageField variance() const;

 private:
  std::size_t count_ = 0;
  ImageField mean_;
  ImageField m2_;
};

struct ChainRecord {
  std::vector<ImageField> kept_samples;  // x, thinned, only when requested
  std::vector<double> scalar_trace;      // -log posterior at x, every sweep
  RunningMoments x;
  RunningMoments z;
  RunningMoments u;
  ChainState final_state;
};

struct RunOptions {
  std::size_t thinning = 1;
  bool keep_samples = false;
};

void validate_schedule(std::size_t t_mc, std::size_t t_bi);

ChainRecord run_chain(const SplitModel& model, std::size_t t_mc, std::size_t t_bi, ChainState init,
                      RandomStream& rng, const RunOptions& options = {});

/// Direct P-MYULA on exp(-f_smooth - g): one MYULA move per iteration, z and u unused.
ChainRecord run_myula_chain(const std::function<double(const ImageField&)>& value,
                            const GradientCallback& grad_smooth, const ProxCallback& prox,
                            const MyulaParams& params, std::size_t t_mc, std::size_t t_bi,
                            ImageField init, RandomStream& rng, const RunOptions& options = {});

// ------------------------------------------------------------- multi-block

struct SplitBlock {
  PotentialModel potential;  // h_i, on the output lattice of op
  LinearOperator op;         // K_i
  ImageField z;
  ImageField u;
  std::optional<ImageField> aux;
};

/// exp(-sum_i h_i(K_i x)) split into one (z_i, u_i) pair per block.
struct MultiBlockModel {
  std::vector<SplitBlock> blocks;
  ImageField x;
  double rho2 = 1.0;
  double alpha2 = 0.0;
  std::size_t sweep_index = 0;
  CgConfig cg{};

  /// Shapes, strategies and positive definiteness of sum_i K_i^T K_i.
  void validate() const;
  double target_value(const ImageField& x) const;
};

/// One sweep: x, then every z_i, then every u_i.
void multiblock_sweep(MultiBlockModel& model, RandomStream& rng);

/// Precision and right-hand side of the x-conditional, for tests.
ImageField multiblock_x_precision_apply(const MultiBlockModel& model, const ImageField& x);
ImageField multiblock_x_rhs(const MultiBlockModel& model);

}  // namespace splitgibbs
