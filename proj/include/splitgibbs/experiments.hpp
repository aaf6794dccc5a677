#pragma once

// The two reference experiments (deconvolution with a smooth prior under
// heteroscedastic noise, TV inpainting) plus an exact-Gaussian check problem
// whose posterior is known in closed form.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "splitgibbs/admm.hpp"
#include "splitgibbs/gaussian.hpp"
#include "splitgibbs/image_field.hpp"
#include "splitgibbs/metrics.hpp"
#include "splitgibbs/operators.hpp"
#include "splitgibbs/samplers.hpp"

namespace splitgibbs {

enum class Method { Sp, Spa, Pmyula, Salsa };

std::string_view method_name(Method m) noexcept;
/// "sp", "spa", "pmyula", "salsa"; throws std::invalid_argument otherwise.
Method parse_method(std::string_view name);

/// Seeds map to independent streams: one for data synthesis, one for the chain.
enum class StreamRole : std::uint64_t { Synthesis = 0, Chain = 1 };
std::uint64_t stream_id(std::size_t replicate, StreamRole role) noexcept;

/// Deterministic piecewise-smooth test image with values in [0, 255].
ImageField phantom(std::size_t rows, std::size_t cols);

struct NoiseMixture {
  double beta_mix = 0.35;  // probability of kappa2
  double kappa1 = 13.0;
  double kappa2 = 40.0;
};

struct DeconvProblem {
  CirculantOperator h;
  CirculantOperator l;
  double gamma;
  ImageField sigma;  // realized noise standard deviations
  ImageField y;
  ImageField truth;

  /// Omega = diag(sigma^-2); throws ParameterError for noiseless data.
  NoisePrecision omega() const;
  /// Dense-free posterior mean Q^{-1} H^T Omega y by CG.
  ImageField posterior_mean(const CgConfig& cg = {}) const;
};

struct DeconvSettings {
  std::size_t blur_size = 9;
  double blur_width = 1.5;
  double gamma = 6e-3;
  NoiseMixture noise{};
};

DeconvProblem synthesize_deconv(const ImageField& truth, const DeconvSettings& settings,
                                RandomStream& rng);

struct InpaintProblem {
  MaskOperator mask;
  double sigma2;
  double beta;
  ImageField y;  // M x 1
  ImageField truth;

  /// Observation on the lattice, missing pixels filled with the observed mean.
  ImageField filled() const;
};

/// Keeps floor(keep_fraction * N) pixels chosen uniformly; sigma^2 set so the
/// observation SNR equals target_snr_db (infinite SNR gives a tiny sigma^2
/// floor so the likelihood stays proper; y is then exactly the kept truth).
InpaintProblem synthesize_inpaint(const ImageField& truth, double keep_fraction,
                                  double target_snr_db, double beta, RandomStream& rng);

/// Realized 10 log10 |H x|^2 / |y - H x|^2.
double realized_snr_db(const InpaintProblem& problem);

/// Fully Gaussian model: prior N(0, (gamma L^T L + delta I)^{-1}), truth drawn
/// from the prior, y = H x + N(0, sigma^2 I) with a circulant blur H.
struct GaussianCheckProblem {
  CirculantOperator h;
  CirculantOperator l;
  double gamma;
  double delta;
  double sigma2;
  ImageField y;
  ImageField truth;

  PotentialModel likelihood() const;
  PotentialModel prior() const;
  /// Exact posterior precision (Fourier-diagonal) and mean.
  std::vector<double> posterior_spectrum() const;
  ImageField posterior_mean() const;
  ImageField posterior_variance() const;
};

struct GaussianCheckSettings {
  std::size_t rows = 32;
  std::size_t cols = 32;
  std::size_t blur_size = 5;
  double blur_width = 1.0;
  double gamma = 0.5;
  double delta = 0.05;
  double sigma2 = 0.25;
};

GaussianCheckProblem synthesize_gaussian_check(const GaussianCheckSettings& settings,
                                               RandomStream& rng);

struct RunParams {
  double rho = 1.0;
  double alpha = 1.0;      // ignored by SP
  std::size_t t_mc = 1000;
  std::size_t t_bi = 200;
  std::size_t prox_iters = 25;
  std::size_t thinning = 1;
  bool keep_samples = true;
  double ci_level = 0.9;
  std::size_t acf_lags = 50;
  // SALSA
  std::size_t admm_max_iters = 3000;
  double admm_tol = 1e-6;
  std::size_t admm_prox_iters = 50;
};

struct EstimateBundle {
  ImageField mmse_x;
  ImageField mmse_z;
  ImageField mmse_u;
  std::optional<ImageField> ci_low;
  std::optional<ImageField> ci_high;
  std::vector<std::pair<std::string, double>> metrics;  // in report order

  double metric(std::string_view name) const;
};

struct RunOutput {
  EstimateBundle bundle;
  ChainRecord record;                  // empty trace for SALSA
  std::vector<AdmmResiduals> residuals;  // SALSA only
};

RunOutput run_deconv(const DeconvProblem& problem, Method method, const RunParams& params,
                     RandomStream& rng);
RunOutput run_inpaint(const InpaintProblem& problem, Method method, const RunParams& params,
                      RandomStream& rng);
RunOutput run_gaussian_check(const GaussianCheckProblem& problem, Method method,
                             const RunParams& params, RandomStream& rng);

/// Split model of the inpainting posterior (SP when alpha = 0).
SplitModel inpaint_split_model(const InpaintProblem& problem, double rho, double alpha,
                               std::size_t prox_iters);

/// Runs `count` independent jobs on up to `workers` threads; results keep job order.
std::vector<RunOutput> run_replicates(std::size_t count, std::size_t workers,
                                      const std::function<RunOutput(std::size_t)>& job);

struct MetricSummary {
  std::string name;
  double mean;
  double std;  // sample standard deviation, 0 for a single replicate
};

/// Metric-wise mean and standard deviation, in the order of the first bundle.
std::vector<MetricSummary> aggregate_metrics(const std::vector<EstimateBundle>& bundles);

}  // namespace splitgibbs
