#include "splitgibbs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "splitgibbs/errors.hpp"
#include "splitgibbs/fourier.hpp"

namespace splitgibbs {

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::Sp: return "sp";
    case Method::Spa: return "spa";
    case Method::Pmyula: return "pmyula";
    case Method::Salsa: return "salsa";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Sp, Method::Spa, Method::Pmyula, Method::Salsa})
    if (method_name(m) == name) return m;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected sp, spa, pmyula or salsa)");
}

std::uint64_t stream_id(std::size_t replicate, StreamRole role) noexcept {
  return 2 * static_cast<std::uint64_t>(replicate) + static_cast<std::uint64_t>(role);
}

ImageField phantom(std::size_t rows, std::size_t cols) {
  ImageField img(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double y = (r + 0.5) / rows, x = (c + 0.5) / cols;
      double v = 40.0 + 60.0 * x;
      const double dx = x - 0.35, dy = y - 0.4;
      if (dx * dx + dy * dy < 0.04) v = 200.0;
      if (x > 0.6 && x < 0.9 && y > 0.15 && y < 0.55) v = 120.0 + 80.0 * (y - 0.15);
      const double ex = (x - 0.65) / 0.25, ey = (y - 0.78) / 0.12;
      if (ex * ex + ey * ey < 1.0) v = 20.0;
      if (x > 0.18 && x < 0.3 && y > 0.7 && y < 0.85) v = 255.0;
      img(r, c) = v;
    }
  }
  return img;
}

// ------------------------------------------------------------ deconvolution

NoisePrecision DeconvProblem::omega() const {
  ImageField w = ImageField::like(sigma);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw ParameterError("noiseless observation has no noise precision");
    w[i] = 1.0 / (sigma[i] * sigma[i]);
  }
  return NoisePrecision(std::move(w));
}

ImageField DeconvProblem::posterior_mean(const CgConfig& cg) const {
  const NoisePrecision w = omega();
  PrecisionStructure q{h.input_shape(), {CirculantQuadratic{gamma, l}},
                       {WeightedCirculantQuadratic{h, w}}, std::nullopt, 0.0};
  ImageField wy = y;
  for (std::size_t i = 0; i < wy.size(); ++i) wy[i] *= w.diag()[i];
  CgResult solved = cg_solve([&](const ImageField& x) { return q.apply(x); }, h.adjoint(wy), cg);
  return std::move(solved.x);
}

DeconvProblem synthesize_deconv(const ImageField& truth, const DeconvSettings& settings,
                                RandomStream& rng) {
  if (!truth.all_finite()) throw ParameterError("synthesize_deconv: truth is not finite");
  const NoiseMixture& mix = settings.noise;
  if (!(mix.beta_mix >= 0.0 && mix.beta_mix <= 1.0) || mix.kappa1 < 0.0 || mix.kappa2 < 0.0)
    throw ParameterError("synthesize_deconv: invalid noise mixture");
  if (!(settings.gamma > 0.0)) throw ParameterError("synthesize_deconv: gamma must be positive");

  const std::size_t rows = truth.rows(), cols = truth.cols();
  DeconvProblem p{
      CirculantOperator::from_stencil(gaussian_stencil(settings.blur_size, settings.blur_width),
                                      rows, cols),
      CirculantOperator::from_stencil(laplacian_stencil(), rows, cols),
      settings.gamma,
      ImageField(rows, cols),
      ImageField(rows, cols),
      truth};
  for (double& s : p.sigma.values()) s = rng.uniform() < mix.beta_mix ? mix.kappa2 : mix.kappa1;
  p.y = p.h.apply(truth);
  for (std::size_t i = 0; i < p.y.size(); ++i) {
    const double xi = rng.normal();
    if (p.sigma[i] > 0.0) p.y[i] += p.sigma[i] * xi;
  }
  return p;
}

// ---------------------------------------------------------------- inpainting

ImageField InpaintProblem::filled() const { return fill_with_observed_mean(mask, y); }

InpaintProblem synthesize_inpaint(const ImageField& truth, double keep_fraction,
                                  double target_snr_db, double beta, RandomStream& rng) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw ParameterError("synthesize_inpaint: keep fraction must be in (0, 1]");
  if (!(beta >= 0.0)) throw ParameterError("synthesize_inpaint: beta must be >= 0");
  const std::size_t n = truth.size();
  const auto m = static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(n)));
  if (m == 0) throw ParameterError("synthesize_inpaint: no pixel would be kept");

  // Partial Fisher-Yates: the first m slots end up a uniform m-subset.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());

  MaskOperator mask(shape_of(truth), std::move(idx));
  ImageField y = mask.apply(truth);
  const double power = squared_norm(y) / static_cast<double>(m);
  double sigma2;
  if (std::isinf(target_snr_db) && target_snr_db > 0.0) {
    sigma2 = 1e-12 * std::max(power, 1.0);
  } else {
    sigma2 = power / std::pow(10.0, target_snr_db / 10.0);
    if (!(sigma2 > 0.0)) throw ParameterError("synthesize_inpaint: zero-power truth");
    const double sigma = std::sqrt(sigma2);
    for (double& v : y.values()) v += sigma * rng.normal();
  }
  return InpaintProblem{std::move(mask), sigma2, beta, std::move(y), truth};
}

double realized_snr_db(const InpaintProblem& problem) {
  const ImageField clean = problem.mask.apply(problem.truth);
  return 10.0 * std::log10(squared_norm(clean) / squared_norm(problem.y - clean));
}

// ------------------------------------------------------------ Gaussian check

PotentialModel GaussianCheckProblem::likelihood() const {
  return make_weighted_likelihood(h, NoisePrecision::homoscedastic(h.input_shape(), sigma2), y);
}

PotentialModel GaussianCheckProblem::prior() const {
  const Shape s = h.input_shape();
  PrecisionStructure q{s, {CirculantQuadratic{gamma, l}}, {}, std::nullopt, delta};
  return make_quadratic_potential("gaussian-prior", std::move(q), ImageField(s.rows, s.cols));
}

std::vector<double> GaussianCheckProblem::posterior_spectrum() const {
  const auto& gh = h.gram_spectrum();
  const auto& gl = l.gram_spectrum();
  std::vector<double> s(gh.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = gh[i] / sigma2 + gamma * gl[i] + delta;
  return s;
}

ImageField GaussianCheckProblem::posterior_mean() const {
  ImageField rhs = h.adjoint(y);
  rhs *= 1.0 / sigma2;
  return solve_with_spectrum(h.fourier(), posterior_spectrum(), rhs);
}

ImageField GaussianCheckProblem::posterior_variance() const {
  // Q is circulant, so every diagonal entry of Q^{-1} is the mean of 1/lambda.
  const auto s = posterior_spectrum();
  double total = 0.0;
  for (double v : s) total += 1.0 / v;
  return ImageField(y.rows(), y.cols(), total / static_cast<double>(s.size()));
}

GaussianCheckProblem synthesize_gaussian_check(const GaussianCheckSettings& st, RandomStream& rng) {
  if (!(st.gamma > 0.0) || !(st.delta > 0.0) || !(st.sigma2 > 0.0))
    throw ParameterError("synthesize_gaussian_check: gamma, delta, sigma^2 must be positive");
  GaussianCheckProblem p{
      CirculantOperator::from_stencil(gaussian_stencil(st.blur_size, st.blur_width), st.rows,
                                      st.cols),
      CirculantOperator::from_stencil(laplacian_stencil(), st.rows, st.cols),
      st.gamma,
      st.delta,
      st.sigma2,
      ImageField(st.rows, st.cols),
      ImageField(st.rows, st.cols)};
  const auto& gl = p.l.gram_spectrum();
  std::vector<double> prior(gl.size());
  for (std::size_t i = 0; i < prior.size(); ++i) prior[i] = st.gamma * gl[i] + st.delta;
  p.truth = sample_with_spectrum(p.h.fourier(), prior, ImageField(st.rows, st.cols), rng);
  p.y = p.h.apply(p.truth);
  const double sigma = std::sqrt(st.sigma2);
  for (double& v : p.y.values()) v += sigma * rng.normal();
  return p;
}

// ----------------------------------------------------------------- running

double EstimateBundle::metric(std::string_view name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  throw std::out_of_range("no metric named " + std::string(name));
}

namespace {

void check_params(const RunParams& p, Method method) {
  if (method != Method::Pmyula && !(p.rho > 0.0)) throw ParameterError("rho must be positive");
  if (method == Method::Spa && !(p.alpha > 0.0)) throw ParameterError("SPA needs alpha > 0");
  if (!(p.ci_level > 0.0 && p.ci_level < 1.0)) throw ParameterError("ci level must be in (0, 1)");
  if (method != Method::Salsa) validate_schedule(p.t_mc, p.t_bi);
}

RunOptions run_options(const RunParams& p) { return RunOptions{p.thinning, p.keep_samples}; }

// Moments, credibility bounds and chain diagnostics common to every sampler.
EstimateBundle summarize_chain(const ChainRecord& rec, const RunParams& p) {
  EstimateBundle b;
  b.mmse_x = rec.x.mean();
  b.mmse_z = rec.z.count() ? rec.z.mean() : b.mmse_x;
  b.mmse_u = rec.u.count() ? rec.u.mean() : ImageField::like(b.mmse_x);
  if (!rec.kept_samples.empty()) {
    CredibilityBounds cb = credibility(rec.kept_samples, p.ci_level);
    b.ci_low = std::move(cb.low);
    b.ci_high = std::move(cb.high);
  }
  return b;
}

void add_chain_metrics(EstimateBundle& b, const ChainRecord& rec, const RunParams& p) {
  const std::span<const double> post(rec.scalar_trace.data() + p.t_bi,
                                     rec.scalar_trace.size() - p.t_bi);
  const auto curve = acf(post, std::max<std::size_t>(p.acf_lags, 10));
  b.metrics.emplace_back("acf_lag1", curve.size() > 1 ? curve[1] : 0.0);
  b.metrics.emplace_back("acf_lag10", curve.size() > 10 ? curve[10] : 0.0);
  b.metrics.emplace_back("kept_samples", static_cast<double>(rec.x.count()));
  b.metrics.emplace_back("final_neg_log_posterior", rec.scalar_trace.back());
}

SplitModel make_split(PotentialModel f, PotentialModel g, Method method, const RunParams& p) {
  if (method != Method::Sp && method != Method::Spa)
    throw ParameterError("split model requested for method " + std::string(method_name(method)));
  return SplitModel{std::move(f), std::move(g), p.rho * p.rho,
                    method == Method::Spa ? p.alpha * p.alpha : 0.0};
}

}  // namespace

RunOutput run_deconv(const DeconvProblem& problem, Method method, const RunParams& params,
                     RandomStream& rng) {
  check_params(params, method);
  const SplitModel model =
      make_split(make_weighted_likelihood(problem.h, problem.omega(), problem.y),
                 make_smooth_prior(problem.l, problem.gamma), method, params);
  RunOutput out;
  out.record = run_chain(model, params.t_mc, params.t_bi, ChainState::from_z(problem.h.adjoint(problem.y)),
                         rng, run_options(params));
  out.bundle = summarize_chain(out.record, params);
  auto& m = out.bundle.metrics;
  m.emplace_back("snr_db", snr_db(problem.truth, out.bundle.mmse_x));
  m.emplace_back("psnr_db", psnr_db(problem.truth, out.bundle.mmse_x));
  m.emplace_back("snr_z_db", snr_db(problem.truth, out.bundle.mmse_z));
  add_chain_metrics(out.bundle, out.record, params);
  return out;
}

SplitModel inpaint_split_model(const InpaintProblem& problem, double rho, double alpha,
                               std::size_t prox_iters) {
  const Shape s = problem.mask.input_shape();
  return SplitModel{make_mask_likelihood(problem.mask, problem.sigma2, problem.y),
                    make_tv_potential(s, problem.beta, prox_iters), rho * rho, alpha * alpha};
}

RunOutput run_inpaint(const InpaintProblem& problem, Method method, const RunParams& params,
                      RandomStream& rng) {
  check_params(params, method);
  const ImageField filled = problem.filled();
  const Shape shape = problem.mask.input_shape();
  RunOutput out;

  switch (method) {
    case Method::Sp:
    case Method::Spa: {
      const SplitModel model = inpaint_split_model(
          problem, params.rho, method == Method::Spa ? params.alpha : 0.0, params.prox_iters);
      out.record = run_chain(model, params.t_mc, params.t_bi, ChainState::from_z(filled), rng,
                             run_options(params));
      out.bundle = summarize_chain(out.record, params);
      break;
    }
    case Method::Pmyula: {
      const PotentialModel f = make_mask_likelihood(problem.mask, problem.sigma2, problem.y);
      const PotentialModel g = make_tv_potential(shape, problem.beta, params.prox_iters);
      // L_f = sigma^-2 lambda_max(H^T H) = sigma^-2 for a mask.
      const double lambda = problem.sigma2;
      const MyulaParams mp{lambda, 0.25 * lambda, params.prox_iters};
      out.record = run_myula_chain([&](const ImageField& x) { return f.value(x) + g.value(x); },
                                   smooth_gradient_of(f), g.prox, mp, params.t_mc, params.t_bi,
                                   filled, rng, run_options(params));
      out.bundle = summarize_chain(out.record, params);
      break;
    }
    case Method::Salsa: {
      const PotentialModel f = make_mask_likelihood(problem.mask, problem.sigma2, problem.y);
      ChambolleDual dual;
      const XMinimizer f_min = [&](const ImageField& anchor, double rho2) {
        return conditional_mode(f, anchor, rho2);
      };
      const ZProx g_prox = [&](const ImageField& v, double rho2) {
        return tv_prox(v, ProxSpec{problem.beta, rho2}, params.admm_prox_iters, &dual);
      };
      const AdmmConfig cfg{params.rho * params.rho, params.admm_max_iters, params.admm_tol,
                           params.admm_tol};
      AdmmResult res = admm_solve(f_min, g_prox, cfg, AdmmInit{filled, {}});
      out.bundle.mmse_x = std::move(res.x);
      out.bundle.mmse_z = std::move(res.z);
      out.bundle.mmse_u = std::move(res.u);
      out.residuals = std::move(res.trace);
      out.bundle.metrics.emplace_back("admm_iterations", static_cast<double>(res.iterations));
      out.bundle.metrics.emplace_back("admm_converged", res.converged ? 1.0 : 0.0);
      break;
    }
  }

  std::vector<std::pair<std::string, double>> quality{
      {"isnr_db", isnr_db(problem.truth, filled, out.bundle.mmse_x)},
      {"snr_db", snr_db(problem.truth, out.bundle.mmse_x)},
      {"psnr_db", psnr_db(problem.truth, out.bundle.mmse_x)},
      {"isnr_z_db", isnr_db(problem.truth, filled, out.bundle.mmse_z)}};
  auto& m = out.bundle.metrics;
  m.insert(m.begin(), quality.begin(), quality.end());
  if (method != Method::Salsa) add_chain_metrics(out.bundle, out.record, params);
  return out;
}

RunOutput run_gaussian_check(const GaussianCheckProblem& problem, Method method,
                             const RunParams& params, RandomStream& rng) {
  check_params(params, method);
  const ImageField exact_mean = problem.posterior_mean();
  const ImageField exact_var = problem.posterior_variance();
  const ImageField z0 = problem.h.adjoint(problem.y);
  RunOutput out;

  if (method == Method::Pmyula)
    throw ParameterError("gaussian-check supports sp, spa and salsa (ADMM)");
  if (method == Method::Salsa) {
    const SplitModel model{problem.likelihood(), problem.prior(), params.rho * params.rho, 0.0};
    const AdmmConfig cfg{model.rho2, params.admm_max_iters, params.admm_tol, params.admm_tol};
    AdmmResult res = admm_solve(model, cfg, AdmmInit{z0, {}});
    out.bundle.mmse_x = std::move(res.x);
    out.bundle.mmse_z = std::move(res.z);
    out.bundle.mmse_u = std::move(res.u);
    out.residuals = std::move(res.trace);
    auto& m = out.bundle.metrics;
    m.emplace_back("max_abs_err_mean", max_abs_diff(out.bundle.mmse_x, exact_mean));
    m.emplace_back("snr_db", snr_db(problem.truth, out.bundle.mmse_x));
    m.emplace_back("admm_iterations", static_cast<double>(res.iterations));
    m.emplace_back("admm_converged", res.converged ? 1.0 : 0.0);
    return out;
  }

  const SplitModel model = make_split(problem.likelihood(), problem.prior(), method, params);
  out.record = run_chain(model, params.t_mc, params.t_bi, ChainState::from_z(z0), rng,
                         run_options(params));
  out.bundle = summarize_chain(out.record, params);
  auto& m = out.bundle.metrics;
  m.emplace_back("max_abs_err_mean", max_abs_diff(out.bundle.mmse_x, exact_mean));
  const ImageField var = out.record.x.variance();
  m.emplace_back("mean_variance_ratio", mean(var) / exact_var[0]);
  m.emplace_back("snr_db", snr_db(problem.truth, out.bundle.mmse_x));
  if (out.bundle.ci_low)
    m.emplace_back("coverage", coverage({*out.bundle.ci_low, *out.bundle.ci_high}, problem.truth));
  add_chain_metrics(out.bundle, out.record, params);
  return out;
}

// --------------------------------------------------------------- replicates

std::vector<RunOutput> run_replicates(std::size_t count, std::size_t workers,
                                      const std::function<RunOutput(std::size_t)>& job) {
  std::vector<std::optional<RunOutput>> slots(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        slots[i] = job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<RunOutput> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<MetricSummary> aggregate_metrics(const std::vector<EstimateBundle>& bundles) {
  std::vector<MetricSummary> out;
  if (bundles.empty()) return out;
  for (const auto& [name, unused] : bundles.front().metrics) {
    (void)unused;
    double s = 0.0;
    for (const auto& b : bundles) s += b.metric(name);
    const double n = static_cast<double>(bundles.size());
    const double mu = s / n;
    double ss = 0.0;
    for (const auto& b : bundles) ss += (b.metric(name) - mu) * (b.metric(name) - mu);
    out.push_back({name, mu, bundles.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0});
  }
  return out;
}

}  // namespace splitgibbs
