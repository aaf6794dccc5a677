#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "splitgibbs/experiments.hpp"
#include "support.hpp"

using namespace splitgibbs;

namespace {

// x-marginal mean of exp(-f(x) - g(z) - |x - z|^2 / (2 c)) for quadratic f, g.
DenseVector split_marginal_mean(const DenseMatrix& qf, const DenseVector& bf, const DenseMatrix& qg,
                                double c) {
  const Eigen::Index n = qf.rows();
  DenseMatrix joint(2 * n, 2 * n);
  const DenseMatrix id = DenseMatrix::Identity(n, n) / c;
  joint << qf + id, -id, -id, qg + id;
  DenseVector rhs = DenseVector::Zero(2 * n);
  rhs.head(n) = bf;
  return joint.ldlt().solve(rhs).head(n);
}

// Per-pixel standard error of a chain mean from batch means over kept samples.
ImageField batch_standard_error(const std::vector<ImageField>& samples, std::size_t batches) {
  const std::size_t per = samples.size() / batches;
  ImageField se = ImageField::like(samples.front());
  for (std::size_t i = 0; i < se.size(); ++i) {
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
      for (std::size_t t = 0; t < per; ++t) means[b] += samples[b * per + t][i];
      means[b] /= static_cast<double>(per);
    }
    double m = 0.0, v = 0.0;
    for (double x : means) m += x;
    m /= static_cast<double>(batches);
    for (double x : means) v += (x - m) * (x - m);
    se[i] = std::sqrt(v / (batches - 1.0) / static_cast<double>(batches));
  }
  return se;
}

}  // namespace

TEST_CASE("Method names round-trip") {
  for (Method m : {Method::Sp, Method::Spa, Method::Pmyula, Method::Salsa})
    CHECK(parse_method(method_name(m)) == m);
  CHECK(method_name(Method::Pmyula) == "pmyula");
  CHECK_THROWS_AS(parse_method("gibbs"), std::invalid_argument);
}

TEST_CASE("Replicate streams do not collide") {
  std::set<std::uint64_t> ids;
  for (std::size_t r = 0; r < 50; ++r)
    for (StreamRole role : {StreamRole::Synthesis, StreamRole::Chain}) ids.insert(stream_id(r, role));
  CHECK(ids.size() == 100);
  CHECK(stream_id(0, StreamRole::Synthesis) == 0);
  CHECK(stream_id(0, StreamRole::Chain) == 1);
  CHECK(stream_id(3, StreamRole::Chain) == 7);
}

TEST_CASE("Phantom is deterministic and within the pixel range") {
  const ImageField a = phantom(40, 30), b = phantom(40, 30);
  CHECK(a == b);
  const auto [lo, hi] = std::minmax_element(a.values().begin(), a.values().end());
  CHECK(*lo >= 0.0);
  CHECK(*hi <= 255.0);
  CHECK(*hi > *lo);
}

TEST_CASE("Deconvolution data synthesis") {
  RandomStream rng(1);
  const ImageField truth = phantom(16, 16);
  SUBCASE("noiseless") {
    DeconvSettings s;
    s.noise = {0.35, 0.0, 0.0};
    const DeconvProblem p = synthesize_deconv(truth, s, rng);
    CHECK(p.y == p.h.apply(truth));
    CHECK_THROWS_AS(p.omega(), ParameterError);
  }
  SUBCASE("homoscedastic when the mixture weight is zero") {
    DeconvSettings s;
    s.noise = {0.0, 13.0, 40.0};
    const DeconvProblem p = synthesize_deconv(truth, s, rng);
    CHECK(p.sigma == ImageField(16, 16, 13.0));
    CHECK(p.omega().is_constant());
  }
  SUBCASE("invalid settings") {
    DeconvSettings s;
    s.noise.beta_mix = 1.5;
    CHECK_THROWS_AS(synthesize_deconv(truth, s, rng), ParameterError);
    s = DeconvSettings{};
    s.gamma = 0.0;
    CHECK_THROWS_AS(synthesize_deconv(truth, s, rng), ParameterError);
  }
}

TEST_CASE("Noise mixture fraction matches its weight") {
  RandomStream rng(2);
  const DeconvProblem p = synthesize_deconv(phantom(100, 100), DeconvSettings{}, rng);
  std::size_t high = 0;
  for (double s : p.sigma.values()) {
    CHECK((s == 13.0 || s == 40.0));
    high += s == 40.0;
  }
  const double frac = static_cast<double>(high) / 1e4;
  CHECK(std::abs(frac - 0.35) < 4.0 * std::sqrt(0.35 * 0.65 / 1e4));
}

TEST_CASE("Inpainting data synthesis") {
  RandomStream rng(3);
  const ImageField truth = phantom(64, 64);
  SUBCASE("everything kept, no noise") {
    const InpaintProblem p = synthesize_inpaint(truth, 1.0, kInfiniteDb, 0.2, rng);
    CHECK(p.y.size() == truth.size());
    CHECK(p.filled() == truth);
    CHECK(p.sigma2 > 0.0);
  }
  SUBCASE("reference configuration") {
    const InpaintProblem p = synthesize_inpaint(truth, 0.6, 40.0, 0.2, rng);
    CHECK(p.mask.kept_indices().size() == 2457);
    CHECK(std::is_sorted(p.mask.kept_indices().begin(), p.mask.kept_indices().end()));
    CHECK(std::adjacent_find(p.mask.kept_indices().begin(), p.mask.kept_indices().end()) ==
          p.mask.kept_indices().end());
    CHECK(std::abs(realized_snr_db(p) - 40.0) < 0.5);
    // sigma^2 = |H x|^2 / (M 10^(SNR/10)).
    const double power = squared_norm(p.mask.apply(truth)) / 2457.0;
    CHECK(p.sigma2 == doctest::Approx(power / 1e4));
  }
  SUBCASE("invalid settings") {
    CHECK_THROWS_AS(synthesize_inpaint(truth, 0.0, 40.0, 0.2, rng), ParameterError);
    CHECK_THROWS_AS(synthesize_inpaint(truth, 1.2, 40.0, 0.2, rng), ParameterError);
    CHECK_THROWS_AS(synthesize_inpaint(truth, 0.5, 40.0, -0.1, rng), ParameterError);
    CHECK_THROWS_AS(synthesize_inpaint(ImageField(4, 4), 0.5, 40.0, 0.2, rng), ParameterError);
  }
}

TEST_CASE("Deconvolution chain mean agrees with the dense split-model mean") {
  RandomStream rng(4);
  DeconvSettings s;
  s.blur_size = 3;
  s.blur_width = 0.8;
  const DeconvProblem p = synthesize_deconv(phantom(8, 8), s, rng);

  const DenseMatrix hd = densify(LinearOperator(p.h));
  const DenseMatrix ld = densify(LinearOperator(p.l));
  const DenseMatrix omega = to_vector(p.omega().diag()).asDiagonal();
  const double rho = 6.0;
  const DenseVector exact = split_marginal_mean(hd.transpose() * omega * hd,
                                                hd.transpose() * omega * to_vector(p.y),
                                                p.gamma * ld.transpose() * ld, rho * rho);

  RunParams params;
  params.rho = rho;
  params.t_mc = 40500;
  params.t_bi = 500;
  params.keep_samples = true;
  const RunOutput out = run_deconv(p, Method::Sp, params, rng);
  const ImageField se = batch_standard_error(out.record.kept_samples, 40);
  double worst = 0.0;
  for (std::size_t i = 0; i < se.size(); ++i)
    worst = std::max(worst, std::abs(out.bundle.mmse_x[i] - exact(static_cast<Eigen::Index>(i))) / se[i]);
  CHECK(worst < 4.0);
  CHECK(out.bundle.metric("kept_samples") == 40000.0);
  for (const char* name : {"snr_db", "psnr_db", "snr_z_db", "acf_lag1", "acf_lag10"})
    CHECK(std::isfinite(out.bundle.metric(name)));
}

TEST_CASE("Inpainting without TV leaves observed pixels centred on the data") {
  RandomStream rng(5);
  const InpaintProblem p = synthesize_inpaint(phantom(8, 8), 0.6, 30.0, 0.0, rng);
  RunParams params;
  params.rho = 2.0;
  params.t_mc = 20500;
  params.t_bi = 500;
  params.keep_samples = true;
  const RunOutput out = run_inpaint(p, Method::Sp, params, rng);
  const ImageField se = batch_standard_error(out.record.kept_samples, 40);
  const auto& kept = p.mask.kept_indices();
  double worst = 0.0;
  for (std::size_t j = 0; j < kept.size(); ++j)
    worst = std::max(worst, std::abs(out.bundle.mmse_x[kept[j]] - p.y[j]) / se[kept[j]]);
  CHECK(worst < 4.0);
}

TEST_CASE("Full mask at high SNR leaves little to restore") {
  RandomStream rng(6);
  const InpaintProblem p = synthesize_inpaint(phantom(16, 16), 1.0, 40.0, 0.2, rng);
  RunParams params;
  params.rho = 2.0;
  params.alpha = 1.0;
  params.t_mc = 600;
  params.t_bi = 200;
  const RunOutput out = run_inpaint(p, Method::Spa, params, rng);
  CHECK(std::abs(out.bundle.metric("isnr_db")) < 1.0);
}

TEST_CASE("Inpainting estimate lies inside its credibility band") {
  RandomStream rng(7);
  const InpaintProblem p = synthesize_inpaint(phantom(16, 16), 0.6, 40.0, 0.2, rng);
  RunParams params;
  params.rho = 2.8;
  params.alpha = 1.0;
  params.t_mc = 800;
  params.t_bi = 200;
  params.keep_samples = true;
  const RunOutput out = run_inpaint(p, Method::Spa, params, rng);
  REQUIRE(out.bundle.ci_low.has_value());
  for (std::size_t i = 0; i < out.bundle.mmse_x.size(); ++i) {
    CHECK((*out.bundle.ci_low)[i] <= out.bundle.mmse_x[i]);
    CHECK(out.bundle.mmse_x[i] <= (*out.bundle.ci_high)[i]);
  }
  CHECK(out.bundle.metric("isnr_db") > 0.0);
  const std::vector<std::string> expected{"isnr_db", "snr_db", "psnr_db", "isnr_z_db", "acf_lag1",
                                          "acf_lag10", "kept_samples", "final_neg_log_posterior"};
  REQUIRE(out.bundle.metrics.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(out.bundle.metrics[i].first == expected[i]);
}

TEST_CASE("SALSA inpainting is stable against a ten times longer run") {
  RandomStream rng(8);
  const InpaintProblem p = synthesize_inpaint(phantom(64, 64), 0.6, 40.0, 0.2, rng);
  RunParams params;
  params.rho = 2.8;
  RandomStream unused(0);
  const RunOutput base = run_inpaint(p, Method::Salsa, params, unused);
  RunParams longer = params;
  longer.admm_max_iters *= 10;
  longer.admm_tol /= 10.0;
  longer.admm_prox_iters *= 10;
  const RunOutput ref = run_inpaint(p, Method::Salsa, longer, unused);
  CHECK(std::abs(base.bundle.metric("isnr_db") - ref.bundle.metric("isnr_db")) < 0.1);
  CHECK(base.residuals.size() == static_cast<std::size_t>(base.bundle.metric("admm_iterations")));
}

TEST_CASE("Direct P-MYULA run") {
  RandomStream rng(9);
  const InpaintProblem p = synthesize_inpaint(phantom(16, 16), 0.6, 40.0, 0.2, rng);
  RunParams params;
  params.t_mc = 300;
  params.t_bi = 100;
  const RunOutput out = run_inpaint(p, Method::Pmyula, params, rng);
  CHECK(out.record.scalar_trace.size() == 300);
  CHECK(out.bundle.metric("kept_samples") == 200.0);
  CHECK(std::isfinite(out.bundle.metric("isnr_db")));
}

TEST_CASE("Gaussian check problem") {
  RandomStream rng(10);
  GaussianCheckSettings s;
  s.rows = s.cols = 8;
  s.blur_size = 3;
  const GaussianCheckProblem p = synthesize_gaussian_check(s, rng);

  const DenseMatrix hd = densify(LinearOperator(p.h));
  const DenseMatrix ld = densify(LinearOperator(p.l));
  const DenseMatrix q = hd.transpose() * hd / s.sigma2 + s.gamma * ld.transpose() * ld +
                        s.delta * DenseMatrix::Identity(64, 64);
  const DenseMatrix cov = q.inverse();
  const DenseVector mean = cov * hd.transpose() * to_vector(p.y) / s.sigma2;
  CHECK((to_vector(p.posterior_mean()) - mean).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(p.posterior_variance()[5] == doctest::Approx(cov(5, 5)).epsilon(1e-10));

  RunParams params;
  params.rho = 0.3;
  params.t_mc = 300;
  params.t_bi = 100;
  CHECK_THROWS_AS(run_gaussian_check(p, Method::Pmyula, params, rng), ParameterError);
  const RunOutput sp = run_gaussian_check(p, Method::Sp, params, rng);
  for (const char* name : {"max_abs_err_mean", "mean_variance_ratio", "snr_db", "coverage"})
    CHECK(std::isfinite(sp.bundle.metric(name)));
  CHECK_THROWS_AS(sp.bundle.metric("nope"), std::out_of_range);

  params.admm_tol = 1e-10;
  params.admm_max_iters = 20000;
  const RunOutput map = run_gaussian_check(p, Method::Salsa, params, rng);
  CHECK(map.bundle.metric("max_abs_err_mean") < 1e-6);

  GaussianCheckSettings bad = s;
  bad.delta = 0.0;
  CHECK_THROWS_AS(synthesize_gaussian_check(bad, rng), ParameterError);
}

TEST_CASE("Run parameter validation") {
  RandomStream rng(11);
  const InpaintProblem p = synthesize_inpaint(phantom(8, 8), 0.6, 40.0, 0.2, rng);
  RunParams params;
  params.t_mc = 20;
  params.t_bi = 5;
  RunParams bad = params;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(run_inpaint(p, Method::Spa, bad, rng), ParameterError);
  bad = params;
  bad.rho = 0.0;
  CHECK_THROWS_AS(run_inpaint(p, Method::Sp, bad, rng), ParameterError);
  bad = params;
  bad.t_bi = 20;
  CHECK_THROWS_AS(run_inpaint(p, Method::Sp, bad, rng), ParameterError);
  bad = params;
  bad.ci_level = 1.0;
  CHECK_THROWS_AS(run_inpaint(p, Method::Sp, bad, rng), ParameterError);
}

TEST_CASE("Replicates keep job order and aggregate metric-wise") {
  const auto job = [](std::size_t i) {
    RunOutput out;
    out.bundle.metrics = {{"a", double(i)}, {"b", 2.0}};
    return out;
  };
  const auto outs = run_replicates(5, 3, job);
  REQUIRE(outs.size() == 5);
  std::vector<EstimateBundle> bundles;
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(outs[i].bundle.metric("a") == double(i));
    bundles.push_back(outs[i].bundle);
  }
  const auto summary = aggregate_metrics(bundles);
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].name == "a");
  CHECK(summary[0].mean == doctest::Approx(2.0));
  CHECK(summary[0].std == doctest::Approx(std::sqrt(2.5)));
  CHECK(summary[1].std == 0.0);
  CHECK(aggregate_metrics({bundles[0]})[0].std == 0.0);

  const auto failing = [](std::size_t i) -> RunOutput {
    if (i == 2) throw std::runtime_error("boom");
    return RunOutput{};
  };
  CHECK_THROWS_AS(run_replicates(4, 2, failing), std::runtime_error);
}
