#include "splitgibbs/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <thread>

#include "splitgibbs/errors.hpp"
#include "splitgibbs/io.hpp"
#include "splitgibbs/kernels.hpp"

namespace splitgibbs {

namespace fs = std::filesystem;

std::string_view command_name(Command c) noexcept {
  switch (c) {
    case Command::Deconv: return "deconv";
    case Command::Inpaint: return "inpaint";
    case Command::GaussianCheck: return "gaussian-check";
    case Command::AdmmSolve: return "admm-solve";
  }
  return "?";
}

namespace {

// Options whose default depends on the command or the method.
struct Pending {
  std::string method;
  std::optional<double> rho, alpha, gamma;
  std::optional<std::size_t> t_mc, t_bi, rows, cols;
  bool no_samples = false;
};

struct Parser {
  CLI::App app{"Split and split-augmented Gibbs samplers for imaging inverse problems",
               "splitgibbs"};
  RunConfig cfg;
  Pending pending;

  void common(CLI::App* s, bool sampling) {
    s->add_option("--seed", cfg.seed, "RNG seed (required)")->required();
    s->add_option("--config", "key=value file; explicit flags take precedence");
    s->add_option("--out", cfg.out, "output directory");
    s->add_option("--rho", pending.rho, "splitting parameter rho");
    s->add_option("--replicates", cfg.replicates, "independent replicates")->check(CLI::PositiveNumber);
    s->add_option("--workers", cfg.workers, "worker threads (0: all cores)");
    s->add_option("--kernels", cfg.kernels, "kernel variant: auto, scalar, avx2, neon")
        ->group("")
        ->check(CLI::IsMember({"auto", "scalar", "avx2", "neon"}));
    if (!sampling) return;
    s->add_option("--method", pending.method, "sp, spa, pmyula or salsa");
    s->add_option("--alpha", pending.alpha, "augmentation parameter alpha (SPA)");
    s->add_option("--t-mc", pending.t_mc, "total sweeps");
    s->add_option("--t-bi", pending.t_bi, "burn-in sweeps");
    s->add_option("--prox-iters", cfg.prox_iters, "Chambolle iterations per MYULA move");
    s->add_option("--thinning", cfg.thinning, "keep every k-th post-burn-in sample");
    s->add_flag("--no-samples", pending.no_samples, "do not keep samples (no credibility bounds)");
    s->add_option("--ci-level", cfg.ci_level, "credibility level");
    s->add_option("--acf-lags", cfg.acf_lags, "lags written to acf.csv");
  }
  void lattice(CLI::App* s, bool image) {
    if (image) s->add_option("--image", cfg.image, "input image (PGM P5 or raw); default phantom");
    s->add_option("--rows", pending.rows, "lattice rows when no image is given");
    s->add_option("--cols", pending.cols, "lattice cols when no image is given");
  }
  void blur(CLI::App* s) {
    s->add_option("--blur-size", cfg.blur_size, "odd Gaussian blur support");
    s->add_option("--blur-width", cfg.blur_width, "Gaussian blur standard deviation (pixels)");
  }
  void inpaint_data(CLI::App* s) {
    s->add_option("--beta", cfg.beta, "TV weight");
    s->add_option("--keep", cfg.keep, "fraction of observed pixels");
    s->add_option("--snr", cfg.snr, "observation SNR in dB");
  }
  void admm(CLI::App* s) {
    s->add_option("--max-iters", cfg.max_iters, "ADMM iteration cap");
    s->add_option("--tol", cfg.tol, "ADMM relative residual tolerance");
    s->add_option("--admm-prox-iters", cfg.admm_prox_iters, "Chambolle iterations per ADMM step");
  }
  void gaussian(CLI::App* s) {
    s->add_option("--gamma", pending.gamma, "prior weight on |L x|^2");
    s->add_option("--delta", cfg.delta, "prior weight on |x|^2");
    s->add_option("--sigma", cfg.sigma, "noise standard deviation");
    blur(s);
  }

  Parser() {
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    auto* d = app.add_subcommand("deconv", "deblurring with a smooth prior (SP/SPA)");
    common(d, true);
    lattice(d, true);
    blur(d);
    d->add_option("--gamma", pending.gamma, "prior weight on |L x|^2");
    d->add_option("--mix-beta", cfg.mix_beta, "probability of the large noise level");
    d->add_option("--kappa1", cfg.kappa1, "small noise standard deviation");
    d->add_option("--kappa2", cfg.kappa2, "large noise standard deviation");

    auto* i = app.add_subcommand("inpaint", "TV inpainting (SP, SPA, P-MYULA, SALSA)");
    common(i, true);
    lattice(i, true);
    inpaint_data(i);
    admm(i);

    auto* g = app.add_subcommand("gaussian-check", "fully Gaussian model with exact posterior");
    common(g, true);
    lattice(g, false);
    gaussian(g);
    admm(g);

    auto* a = app.add_subcommand("admm-solve", "MAP estimate by ADMM");
    common(a, false);
    lattice(a, true);
    a->add_option("--problem", cfg.problem, "inpaint or gaussian")
        ->check(CLI::IsMember({"inpaint", "gaussian"}));
    inpaint_data(a);
    admm(a);
    gaussian(a);
  }
};

std::string arg_key(const std::string& a) {
  const auto eq = a.find('=');
  return eq == std::string::npos ? a : a.substr(0, eq);
}

template <class T>
void require(bool ok, const char* field, const T& detail) {
  if (!ok) throw UsageError(std::string("invalid --") + field + ": " + detail);
}

void resolve(RunConfig& c, const Pending& p, const std::string& command) {
  if (command == "deconv") c.command = Command::Deconv;
  else if (command == "inpaint") c.command = Command::Inpaint;
  else if (command == "gaussian-check") c.command = Command::GaussianCheck;
  else c.command = Command::AdmmSolve;

  if (c.command == Command::AdmmSolve) {
    c.method = Method::Salsa;
  } else if (!p.method.empty()) {
    try {
      c.method = parse_method(p.method);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("invalid --method: ") + e.what());
    }
  } else {
    c.method = Method::Spa;
  }
  if (c.command == Command::Deconv && c.method != Method::Sp && c.method != Method::Spa)
    throw UsageError("invalid --method: deconv supports sp and spa");
  if (c.command == Command::GaussianCheck && c.method == Method::Pmyula)
    throw UsageError("invalid --method: gaussian-check supports sp, spa and salsa");

  const bool gaussian = c.command == Command::GaussianCheck ||
                        (c.command == Command::AdmmSolve && c.problem == "gaussian");
  double rho = 1.0;
  switch (c.command) {
    case Command::Deconv: rho = 20.0; break;
    case Command::Inpaint: rho = c.method == Method::Sp ? 2.0 : 2.8; break;
    case Command::GaussianCheck: rho = c.method == Method::Salsa ? 1.0 : 0.1; break;
    case Command::AdmmSolve: rho = gaussian ? 1.0 : 2.8; break;
  }
  c.rho = p.rho.value_or(rho);
  c.alpha = p.alpha.value_or(c.command == Command::GaussianCheck ? 0.1 : 1.0);
  c.gamma = p.gamma.value_or(gaussian ? 0.5 : 6e-3);
  c.rows = p.rows.value_or(gaussian ? 32 : 64);
  c.cols = p.cols.value_or(gaussian ? 32 : 64);
  c.keep_samples = !p.no_samples;

  std::size_t t_mc = 1000, t_bi = 200;
  if (c.method == Method::Pmyula) t_mc = 20000, t_bi = 19040;
  if (c.command == Command::GaussianCheck) t_mc = 20000, t_bi = 2000;
  if (p.t_mc && !p.t_bi && *p.t_mc <= t_bi) t_bi = *p.t_mc / 5;
  c.t_mc = p.t_mc.value_or(t_mc);
  c.t_bi = p.t_bi.value_or(t_bi);

  require(c.rho > 0.0 && std::isfinite(c.rho), "rho", "must be positive");
  require(c.alpha >= 0.0 && std::isfinite(c.alpha), "alpha", "must be >= 0");
  if (c.method == Method::Spa) require(c.alpha > 0.0, "alpha", "SPA needs alpha > 0");
  if (c.method != Method::Salsa) {
    require(c.t_mc >= 1, "t-mc", "must be >= 1");
    require(c.t_bi < c.t_mc, "t-bi",
            "burn-in (" + std::to_string(c.t_bi) + ") must be smaller than t-mc (" +
                std::to_string(c.t_mc) + ")");
  }
  require(c.prox_iters >= 1, "prox-iters", "must be >= 1");
  require(c.thinning >= 1, "thinning", "must be >= 1");
  require(c.ci_level > 0.0 && c.ci_level < 1.0, "ci-level", "must be in (0, 1)");
  require(c.rows >= 1 && c.cols >= 1, "rows", "lattice must be nonempty");
  require(c.gamma > 0.0, "gamma", "must be positive");
  require(c.beta >= 0.0, "beta", "must be >= 0");
  require(c.keep > 0.0 && c.keep <= 1.0, "keep", "must be in (0, 1]");
  require(!std::isnan(c.snr), "snr", "must be a number");
  require(c.blur_size % 2 == 1, "blur-size", "must be odd");
  require(c.blur_width > 0.0, "blur-width", "must be positive");
  require(c.mix_beta >= 0.0 && c.mix_beta <= 1.0, "mix-beta", "must be in [0, 1]");
  require(c.kappa1 > 0.0 && c.kappa2 > 0.0, "kappa1", "noise levels must be positive");
  require(c.delta > 0.0, "delta", "must be positive");
  require(c.sigma > 0.0, "sigma", "must be positive");
  require(c.max_iters >= 1, "max-iters", "must be >= 1");
  require(c.tol > 0.0, "tol", "must be positive");
  require(c.admm_prox_iters >= 1, "admm-prox-iters", "must be >= 1");
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
  Parser parser;
  if (args.empty()) throw UsageError("missing command\n" + parser.app.help());
  if (args[0] == "--help" || args[0] == "-h") throw HelpRequested(parser.app.help());

  CLI::App* sub = nullptr;
  for (CLI::App* s : parser.app.get_subcommands({}))
    if (s->get_name() == args[0]) sub = s;
  if (!sub) throw UsageError("unknown command '" + args[0] + "'\n" + parser.app.help());

  // --config values go first so that explicit flags, parsed later, win.
  std::vector<std::string> merged{args[0]};
  std::vector<std::string> rest;
  for (std::size_t k = 1; k < args.size(); ++k) {
    const std::string& a = args[k];
    std::string path;
    if (a == "--config") {
      if (k + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++k];
    } else if (arg_key(a) == "--config") {
      path = a.substr(std::string("--config=").size());
    } else {
      rest.push_back(a);
      continue;
    }
    std::map<std::string, std::string> kv;
    try {
      kv = read_key_values(path);
    } catch (const std::exception& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
    for (const auto& [key, value] : kv) {
      if (key == "config" || !sub->get_option_no_throw("--" + key))
        throw UsageError("config " + path + ": unknown key '" + key + "' for " + args[0]);
      merged.push_back("--" + key + "=" + value);
    }
  }
  merged.insert(merged.end(), rest.begin(), rest.end());

  std::vector<const char*> argv{"splitgibbs"};
  for (const auto& m : merged) argv.push_back(m.c_str());
  try {
    parser.app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(sub->help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  resolve(parser.cfg, parser.pending, args[0]);
  return parser.cfg;
}

// ------------------------------------------------------------------ execute

namespace {

bool verbose() {
  const char* v = std::getenv("SPLITGIBBS_VERBOSE");
  return v && *v && std::string(v) != "0";
}

RunParams run_params(const RunConfig& c) {
  RunParams p;
  p.rho = c.rho;
  p.alpha = c.alpha;
  p.t_mc = c.t_mc;
  p.t_bi = c.t_bi;
  p.prox_iters = c.prox_iters;
  p.thinning = c.thinning;
  p.keep_samples = c.keep_samples;
  p.ci_level = c.ci_level;
  p.acf_lags = c.acf_lags;
  p.admm_max_iters = c.max_iters;
  p.admm_tol = c.tol;
  p.admm_prox_iters = c.admm_prox_iters;
  return p;
}

ImageField load_truth(const RunConfig& c) {
  if (c.image.empty()) return phantom(c.rows, c.cols);
  return read_image(c.image);
}

GaussianCheckSettings gaussian_settings(const RunConfig& c) {
  GaussianCheckSettings s;
  s.rows = c.rows;
  s.cols = c.cols;
  s.blur_size = c.blur_size;
  s.blur_width = c.blur_width;
  s.gamma = c.gamma;
  s.delta = c.delta;
  s.sigma2 = c.sigma * c.sigma;
  return s;
}

// One replicate: synthesize data from its own stream, run, write the report.
RunOutput run_one(const RunConfig& c, const ImageField& truth, std::size_t r, const fs::path& dir) {
  RandomStream synth(c.seed, stream_id(r, StreamRole::Synthesis));
  RandomStream chain(c.seed, stream_id(r, StreamRole::Chain));
  const RunParams params = run_params(c);
  fs::create_directories(dir);

  RunOutput out;
  const bool gaussian = c.command == Command::GaussianCheck ||
                        (c.command == Command::AdmmSolve && c.problem == "gaussian");
  if (c.command == Command::Deconv) {
    DeconvSettings s;
    s.blur_size = c.blur_size;
    s.blur_width = c.blur_width;
    s.gamma = c.gamma;
    s.noise = NoiseMixture{c.mix_beta, c.kappa1, c.kappa2};
    const DeconvProblem problem = synthesize_deconv(truth, s, synth);
    write_pgm(dir / "observation.pgm", problem.y);
    out = run_deconv(problem, c.method, params, chain);
  } else if (gaussian) {
    const GaussianCheckProblem problem = synthesize_gaussian_check(gaussian_settings(c), synth);
    write_raw(dir / "truth.raw", problem.truth);
    write_raw(dir / "posterior_mean.raw", problem.posterior_mean());
    out = run_gaussian_check(problem, c.method, params, chain);
  } else {
    const InpaintProblem problem = synthesize_inpaint(truth, c.keep, c.snr, c.beta, synth);
    write_pgm(dir / "observation.pgm", problem.filled());
    out = run_inpaint(problem, c.method, params, chain);
  }
  write_report(out.bundle, out.record, dir, ReportOptions{c.t_bi, c.acf_lags, true});
  if (!out.residuals.empty()) write_residuals(out.residuals, dir / "residuals.csv");
  return out;
}

}  // namespace

void execute(const RunConfig& c, std::ostream& out, std::ostream& log) {
  if (c.kernels != "auto") {
    const kernels::Isa isa = c.kernels == "scalar" ? kernels::Isa::Scalar
                             : c.kernels == "avx2" ? kernels::Isa::Avx2
                                                   : kernels::Isa::Neon;
    kernels::select_isa(isa);
  }
  const bool chatty = verbose();
  const ImageField truth = c.command == Command::GaussianCheck ? ImageField(1, 1) : load_truth(c);
  const fs::path root(c.out);
  fs::create_directories(root);

  const std::size_t workers =
      c.workers ? c.workers : std::max(1u, std::thread::hardware_concurrency());
  if (chatty)
    log << command_name(c.command) << " method=" << method_name(c.method) << " seed=" << c.seed
        << " replicates=" << c.replicates << " kernels=" << kernels::isa_name(kernels::active_isa())
        << "\n";

  auto results = run_replicates(c.replicates, workers, [&](std::size_t r) {
    char name[32];
    std::snprintf(name, sizeof name, "rep_%03zu", r);
    const fs::path dir = c.replicates == 1 ? root : root / name;
    const auto t0 = std::chrono::steady_clock::now();
    RunOutput o = run_one(c, truth, r, dir);
    if (chatty) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      log << "replicate " << r << " done in " << dt.count() << " s\n";
    }
    return o;
  });

  std::vector<EstimateBundle> bundles;
  bundles.reserve(results.size());
  for (auto& r : results) bundles.push_back(std::move(r.bundle));
  const auto summary = aggregate_metrics(bundles);
  write_aggregate(summary, root / "aggregate.csv");
  for (const auto& s : summary) {
    out << s.name << " = " << format_number(s.mean);
    if (c.replicates > 1) out << " (std " << format_number(s.std) << ")";
    out << "\n";
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }
  try {
    execute(cfg, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace splitgibbs
