#pragma once

// Command-line front end: parsing into a validated RunConfig and running it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitgibbs/experiments.hpp"

namespace splitgibbs {

/// Bad command line or config file; maps to exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Command { Deconv, Inpaint, GaussianCheck, AdmmSolve };

std::string_view command_name(Command c) noexcept;

struct RunConfig {
  Command command = Command::Inpaint;
  Method method = Method::Spa;
  std::uint64_t seed = 0;

  double rho = 1.0;
  double alpha = 1.0;
  std::size_t t_mc = 1000;
  std::size_t t_bi = 200;
  std::size_t prox_iters = 25;
  std::size_t thinning = 1;
  bool keep_samples = true;
  double ci_level = 0.9;
  std::size_t acf_lags = 50;

  // problem
  std::string image;  // empty: built-in phantom
  std::size_t rows = 64;
  std::size_t cols = 64;
  double gamma = 6e-3;
  double beta = 0.2;
  double keep = 0.6;
  double snr = 40.0;
  std::size_t blur_size = 9;
  double blur_width = 1.5;
  double mix_beta = 0.35;
  double kappa1 = 13.0;
  double kappa2 = 40.0;
  double delta = 0.05;
  double sigma = 0.5;
  std::string problem = "inpaint";  // admm-solve target

  // ADMM
  std::size_t max_iters = 3000;
  double tol = 1e-6;
  std::size_t admm_prox_iters = 50;

  // execution
  std::string out = "splitgibbs-out";
  std::size_t replicates = 1;
  std::size_t workers = 0;  // 0: hardware concurrency
  std::string kernels = "auto";
};

/// Thrown by parse_config for --help; what() is the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `args` excludes the program name. Values from --config are applied first
/// and overridden by explicit flags.
RunConfig parse_config(const std::vector<std::string>& args);

/// Runs a parsed configuration; writes reports under cfg.out.
void execute(const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// Full CLI: parse, execute, map errors to exit codes 0/1/2.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace splitgibbs
