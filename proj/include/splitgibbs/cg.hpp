#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "splitgibbs/image_field.hpp"

namespace splitgibbs {

struct CgConfig {
  double tol = 1e-10;          // on ||A x - b|| / ||b||
  std::size_t max_iters = 1000;
};

struct CgResult {
  ImageField x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using SpdOperator = std::function<ImageField(const ImageField&)>;

/// Conjugate gradients for a symmetric positive definite operator. Starts
/// from `initial` when given, zero otherwise. Non-convergence is reported
/// through CgResult::converged, not thrown.
CgResult cg_solve(const SpdOperator& apply_a, const ImageField& b, const CgConfig& config,
                  const ImageField* initial = nullptr);

}  // namespace splitgibbs
