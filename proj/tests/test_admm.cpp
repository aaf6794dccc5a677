#include <cmath>

#include "doctest.h"
#include "splitgibbs/admm.hpp"
#include "support.hpp"

using namespace splitgibbs;
using sgtest::circulant_matrix;
using sgtest::random_field;

namespace {

constexpr std::size_t kSide = 8;
constexpr Shape kShape{kSide, kSide};
constexpr Eigen::Index kN = 64;

ImageField shifted_box() {
  ImageField k(kSide, kSide);
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc)
      k((dr + static_cast<int>(kSide)) % kSide, (dc + static_cast<int>(kSide)) % kSide) = 1.0 / 9.0;
  return k;
}

ImageField shifted_laplacian() {
  ImageField k(kSide, kSide);
  k(0, 0) = -4.0;
  k(0, 1) = k(0, kSide - 1) = k(1, 0) = k(kSide - 1, 0) = 1.0;
  return k;
}

}  // namespace

TEST_CASE("Scalar quadratic pair converges to y / (1 + lambda)") {
  const double y = 1.0, lambda = 1.0;
  const XMinimizer f_min = [&](const ImageField& a, double rho2) {
    ImageField x = a;
    x[0] = (y + a[0] / rho2) / (1.0 + 1.0 / rho2);
    return x;
  };
  const ZProx g_prox = [&](const ImageField& v, double rho2) {
    ImageField z = v;
    z[0] = v[0] / (1.0 + lambda * rho2);
    return z;
  };
  const AdmmResult res = admm_solve(f_min, g_prox, AdmmConfig{0.7, 5000, 1e-12, 1e-12},
                                    AdmmInit{ImageField(1, 1), {}});
  REQUIRE(res.converged);
  CHECK(std::abs(res.x[0] - 0.5) < 1e-8);
  CHECK(std::abs(res.z[0] - 0.5) < 1e-8);
  CHECK(res.trace.size() == res.iterations);
  for (std::size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].primal <= res.trace[i - 1].primal + 1e-15);
}

TEST_CASE("Zero regularizer leaves the minimizer of f") {
  RandomStream rng(1);
  const ImageField y = random_field(3, 3, rng);
  const XMinimizer f_min = [&](const ImageField& a, double rho2) {
    ImageField x = a;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (y[i] + a[i] / rho2) / (1.0 + 1.0 / rho2);
    return x;
  };
  const ZProx id = [](const ImageField& v, double) { return v; };
  const AdmmResult res = admm_solve(f_min, id, AdmmConfig{1.0, 2000, 1e-10, 1e-10}, AdmmInit{ImageField(3, 3), {}});
  REQUIRE(res.converged);
  CHECK(max_abs_diff(res.x, y) < 1e-8);
  CHECK(res.trace.back().primal <= 1e-10);
}

TEST_CASE("Gaussian split model: ADMM fixed point is the MAP and the conditional modes") {
  RandomStream rng(2);
  const double s2 = 0.3, gamma = 0.05, eps = 1e-3, rho2 = 0.4;
  const auto h = CirculantOperator::from_shifted_kernel(shifted_box());
  const auto l = CirculantOperator::from_shifted_kernel(shifted_laplacian());
  const ImageField y = random_field(kSide, kSide, rng);
  SplitModel model;
  model.f = make_quadratic_potential("f", PrecisionStructure{kShape, {{1.0 / s2, h}}, {}, {}, 0.0},
                                     (1.0 / s2) * h.adjoint(y));
  model.g = make_quadratic_potential("g", PrecisionStructure{kShape, {{gamma, l}}, {}, {}, eps},
                                     ImageField(kSide, kSide));
  model.rho2 = rho2;
  model.alpha2 = 1.0;

  const DenseMatrix hd = circulant_matrix(shifted_box());
  const DenseMatrix ld = circulant_matrix(shifted_laplacian());
  const DenseMatrix q = hd.transpose() * hd / s2 + gamma * ld.transpose() * ld +
                        eps * DenseMatrix::Identity(kN, kN);
  const DenseVector map = q.ldlt().solve(hd.transpose() * to_vector(y) / s2);

  const AdmmResult res = admm_solve(model, AdmmConfig{rho2, 20000, 1e-12, 1e-12},
                                    AdmmInit{ImageField(kSide, kSide), {}});
  REQUIRE(res.converged);
  CHECK((to_vector(res.x) - map).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((to_vector(res.z) - map).cwiseAbs().maxCoeff() < 1e-8);
  // x = mode of x | z - u, z = mode of z | x + u.
  CHECK(max_abs_diff(conditional_mode(model.f, res.z - res.u, rho2), res.x) < 1e-8);
  CHECK(max_abs_diff(conditional_mode(model.g, res.x + res.u, rho2), res.z) < 1e-8);
}

TEST_CASE("ADMM configuration errors") {
  const ZProx id = [](const ImageField& v, double) { return v; };
  const AdmmInit init{ImageField(2, 2), {}};
  CHECK_THROWS_AS(admm_solve(id, id, AdmmConfig{0.0}, init), ParameterError);
  CHECK_THROWS_AS(admm_solve(id, id, AdmmConfig{1.0, 0}, init), ParameterError);
  CHECK_THROWS_AS(admm_solve(id, id, AdmmConfig{1.0, 10, 0.0, 1e-6}, init), ParameterError);
  CHECK_THROWS_AS(admm_solve(XMinimizer{}, id, AdmmConfig{}, init), ConfigurationError);
  CHECK_THROWS_AS(admm_solve(id, id, AdmmConfig{}, AdmmInit{ImageField(2, 2), ImageField(3, 3)}),
                  DimensionError);
}

TEST_CASE("Iteration cap reports non-convergence") {
  const XMinimizer f_min = [](const ImageField& a, double rho2) {
    ImageField x = a;
    x[0] = (1.0 + a[0] / rho2) / (1.0 + 1.0 / rho2);
    return x;
  };
  const ZProx g_prox = [](const ImageField& v, double rho2) { return (1.0 / (1.0 + rho2)) * v; };
  const AdmmResult res = admm_solve(f_min, g_prox, AdmmConfig{1.0, 3, 1e-14, 1e-14}, AdmmInit{ImageField(1, 1), {}});
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 3);
}
