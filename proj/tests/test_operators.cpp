#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "splitgibbs/gaussian.hpp"
#include "splitgibbs/operators.hpp"
#include "support.hpp"

using namespace splitgibbs;
using sgtest::random_field;

namespace {

using sgtest::circulant_matrix;
using sgtest::gradient_matrix;

double max_abs(const DenseVector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("delta kernel circulant is the identity") {
  ImageField delta(4, 5);
  delta(0, 0) = 1.0;
  const auto op = CirculantOperator::from_shifted_kernel(delta);
  RandomStream rng(1);
  const ImageField x = random_field(4, 5, rng);
  CHECK(max_abs_diff(op.apply(x), x) < 1e-14);
  CHECK(max_abs_diff(op.adjoint(x), x) < 1e-14);
}

TEST_CASE("two-point circulant: eigenvalues (a+b, a-b) and impulse response (a, b)") {
  const double a = 0.7, b = -2.5;
  const auto op = CirculantOperator::from_shifted_kernel(ImageField(2, 1, {a, b}));
  REQUIRE(op.eigenvalues().size() == 2);
  CHECK(op.eigenvalues()[0].real() == doctest::Approx(a + b));
  CHECK(op.eigenvalues()[1].real() == doctest::Approx(a - b));
  CHECK(std::abs(op.eigenvalues()[1].imag()) < 1e-15);
  const ImageField y = op.apply(ImageField(2, 1, {1.0, 0.0}));
  CHECK(y[0] == doctest::Approx(a));
  CHECK(y[1] == doctest::Approx(b));
}

TEST_CASE("circulant apply and adjoint against the dense convolution matrix") {
  RandomStream rng(2);
  for (auto [R, C] : {std::pair<std::size_t, std::size_t>{4, 4}, {3, 5}, {8, 2}}) {
    const ImageField kernel = random_field(R, C, rng);
    const auto op = CirculantOperator::from_shifted_kernel(kernel);
    const DenseMatrix K = circulant_matrix(kernel);
    const ImageField x = random_field(R, C, rng);
    CHECK(max_abs(to_vector(op.apply(x)) - K * to_vector(x)) < 1e-10);
    CHECK(max_abs(to_vector(op.adjoint(x)) - K.transpose() * to_vector(x)) < 1e-10);
    const ImageField y = random_field(R, C, rng);
    CHECK(dot(op.apply(x), y) == doctest::Approx(dot(x, op.adjoint(y))).epsilon(1e-12));
  }
}

TEST_CASE("adjoint eigenvalues are conjugates: the flipped kernel realizes the adjoint") {
  RandomStream rng(3);
  const std::size_t R = 4, C = 6;
  const ImageField kernel = random_field(R, C, rng);
  ImageField flipped(R, C);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) flipped((R - r) % R, (C - c) % C) = kernel(r, c);
  const auto op = CirculantOperator::from_shifted_kernel(kernel);
  const auto adj = CirculantOperator::from_shifted_kernel(flipped);
  for (std::size_t i = 0; i < R * C; ++i)
    CHECK(std::abs(adj.eigenvalues()[i] - std::conj(op.eigenvalues()[i])) < 1e-12);
  const ImageField y = random_field(R, C, rng);
  CHECK(max_abs_diff(adj.apply(y), op.adjoint(y)) < 1e-12);
}

TEST_CASE("symmetric stencils give self-adjoint operators") {
  const auto lap = CirculantOperator::from_stencil(laplacian_stencil(), 6, 7);
  const auto blur = CirculantOperator::from_stencil(gaussian_stencil(5, 1.0), 6, 7);
  RandomStream rng(4);
  const ImageField x = random_field(6, 7, rng);
  CHECK(max_abs_diff(lap.apply(x), lap.adjoint(x)) < 1e-12);
  CHECK(max_abs_diff(blur.apply(x), blur.adjoint(x)) < 1e-12);
  CHECK(max_abs_diff(lap.apply(ImageField(6, 7, 3.0)), ImageField(6, 7, 0.0)) < 1e-12);
  for (const auto& e : lap.eigenvalues()) CHECK(std::abs(e.imag()) < 1e-12);
}

TEST_CASE("stencil placement: impulse response reproduces the stencil around the origin") {
  ImageField stencil(3, 3, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto op = CirculantOperator::from_stencil(stencil, 5, 5);
  ImageField impulse(5, 5);
  impulse(2, 2) = 1.0;
  const ImageField y = op.apply(impulse);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) CHECK(y(1 + a, 1 + b) == doctest::Approx(stencil(a, b)));
}

TEST_CASE("stencil helpers") {
  const ImageField g = gaussian_stencil(9, 1.5);
  CHECK(sum(g) == doctest::Approx(1.0));
  for (std::size_t r = 0; r < 9; ++r)
    for (std::size_t c = 0; c < 9; ++c) {
      CHECK(g(r, c) == doctest::Approx(g(8 - r, c)));
      CHECK(g(r, c) == doctest::Approx(g(c, r)));
    }
  const ImageField l = laplacian_stencil();
  CHECK(l == ImageField(3, 3, std::vector<double>{0, 1, 0, 1, -4, 1, 0, 1, 0}));
}

TEST_CASE("circulant apply is translation-equivariant") {
  RandomStream rng(5);
  const std::size_t R = 6, C = 5;
  const auto op = CirculantOperator::from_shifted_kernel(random_field(R, C, rng));
  const ImageField x = random_field(R, C, rng);
  auto shift = [&](const ImageField& f) {
    ImageField s(R, C);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) s((r + 1) % R, (c + 2) % C) = f(r, c);
    return s;
  };
  CHECK(max_abs_diff(op.apply(shift(x)), shift(op.apply(x))) < 1e-12);
}

TEST_CASE("mask operator") {
  const Shape lattice{3, 3};
  SUBCASE("keeping every index is the identity") {
    MaskOperator all(lattice, {0, 1, 2, 3, 4, 5, 6, 7, 8});
    RandomStream rng(6);
    const ImageField x = random_field(3, 3, rng);
    CHECK(all.apply(x).values().size() == 9);
    for (std::size_t i = 0; i < 9; ++i) CHECK(all.apply(x)[i] == x[i]);
    CHECK(all.adjoint(all.apply(x)) == x);
  }
  SUBCASE("adjoint zero-fills dropped pixels and apply(adjoint) is exact") {
    MaskOperator m(lattice, {1, 4, 8});
    const ImageField y(3, 1, {7.0, -2.0, 0.5});
    const ImageField up = m.adjoint(y);
    CHECK(up == ImageField(3, 3, std::vector<double>{0, 7, 0, 0, -2, 0, 0, 0, 0.5}));
    CHECK(m.apply(up) == y);
    CHECK(m.gram_diagonal() == ImageField(3, 3, std::vector<double>{0, 1, 0, 0, 1, 0, 0, 0, 1}));
  }
  SUBCASE("invalid index lists are rejected") {
    CHECK_THROWS_AS(MaskOperator(lattice, {}), DimensionError);
    CHECK_THROWS_AS(MaskOperator(lattice, {2, 1}), DimensionError);
    CHECK_THROWS_AS(MaskOperator(lattice, {3, 3}), DimensionError);
    CHECK_THROWS_AS(MaskOperator(lattice, {9}), DimensionError);
  }
}

TEST_CASE("gradient: hand example, constants and Neumann edges") {
  const GradientField g = gradient(ImageField(2, 2, std::vector<double>{0, 1, 0, 1}));
  CHECK(g.horizontal == ImageField(2, 2, std::vector<double>{1, 0, 1, 0}));
  CHECK(g.vertical == ImageField(2, 2, std::vector<double>{0, 0, 0, 0}));

  const GradientField flat = gradient(ImageField(4, 3, 2.5));
  CHECK(flat.horizontal == ImageField(4, 3, 0.0));
  CHECK(flat.vertical == ImageField(4, 3, 0.0));
}

TEST_CASE("divergence is the exact negative adjoint of the gradient") {
  RandomStream rng(7);
  const ImageField x = random_field(3, 3, rng);
  const GradientField p{random_field(3, 3, rng), random_field(3, 3, rng)};
  const GradientField gx = gradient(x);
  const double lhs = dot(gx.horizontal, p.horizontal) + dot(gx.vertical, p.vertical);
  const double rhs = -dot(x, divergence(p));
  CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("gradient operator against the dense finite-difference matrix") {
  RandomStream rng(8);
  for (auto [R, C] : {std::pair<std::size_t, std::size_t>{3, 3}, {4, 5}, {1, 6}, {6, 1}}) {
    const GradientOperator op({R, C});
    const DenseMatrix D = gradient_matrix(R, C);
    const ImageField x = random_field(R, C, rng);
    const ImageField y = random_field(2 * R, C, rng);
    CHECK(op.output_shape() == Shape{2 * R, C});
    CHECK(max_abs(to_vector(op.apply(x)) - D * to_vector(x)) < 1e-12);
    CHECK(max_abs(to_vector(op.adjoint(y)) - D.transpose() * to_vector(y)) < 1e-12);
    const GradientField parts = op.unstack(y);
    CHECK(op.stack(parts) == y);
  }
}

TEST_CASE("variant dispatch and shape checks") {
  RandomStream rng(9);
  const LinearOperator ops[] = {
      IdentityOperator({3, 4}),
      CirculantOperator::from_shifted_kernel(random_field(3, 4, rng)),
      MaskOperator({3, 4}, {0, 5, 11}),
      DiagonalOperator(random_field(3, 4, rng)),
      GradientOperator({3, 4}),
  };
  for (const auto& op : ops) {
    const ImageField x = random_field(3, 4, rng);
    const Shape out = output_shape(op);
    const ImageField y = random_field(out.rows, out.cols, rng);
    CHECK(input_shape(op) == Shape{3, 4});
    CHECK(dot(splitgibbs::apply(op, x), y) ==
          doctest::Approx(dot(x, adjoint_apply(op, y))).epsilon(1e-12));
    CHECK_THROWS_AS(splitgibbs::apply(op, ImageField(4, 3)), DimensionError);
  }
}
