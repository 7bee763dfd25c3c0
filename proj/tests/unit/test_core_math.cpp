#include "doctest.h"

#include "pbrnn/core_math.hpp"
#include "pbrnn/errors.hpp"

#include <cmath>
#include <numeric>

using namespace pbrnn;

TEST_SUITE("core_math") {

TEST_CASE("matvec") {
  CHECK(matvec(Matrix{{1, 0}, {0, 1}}, Vector{3, 4}) == Vector{3, 4});
  CHECK(matvec(Matrix{{1, 2}, {3, 4}}, Vector{1, 1}) == Vector{3, 7});
  CHECK_THROWS_AS(matvec(Matrix(2, 3), Vector{1, 1}), ShapeError);
}

TEST_CASE("matvec agrees with a naive loop on random 16x16 instances") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m(16, 16);
    for (double &x : m.span()) x = rng.uniform(-10, 10);
    Vector v = rng_uniform(rng, -10, 10, 16);
    Vector got = matvec(m, v);
    for (std::size_t i = 0; i < 16; ++i) {
      double ref = 0.0;
      for (std::size_t j = 0; j < 16; ++j) ref += m(i, j) * v[j];
      CHECK(std::abs(got[i] - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("transposed and outer kernels") {
  Matrix m{{1, 2, 3}, {4, 5, 6}};
  Vector out(3);
  matvec_transposed_accumulate(m, Vector{1, -1}, out.span());
  CHECK(out == Vector{-3, -3, -3});
  Matrix acc(2, 3);
  outer_accumulate(acc, Vector{1, 2}, Vector{1, 0, -1});
  CHECK(acc == Matrix{{1, 0, -1}, {2, 0, -2}});
  CHECK_THROWS_AS(outer_accumulate(acc, Vector{1}, Vector{1, 0, -1}), ShapeError);
}

TEST_CASE("sigmoid") {
  CHECK(sigmoid(Vector{0})[0] == 0.5);
  CHECK(sigmoid(Vector{1e3})[0] == doctest::Approx(1.0).epsilon(1e-12));
  Vector s = sigmoid(Vector{-1, 1});
  CHECK(s[0] == doctest::Approx(0.2689414213699951).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx(0.7310585786300049).epsilon(1e-14));
  for (double x : {-1e6, -745.0, 745.0, 1e6}) {
    const double y = sigmoid(x);
    CHECK(std::isfinite(y));
    CHECK(y >= 0.0);
    CHECK(y <= 1.0);
  }
}

TEST_CASE("tanh_vec") {
  CHECK(tanh_vec(Vector{0})[0] == 0.0);
  CHECK(tanh_vec(Vector{1e3})[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tanh_vec(Vector{0.5})[0] == doctest::Approx(0.46211715726000974).epsilon(1e-14));
  Vector big = tanh_vec(Vector{-1e6, 1e6});
  CHECK(big[0] == -1.0);
  CHECK(big[1] == 1.0);
}

TEST_CASE("softmax") {
  CHECK(softmax(Vector{0, 0}) == Vector{0.5, 0.5});
  for (double c : {-700.0, 0.0, 3.5, 700.0}) {
    Vector p = softmax(Vector{c, c, c});
    for (double x : p) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  Vector p = softmax(Vector{1, 2, 3});
  CHECK(p[0] == doctest::Approx(0.09003057317038046).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.24472847105479767).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.6652409557748219).epsilon(1e-12));
  CHECK_THROWS_AS(softmax(Vector{}), ShapeError);
}

TEST_CASE("softmax sums to one and keeps the argmax") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(1024);
    Vector v = rng_uniform(rng, -700, 700, n);
    Vector p = softmax(v);
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK(argmax(p) == argmax(v));
  }
}

TEST_CASE("elementwise") {
  CHECK(elementwise(Vector{1, 2}, Vector{0, 0}, ElementwiseOp::Mul) == Vector{0, 0});
  CHECK(elementwise(Vector{1, 2}, Vector{3, 4}, ElementwiseOp::Add) == Vector{4, 6});
  CHECK(elementwise(Vector{0.5, 0.25}, Vector{4, 8}, ElementwiseOp::Mul) == Vector{2, 2});
  CHECK_THROWS_AS(elementwise(Vector{1}, Vector{1, 2}, ElementwiseOp::Add), ShapeError);
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax(Vector{1, 3, 3, 0}) == 1);
  CHECK(argmax(Vector{0, 0, 0}) == 0);
}

TEST_CASE("rng_uniform") {
  Rng a(42), b(42);
  CHECK(rng_uniform(a, 0, 1, 100) == rng_uniform(b, 0, 1, 100));

  Rng rng(42);
  Vector v = rng_uniform(rng, 0, 1, 10000);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / 10000.0;
  CHECK(mean >= 0.47);
  CHECK(mean <= 0.53);
  for (double x : v) {
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK_THROWS_AS(rng_uniform(rng, 1, 0, 5), ArgumentError);
  CHECK_THROWS_AS(rng_uniform(rng, 1, 1, 5), ArgumentError);
}

TEST_CASE("derived seeds are distinct and stable") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("below stays in range") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7);
  CHECK_THROWS_AS(rng.below(0), ArgumentError);
}

}
