#include <catch_amalgamated.hpp>

#include <cmath>

#include "toposkit/matrix.hpp"

using namespace toposkit;

TEST_CASE("matmul basics") {
  Matrix m = Matrix::from_rows({{1, 2}, {3, 4}});
  CHECK(matmul(Matrix::identity(2), m) == m);

  Matrix ones = Matrix::from_rows({{1}, {1}});
  Matrix prod = matmul(m, ones);
  CHECK(prod(0, 0) == 3.0);
  CHECK(prod(1, 0) == 7.0);

  Matrix z = Matrix(2, 3);
  Matrix rhs(3, 1, {5.0, -1.0, 2.0});
  CHECK(matmul(z, rhs) == Matrix(2, 1));

  CHECK_THROWS_AS(matmul(m, Matrix(3, 3)), std::invalid_argument);
  CHECK_THROWS_WITH(matmul(m, Matrix(3, 3)), Catch::Matchers::ContainsSubstring("2x2") &&
                                                 Catch::Matchers::ContainsSubstring("3x3"));
}

TEST_CASE("matmul associativity on random conforming triples") {
  SplitRng rng = SplitRng(11).split("assoc");
  for (int t = 0; t < 30; ++t) {
    Matrix a = Matrix::random(3, 4, rng), b = Matrix::random(4, 2, rng),
           c = Matrix::random(2, 5, rng);
    Matrix lhs = matmul(matmul(a, b), c), rhs = matmul(a, matmul(b, c));
    CHECK(max_abs_diff(lhs, rhs) <= 1e-9 * std::max(1.0, max_abs(lhs)));
  }
}

TEST_CASE("softmax_columns closed forms") {
  Matrix sym = softmax_columns(Matrix(2, 1));
  CHECK(sym(0, 0) == 0.5);
  CHECK(sym(1, 0) == 0.5);

  Matrix logs(2, 1, {std::log(1.0), std::log(3.0)});
  Matrix s = softmax_columns(logs);
  CHECK(std::fabs(s(0, 0) - 0.25) < 1e-15);
  CHECK(std::fabs(s(1, 0) - 0.75) < 1e-15);

  Matrix big(2, 1, {1000.0, 1000.0});
  Matrix sb = softmax_columns(big);
  CHECK(sb(0, 0) == 0.5);
  CHECK(sb(1, 0) == 0.5);
}

TEST_CASE("softmax_columns properties") {
  SplitRng rng = SplitRng(11).split("softmax");
  for (int t = 0; t < 20; ++t) {
    Matrix x = Matrix::random(5, 3, rng, -40.0, 40.0);
    Matrix s = softmax_columns(x);
    for (std::size_t j = 0; j < s.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < s.rows(); ++i) {
        CHECK(s(i, j) > 0.0);
        sum += s(i, j);
      }
      CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
    Matrix shifted = x;
    for (std::size_t j = 0; j < x.cols(); ++j)
      for (std::size_t i = 0; i < x.rows(); ++i) shifted(i, j) += 7.5;
    CHECK(max_abs_diff(softmax_columns(shifted), s) <= 1e-12);
  }
}

TEST_CASE("relu") {
  CHECK(relu(Matrix::from_rows({{-1, 2}})) == Matrix::from_rows({{0, 2}}));
  CHECK(relu(Matrix(3, 2)) == Matrix(3, 2));
  CHECK(relu(Matrix::from_rows({{3}})) == Matrix::from_rows({{3}}));
}

TEST_CASE("permutations") {
  SplitRng rng = SplitRng(11).split("perm");
  Matrix x = Matrix::random(2, 3, rng);

  CHECK(apply_permutation(x, Permutation::identity(3)) == x);

  Permutation swap2({1, 0});
  Matrix y = Matrix::random(4, 2, rng);
  CHECK(apply_permutation(apply_permutation(y, swap2), swap2) == y);

  // Cycle 0 -> 1 -> 2 -> 0 against the explicit 0/1 permutation matrix.
  Permutation cycle({1, 2, 0});
  CHECK(apply_permutation(x, cycle) == matmul(x, cycle.to_matrix()));
  for (int t = 0; t < 20; ++t) {
    Permutation p = Permutation::random(6, rng);
    Matrix z = Matrix::random(3, 6, rng);
    CHECK(apply_permutation(z, p) == matmul(z, p.to_matrix()));
    CHECK(apply_permutation(apply_permutation(z, p), p.inverse()) == z);
  }

  CHECK_THROWS_AS(Permutation({0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(apply_permutation(x, Permutation::identity(5)), std::invalid_argument);
}

TEST_CASE("finite difference gradient") {
  auto square_fn = [](const std::vector<double>& x) { return x[0] * x[0]; };
  auto grad = finite_difference_gradient(square_fn, {3.0}, 1e-5);
  CHECK(std::fabs(grad[0] - 6.0) <= 1e-6);

  auto constant = [](const std::vector<double>&) { return 4.25; };
  for (double g : finite_difference_gradient(constant, {1.0, 2.0, 3.0}, 1e-5))
    CHECK(g == 0.0);

  auto prod = [](const std::vector<double>& x) { return x[0] * x[1]; };
  auto g2 = finite_difference_gradient(prod, {2.0, 5.0}, 1e-5);
  CHECK(std::fabs(g2[0] - 5.0) <= 1e-6);
  CHECK(std::fabs(g2[1] - 2.0) <= 1e-6);

  auto bad = [](const std::vector<double>& x) { return std::log(x[0]); };
  CHECK_THROWS_WITH(finite_difference_gradient(bad, {-1.0}, 1e-5),
                    Catch::Matchers::ContainsSubstring("coordinate 0"));
  CHECK_THROWS_AS(finite_difference_gradient(square_fn, {1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("fd gradient matches analytic gradient of random quadratics") {
  SplitRng rng = SplitRng(11).split("fdquad");
  for (int t = 0; t < 10; ++t) {
    std::size_t n = 5;
    Matrix q = Matrix::random(n, n, rng);
    std::vector<double> b(n), at(n);
    for (auto& v : b) v = rng.uniform(-1, 1);
    for (auto& v : at) v = rng.uniform(-1, 1);
    auto f = [&](const std::vector<double>& x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += b[i] * x[i];
        for (std::size_t j = 0; j < n; ++j) acc += 0.5 * x[i] * q(i, j) * x[j];
      }
      return acc;
    };
    auto grad = finite_difference_gradient(f, at, 1e-5);
    for (std::size_t i = 0; i < n; ++i) {
      double analytic = b[i];
      for (std::size_t j = 0; j < n; ++j) analytic += 0.5 * (q(i, j) + q(j, i)) * at[j];
      CHECK(std::fabs(grad[i] - analytic) <= 1e-6 * std::max(1.0, std::fabs(analytic)));
    }
  }
}

TEST_CASE("matrix text form round trips") {
  SplitRng rng = SplitRng(11).split("text");
  Matrix m = Matrix::random(3, 4, rng);
  m(1, 2) = 1.0 / 3.0;
  Matrix back = matrix_from_text(matrix_to_text(m));
  CHECK(back == m);  // exact: 17 significant digits round-trip doubles

  CHECK_THROWS_AS(matrix_from_text("2 2\n1 2 3"), std::invalid_argument);
  CHECK_THROWS_AS(Matrix(1, 1, {std::nan("")}), std::invalid_argument);
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
}
