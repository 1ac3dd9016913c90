#include "helpers.hpp"

#include "stct/errors.hpp"
#include "stct/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace stct;
using namespace stct::numerics;

TEST_CASE("ridge_solve with identity design returns the targets") {
  Rng rng(1);
  const Matrix b = testing::random_matrix(4, 2, rng);
  CHECK(testing::max_abs_diff(ridge_solve(Matrix::Identity(4, 4), b, 0.0), b) < 1e-14);
}

TEST_CASE("ridge_solve of zero targets is zero") {
  Rng rng(2);
  const Matrix a = testing::random_matrix(7, 3, rng);
  CHECK(ridge_solve(a, Matrix::Zero(7, 2), 0.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ridge_solve satisfies the normal equations") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = testing::random_matrix(12, 4, rng);
    const Matrix b = testing::random_matrix(12, 3, rng);
    const double reg = 0.01 * (t + 1);
    const Matrix w = ridge_solve(a, b, reg);
    const Matrix residual = b.transpose() * a - w.transpose() * a.transpose() * a - reg * w.transpose();
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("ridge_solve rejects singular systems") {
  Matrix a(3, 2);
  a << 1, 2, 2, 4, 3, 6;
  CHECK_THROWS_AS(ridge_solve(a, Matrix::Ones(3, 1), 0.0), SingularityError);
  CHECK_NOTHROW(ridge_solve(a, Matrix::Ones(3, 1), 1e-3));
  CHECK_THROWS_AS(ridge_solve(a, Matrix::Ones(2, 1), 0.0), InputDomainError);
  CHECK_THROWS_AS(ridge_solve(a, Matrix::Ones(3, 1), -1.0), InputDomainError);
}

TEST_CASE("scaled_trace_ridge") {
  Matrix g = Matrix::Zero(3, 3);
  g.diagonal() << 2, 4, 6;
  CHECK(scaled_trace_ridge(g, 1e-6) == doctest::Approx(4e-6));
}

namespace {

std::vector<Index> brute_topk(const Matrix& h, Index i, int k) {
  std::vector<std::pair<double, Index>> sims;
  for (Index j = 0; j < h.rows(); ++j) {
    if (j == i) continue;
    double dot = 0, ni = 0, nj = 0;
    for (Index c = 0; c < h.cols(); ++c) {
      dot += h(i, c) * h(j, c);
      ni += h(i, c) * h(i, c);
      nj += h(j, c) * h(j, c);
    }
    sims.emplace_back(-dot / std::sqrt(ni * nj), j);
  }
  std::sort(sims.begin(), sims.end());
  std::vector<Index> out;
  for (int t = 0; t < k; ++t) out.push_back(sims[static_cast<std::size_t>(t)].second);
  return out;
}

}  // namespace

TEST_CASE("pairwise_cosine_topk puts a duplicate row first") {
  Rng rng(4);
  Matrix h = testing::random_matrix(10, 5, rng);
  h.row(6) = h.row(0) * 3.0;
  CHECK(pairwise_cosine_topk(FeatureMatrix(h), 0, 3).front() == 6);
}

TEST_CASE("pairwise_cosine_topk breaks ties toward the lowest index") {
  const Matrix h = Matrix::Identity(5, 5);
  CHECK(pairwise_cosine_topk(FeatureMatrix(h), 0, 1) == std::vector<Index>{1});
  CHECK(pairwise_cosine_topk(FeatureMatrix(h), 3, 2) == std::vector<Index>{0, 1});
}

TEST_CASE("pairwise_cosine_topk matches a brute-force scan") {
  Rng rng(5);
  const Matrix h = testing::random_matrix(50, 8, rng);
  const auto all = cosine_topk_all(FeatureMatrix(h), 6);
  for (Index i = 0; i < 50; ++i) {
    const auto expected = brute_topk(h, i, 6);
    CHECK(pairwise_cosine_topk(FeatureMatrix(h), i, 6) == expected);
    CHECK(all[static_cast<std::size_t>(i)] == expected);
  }
}

TEST_CASE("pairwise_cosine_topk is invariant to positive row scaling") {
  Rng rng(6);
  const Matrix h = testing::random_matrix(40, 6, rng);
  Matrix scaled = h;
  for (Index i = 0; i < h.rows(); ++i) scaled.row(i) *= 0.01 + 100.0 * uniform01(rng);
  CHECK(cosine_topk_all(FeatureMatrix(h), 5) == cosine_topk_all(FeatureMatrix(scaled), 5));
}

TEST_CASE("pairwise_cosine_topk argument checks") {
  const Matrix h = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(pairwise_cosine_topk(FeatureMatrix(h), 0, 0), InputDomainError);
  CHECK_THROWS_AS(pairwise_cosine_topk(FeatureMatrix(h), 0, 4), InputDomainError);
  CHECK_THROWS_AS(pairwise_cosine_topk(FeatureMatrix(h), 4, 1), InputDomainError);
  Matrix z = h;
  z.row(2).setZero();
  CHECK_THROWS_AS(pairwise_cosine_topk(FeatureMatrix(z), 0, 1), InputDomainError);
}

TEST_CASE("softmax_rows") {
  Matrix c = Matrix::Constant(2, 5, 3.7);
  CHECK(testing::max_abs_diff(softmax_rows(c, 0.3), Matrix::Constant(2, 5, 0.2)) < 1e-15);

  Matrix r(1, 2);
  r << 1, 0;
  const Matrix s = softmax_rows(r, 0.01);
  CHECK(std::abs(s(0, 0) - 1.0) < 1e-8);
  CHECK(s(0, 1) < 1e-8);

  Rng rng(7);
  const Matrix m = softmax_rows(testing::random_matrix(30, 9, rng, 20.0), 0.5);
  for (Index i = 0; i < m.rows(); ++i) {
    CHECK(std::abs(m.row(i).sum() - 1.0) < 1e-12);
    CHECK(m.row(i).minCoeff() >= 0.0);
  }
  CHECK_THROWS_AS(softmax_rows(m, 0.0), InputDomainError);
}

TEST_CASE("cross_entropy") {
  const std::vector<double> onehot{0, 1, 0};
  CHECK(cross_entropy(onehot, onehot) <= 1e-11);
  const std::vector<double> uniform(10, 0.1);
  std::vector<double> target(10, 0.0);
  target[3] = 1.0;
  CHECK(cross_entropy(uniform, target) == doctest::Approx(std::log(10.0)).epsilon(1e-14));

  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> p(6), q(6);
    for (auto& x : p) x = uniform01(rng);
    for (auto& x : q) x = uniform01(rng);
    double expected = 0.0;
    for (int j = 0; j < 6; ++j) expected -= q[static_cast<std::size_t>(j)] * std::log(std::max(p[static_cast<std::size_t>(j)], 1e-12));
    CHECK(cross_entropy(p, q) == doctest::Approx(expected).epsilon(1e-13));
  }
  CHECK_THROWS_AS(cross_entropy(uniform, onehot), InputDomainError);
}

TEST_CASE("parallel_for covers every index once and propagates errors") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(100, [](std::size_t, std::size_t) { throw InputDomainError("boom"); }),
                  InputDomainError);
}
