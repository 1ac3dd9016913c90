#include "helpers.hpp"

#include "stct/errors.hpp"
#include "stct/nmc.hpp"
#include "stct/noise.hpp"
#include "stct/numerics.hpp"
#include "stct/selection.hpp"
#include "stct/synthetic.hpp"

#include <algorithm>
#include <cmath>

using namespace stct;
using namespace stct::selection;

TEST_CASE("default k is 40% of the per-class count, clamped") {
  CHECK(default_k(5000, 10) == 200);
  CHECK(default_k(50000, 10) == 2000);
  CHECK(default_k(3, 10) == 1);
  CHECK(default_k(2, 1) == 1);
}

TEST_CASE("mu_hat grows with the epoch and saturates") {
  SelectionConfig c;
  c.mu = 0.3;
  c.epoch = 2;
  CHECK(c.mu_hat() == doctest::Approx(0.6));
  c.epoch = 5;
  CHECK(c.mu_hat() == 1.0);
}

TEST_CASE("knn pseudo labels: unanimous and split neighborhoods") {
  Matrix h(5, 2);
  h << 1, 0, 1, 0.01, 1, 0.02, 0, 1, 0.01, 1;
  const HardLabelVector y({2, 2, 2, 0, 1});
  const auto yp = knn_pseudo_labels(FeatureMatrix(h), y, 2, 3);
  CHECK(yp.data().row(0) == Matrix((Matrix(1, 3) << 0, 0, 1).finished()));
  // Row 3's two neighbors: row 4 (class 1) and row 2 (class 2).
  CHECK(yp.data()(3, 1) == 0.5);
  CHECK(yp.data()(3, 2) == 0.5);
}

TEST_CASE("knn pseudo labels match brute-force neighbor counting") {
  Rng rng(1);
  const Matrix h = testing::random_matrix(60, 8, rng);
  const auto y = testing::random_labels(60, 3, rng);
  const int k = 5;
  const auto yp = knn_pseudo_labels(FeatureMatrix(h), y, k, 3);
  for (Index i = 0; i < 60; ++i) {
    std::vector<std::pair<double, Index>> sims;
    for (Index j = 0; j < 60; ++j) {
      if (j != i) sims.emplace_back(-h.row(i).dot(h.row(j)) / (h.row(i).norm() * h.row(j).norm()), j);
    }
    std::sort(sims.begin(), sims.end());
    std::vector<double> expected(3, 0.0);
    for (int t = 0; t < k; ++t) expected[static_cast<std::size_t>(y[static_cast<std::size_t>(sims[static_cast<std::size_t>(t)].second)])] += 1.0 / k;
    for (int c = 0; c < 3; ++c) {
      CHECK(yp.data()(i, c) == doctest::Approx(expected[static_cast<std::size_t>(c)]).epsilon(1e-15));
      const double scaled = yp.data()(i, c) * k;
      CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
    }
    CHECK(std::abs(yp.data().row(i).sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("select_clean with mu_hat = 1 keeps everything") {
  Rng rng(2);
  const auto y = testing::random_labels(50, 4, rng);
  Matrix p = Matrix::Constant(50, 4, 0.25);
  const auto sel = select_clean(y, PseudoLabelMatrix(p), 1.0, 4);
  std::size_t total = 0;
  for (const auto& s : sel) total += s.size();
  CHECK(total == 50);
}

TEST_CASE("select_clean keeps exactly the agreeing half") {
  const int n = 20;
  std::vector<int> labels(n, 1);
  Matrix p = Matrix::Zero(n, 3);
  for (int i = 0; i < n; ++i) p(i, i % 2 == 0 ? 1 : 2) = 1.0;
  const auto sel = select_clean(HardLabelVector(labels), PseudoLabelMatrix(p), 0.5, 3);
  REQUIRE(sel[1].size() == 10);
  for (Index i : sel[1]) CHECK(i % 2 == 0);
  CHECK(sel[0].empty());
}

TEST_CASE("select_clean matches a brute-force per-class sort") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int classes = 4;
    const auto y = testing::random_labels(80, classes, rng);
    Matrix raw = testing::random_matrix(80, classes, rng).array().exp();
    for (Index i = 0; i < raw.rows(); ++i) raw.row(i) /= raw.row(i).sum();
    const double mu_hat = 0.05 + 0.9 * uniform01(rng);
    const auto sel = select_clean(y, PseudoLabelMatrix(raw), mu_hat, classes);
    for (int c = 0; c < classes; ++c) {
      std::vector<std::pair<double, Index>> items;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == c) items.emplace_back(-std::log(raw(static_cast<Index>(i), c)), static_cast<Index>(i));
      }
      std::sort(items.begin(), items.end());
      const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(mu_hat * items.size() - 1e-12)));
      std::vector<Index> expected;
      for (std::size_t i = 0; i < std::min(keep, items.size()); ++i) expected.push_back(items[i].second);
      std::sort(expected.begin(), expected.end());
      CHECK(sel[static_cast<std::size_t>(c)] == expected);
    }
  }
}

TEST_CASE("select_clean includes every tie at the boundary") {
  std::vector<int> labels(10, 0);
  Matrix p = Matrix::Zero(10, 2);
  p.col(0).setConstant(0.5);
  p.col(1).setConstant(0.5);
  const auto sel = select_clean(HardLabelVector(labels), PseudoLabelMatrix(p), 0.1, 2);
  CHECK(sel[0].size() == 10);
}

TEST_CASE("split_labeled_unlabeled") {
  Rng rng(4);
  const Matrix x = testing::random_matrix(12, 3, rng);
  const auto y = testing::random_labels(12, 2, rng);
  const auto all = split_labeled_unlabeled(x, y, {{0, 1, 2, 3, 4, 5}, {6, 7, 8, 9, 10, 11}});
  CHECK(all.unlabeled.indices.empty());
  CHECK(all.labeled.features.rows() == 12);
  const auto none = split_labeled_unlabeled(x, y, {{}, {}});
  CHECK(none.labeled.indices.empty());
  CHECK(none.unlabeled.features == x);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::vector<Index>> sel(2);
    for (Index i = 0; i < 12; ++i) {
      if (uniform01(rng) < 0.4) sel[static_cast<std::size_t>(uniform_below(rng, 2))].push_back(i);
    }
    const auto s = split_labeled_unlabeled(x, y, sel);
    CHECK(s.labeled.indices.size() + s.unlabeled.indices.size() == 12);
    for (std::size_t k = 0; k < s.labeled.indices.size(); ++k) {
      CHECK(s.labeled.labels[k] == y[static_cast<std::size_t>(s.labeled.indices[k])]);
    }
  }
  CHECK_THROWS_AS(split_labeled_unlabeled(x, y, {{1, 1}}), InputDomainError);
  CHECK_THROWS_AS(split_labeled_unlabeled(x, y, {{12}}), InputDomainError);
}

TEST_CASE("selection precision after NMC at 50% noise") {
  const Dataset d = synthetic::gaussian_mixture(synthetic::standard_benchmark());
  const auto noisy = noise::inject_noise(*d.clean_labels, noise::make_symmetric_T(10, 0.5), 1).labels;
  nmc::NmcConfig cfg;
  cfg.max_rounds = 1;
  const auto corrected = harden(nmc::run_nmc(d.features, one_hot(noisy, 10), cfg).corrected);
  const auto yp = knn_pseudo_labels(d.features, corrected, default_k(d.size(), 10), 10);
  const auto sel = select_clean(corrected, yp, 0.1, 10);
  std::size_t picked = 0, clean = 0;
  for (const auto& s : sel) {
    for (Index i : s) {
      ++picked;
      clean += corrected[static_cast<std::size_t>(i)] == (*d.clean_labels)[static_cast<std::size_t>(i)];
    }
  }
  CHECK(static_cast<double>(clean) / static_cast<double>(picked) >= 0.98);
}
