#include "helpers.hpp"

#include "stct/errors.hpp"
#include "stct/numerics.hpp"
#include "stct/oracle.hpp"
#include "stct/srl.hpp"
#include "stct/synthetic.hpp"

#include <cmath>

using namespace stct;
using namespace stct::srl;

namespace {

SrlBatch random_batch(Rng& rng, int d, int classes, Index nl, Index nu, Index m) {
  SrlBatch b;
  b.labeled = testing::random_matrix(nl, d, rng);
  b.labels = testing::random_labels(static_cast<std::size_t>(nl), classes, rng);
  b.unlabeled_weak = testing::random_matrix(nu, d, rng);
  b.unlabeled_strong = b.unlabeled_weak + 0.3 * testing::random_matrix(nu, d, rng);
  b.anchors = testing::random_matrix(m, d, rng);
  return b;
}

Matrix stack2(const Matrix& a) { return (Matrix(2 * a.rows(), a.cols()) << a, a).finished(); }

}  // namespace

TEST_CASE("weak augmentation") {
  Rng rng(1);
  const Vector x = Vector::Random(6);
  const Vector sd = Vector::Constant(6, 2.0);
  CHECK(augment_weak(x, 0.0, sd, 3) == x);
  CHECK(augment_weak(x, 0.05, sd, 3) == augment_weak(x, 0.05, sd, 3));
  CHECK_FALSE(augment_weak(x, 0.05, sd, 3) == augment_weak(x, 0.05, sd, 4));
  Vector mean = Vector::Zero(6);
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) mean += augment_weak(x, 0.05, sd, static_cast<std::uint64_t>(t));
  mean /= draws;
  const double se = 0.05 * 2.0 / std::sqrt(static_cast<double>(draws));
  for (Index j = 0; j < 6; ++j) CHECK(std::abs(mean(j) - x(j)) <= 3 * se + 1e-15);
}

TEST_CASE("strong augmentation") {
  const Vector x = Vector::LinSpaced(1000, 1.0, 2.0);
  const Vector sd = Vector::Ones(1000);
  CHECK(augment_strong(x, 0.0, 0.0, sd, 1) == x);
  CHECK(augment_strong(x, 0.2, 0.1, sd, 9) == augment_strong(x, 0.2, 0.1, sd, 9));
  const Vector y = augment_strong(x, 0.0, 0.1, sd, 12);
  int zeros = 0;
  for (Index j = 0; j < y.size(); ++j) zeros += y(j) == 0.0;
  CHECK(zeros >= 70);
  CHECK(zeros <= 130);
}

TEST_CASE("labeled loss") {
  const HardLabelVector y({0, 2});
  Matrix perfect = Matrix::Zero(2, 3);
  perfect(0, 0) = perfect(1, 2) = 1.0;
  CHECK(loss_labeled(perfect, y) <= 1e-11);
  CHECK(loss_labeled(Matrix::Constant(4, 10, 0.1), HardLabelVector({1, 3, 5, 9})) ==
        doctest::Approx(std::log(10.0)).epsilon(1e-14));
  Rng rng(2);
  const Matrix p = numerics::softmax_rows(testing::random_matrix(8, 3, rng));
  const auto yy = testing::random_labels(8, 3, rng);
  double s = 0;
  for (Index i = 0; i < 8; ++i) s -= std::log(p(i, yy[static_cast<std::size_t>(i)]));
  CHECK(loss_labeled(p, yy) == doctest::Approx(s / 8).epsilon(1e-14));
}

TEST_CASE("unlabeled loss gating") {
  Rng rng(3);
  const Matrix pw = numerics::softmax_rows(testing::random_matrix(10, 4, rng, 0.1));
  const Matrix ps = numerics::softmax_rows(testing::random_matrix(10, 4, rng));
  CHECK(loss_unlabeled(pw, ps, 0.95) == 0.0);

  Matrix onehot = Matrix::Zero(3, 3);
  onehot(0, 1) = onehot(1, 0) = onehot(2, 2) = 1.0;
  CHECK(loss_unlabeled(onehot, onehot, 0.95) <= 1e-11);

  const Matrix confident = numerics::softmax_rows(testing::random_matrix(10, 4, rng, 10.0));
  for (bool hard : {false, true}) {
    double s = 0;
    for (Index i = 0; i < 10; ++i) {
      Index arg = 0;
      const double m = confident.row(i).maxCoeff(&arg);
      if (!(m > 0.6)) continue;
      for (Index c = 0; c < 4; ++c) {
        const double target = hard ? (c == arg ? 1.0 : 0.0) : confident(i, c);
        s -= target * std::log(ps(i, c));
      }
    }
    CHECK(loss_unlabeled(confident, ps, 0.6, hard) == doctest::Approx(s / 10).epsilon(1e-13));
  }

  double last = loss_unlabeled(confident, ps, 0.0);
  for (double lambda = 0.05; lambda < 1.0; lambda += 0.05) {
    const double cur = loss_unlabeled(confident, ps, lambda);
    CHECK(cur <= last);
    last = cur;
  }
}

TEST_CASE("instance similarity") {
  Matrix anchors = Matrix::Zero(4, 5);
  for (Index m = 0; m < 4; ++m) anchors(m, m) = 1.0;
  Vector z = Vector::Zero(5);
  z(4) = 1.0;
  const Vector u = instance_similarity(anchors, z, 0.1);
  for (Index m = 0; m < 4; ++m) CHECK(u(m) == doctest::Approx(0.25).epsilon(1e-15));

  const Vector e0 = anchors.row(0).transpose();
  const Vector peaked = instance_similarity(anchors, e0, 0.05);
  CHECK(std::abs(peaked(0) - 1.0) <= 1e-6);

  Rng rng(4);
  Matrix a = testing::random_matrix(7, 3, rng);
  for (Index i = 0; i < 7; ++i) a.row(i).normalize();
  Matrix zs = testing::random_matrix(5, 3, rng);
  for (Index i = 0; i < 5; ++i) zs.row(i).normalize();
  const Matrix s = instance_similarity_rows(a, zs, 0.2);
  for (Index i = 0; i < 5; ++i) {
    CHECK(std::abs(s.row(i).sum() - 1.0) <= 1e-12);
    double denom = 0;
    for (Index m = 0; m < 7; ++m) denom += std::exp(a.row(m).dot(zs.row(i)) / 0.2);
    for (Index m = 0; m < 7; ++m) CHECK(s(i, m) == doctest::Approx(std::exp(a.row(m).dot(zs.row(i)) / 0.2) / denom).epsilon(1e-13));
  }
  CHECK_THROWS_AS(instance_similarity(a, Vector::Ones(3), 0.2), InputDomainError);
}

TEST_CASE("consistency loss") {
  const Matrix onehot = Matrix::Identity(3, 3);
  CHECK(loss_consistency(onehot, onehot) <= 1e-11);
  Matrix target = Matrix::Zero(2, 16);
  target(0, 3) = target(1, 7) = 1.0;
  CHECK(loss_consistency(Matrix::Constant(2, 16, 1.0 / 16), target) == doctest::Approx(std::log(16.0)).epsilon(1e-14));
}

TEST_CASE("total loss conventions") {
  Rng rng(5);
  SrlModel model = SrlModel::create({6, 5, 4}, 3, 4, 1);
  SrlConfig cfg;
  cfg.lambda = 0.3;
  SrlBatch b = random_batch(rng, 6, 3, 5, 7, 4);

  SrlBatch labeled_only = b;
  labeled_only.unlabeled_weak.resize(0, 6);
  labeled_only.unlabeled_strong.resize(0, 6);
  const auto lb = srl_total_loss(model, labeled_only, cfg);
  CHECK(lb.total == doctest::Approx(loss_labeled(model.predict_proba(b.labeled), b.labels)).epsilon(1e-14));
  CHECK(lb.unlabeled == 0.0);
  CHECK(lb.consistency == 0.0);

  const auto full = srl_total_loss(model, b, cfg);
  SrlBatch doubled = b;
  doubled.labeled = stack2(b.labeled);
  std::vector<int> ys = b.labels.values();
  ys.insert(ys.end(), b.labels.begin(), b.labels.end());
  doubled.labels = HardLabelVector(ys);
  doubled.unlabeled_weak = stack2(b.unlabeled_weak);
  doubled.unlabeled_strong = stack2(b.unlabeled_strong);
  CHECK(srl_total_loss(model, doubled, cfg).total == doctest::Approx(full.total).epsilon(1e-12));
  CHECK(full.total == doctest::Approx(oracle::naive_srl_loss(model, b, cfg)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(6);
  for (const bool detach : {true, false}) {
    for (const bool hard : {false, true}) {
      SrlModel model = SrlModel::create({6, 5, 4}, 3, 4, 7);
      for (auto& t : model.params().tensors) t *= 2.5;
      const SrlBatch b = random_batch(rng, 6, 3, 5, 6, 4);
      SrlConfig cfg;
      cfg.tau = 0.5;
      cfg.detach_targets = detach;
      cfg.hard_targets = hard;
      cfg.lambda = 1e-6;
      const auto analytic = srl_total_loss(model, b, cfg).gradients.flatten();
      const auto fd = oracle::fd_srl_gradient(model, b, cfg, 1e-5);
      CHECK(oracle::relative_error(fd, analytic) <= 1e-5);
    }
  }
}

TEST_CASE("projections are unit norm and predictions row-stochastic") {
  Rng rng(7);
  SrlModel model = SrlModel::create({5, 8, 6}, 4, 3, 2);
  const Matrix x = testing::random_matrix(30, 5, rng, 4.0);
  model.fit_standardizer(x);
  const Matrix z = model.project(x);
  for (Index i = 0; i < z.rows(); ++i) CHECK(std::abs(z.row(i).norm() - 1.0) <= 1e-12);
  const Matrix p = predict(model, x);
  for (Index i = 0; i < p.rows(); ++i) CHECK(std::abs(p.row(i).sum() - 1.0) <= 1e-12);
  CHECK(predict(model, x) == p);
  CHECK(harden(p) == harden(oracle::naive_srl_forward(model, x).proba));
}

TEST_CASE("parameter flatten/assign round trip") {
  SrlModel model = SrlModel::create({4, 3}, 2, 2, 5);
  auto flat = model.params().flatten();
  CHECK(flat.size() == model.params().scalar_count());
  CHECK(flat.size() == 4u * 3 + 3 + 3 * 2 + 2 + 3 * 2 + 2);
  for (auto& v : flat) v += 1.0;
  model.params().assign(flat);
  CHECK(model.params().flatten() == flat);
  CHECK_THROWS_AS(model.params().assign(std::vector<double>(3)), InputDomainError);
  const auto names = model.tensor_names();
  CHECK(names.front() == "enc0.w");
  CHECK(names.back() == "proj.b");
}

TEST_CASE("train_srl guards and trivial cases") {
  Rng rng(8);
  const Matrix x = testing::random_matrix(40, 4, rng);
  const auto y = testing::random_labels(40, 2, rng);
  SrlModel model = SrlModel::create({4, 6}, 2, 3, 1);
  model.fit_standardizer(x);
  SrlConfig cfg;
  cfg.epochs = 2;
  cfg.use_labeled_loss = false;
  CHECK_THROWS_AS(train_srl(model, x, y, x, cfg), NonConvergenceError);
  cfg.use_labeled_loss = true;
  CHECK_THROWS_AS(train_srl(model, Matrix(0, 4), HardLabelVector(), x, cfg), NonConvergenceError);

  cfg.lr = 0.0;
  const auto frozen = train_srl(model, x, y, x, cfg);
  CHECK(frozen.model.params().flatten() == model.params().flatten());
  CHECK(frozen.metrics.size() == 2);
}

TEST_CASE("train_srl learns a separable mixture from clean labels") {
  synthetic::MixtureSpec spec = synthetic::standard_benchmark();
  spec.n = 2000;
  const Dataset train = synthetic::gaussian_mixture(spec);
  const Dataset test = synthetic::sample_mixture(spec, 1000, 99);
  SrlModel model = SrlModel::create({32, 64, 32}, 10, 16, 3);
  model.fit_standardizer(train.features.data());
  SrlConfig cfg;
  cfg.epochs = 50;
  cfg.use_unlabeled_loss = cfg.use_consistency_loss = false;
  const auto res = train_srl(model, train.features.data(), *train.clean_labels, Matrix(0, 32), cfg);
  CHECK(accuracy(predict(res.model, test.features.data()), *test.clean_labels) >= 0.95);
}

TEST_CASE("SrlConfig validation") {
  SrlConfig c;
  CHECK_NOTHROW(c.validate());
  c.tau = 0.0;
  CHECK_THROWS_AS(c.validate(), InputDomainError);
  c = SrlConfig{};
  c.drop_p = 1.0;
  CHECK_THROWS_AS(c.validate(), InputDomainError);
  c = SrlConfig{};
  c.anchors = 0;
  CHECK_THROWS_AS(c.validate(), InputDomainError);
}
