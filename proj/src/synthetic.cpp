#include "stct/synthetic.hpp"

#include "stct/errors.hpp"
#include "stct/numerics.hpp"
#include "stct/random.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace stct::synthetic {

void MixtureSpec::validate() const {
  if (classes < 2) throw InputDomainError("mixture: need at least two classes");
  if (n < 1 || dim < 1) throw InputDomainError("mixture: n and dim must be positive");
  if (!(sep >= 0.0)) throw InputDomainError("mixture: sep must be >= 0");
  if (!balance.empty()) {
    if (static_cast<int>(balance.size()) != classes) {
      throw InputDomainError("mixture: balance has " + std::to_string(balance.size()) +
                             " entries for " + std::to_string(classes) + " classes");
    }
    double s = 0.0;
    for (double b : balance) {
      if (!(b >= 0.0)) throw InputDomainError("mixture: balance entries must be >= 0");
      s += b;
    }
    if (std::abs(s - 1.0) > 1e-12) throw InputDomainError("mixture: balance must sum to 1");
  }
  if (placement == CenterPlacement::Orthogonal && classes > dim) {
    throw InputDomainError("mixture: orthogonal placement needs classes <= dim (" +
                           std::to_string(classes) + " > " + std::to_string(dim) + ")");
  }
}

std::vector<double> MixtureSpec::proportions() const {
  if (!balance.empty()) return balance;
  return std::vector<double>(static_cast<std::size_t>(classes), 1.0 / classes);
}

MixtureSpec standard_benchmark() { return MixtureSpec{}; }

Matrix mixture_centers(const MixtureSpec& spec) {
  spec.validate();
  Matrix centers = Matrix::Zero(spec.classes, spec.dim);
  if (spec.placement == CenterPlacement::Orthogonal) {
    for (int c = 0; c < spec.classes; ++c) centers(c, c) = spec.sep;
    return centers;
  }
  Rng rng(derive_seed(spec.seed, 0xC3));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(spec.dim, spec.classes);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  if (spec.classes <= spec.dim) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(spec.dim, spec.classes);
    centers = spec.sep * q.transpose();
  } else {
    for (int c = 0; c < spec.classes; ++c) centers.row(c) = spec.sep * g.col(c).normalized().transpose();
  }
  return centers;
}

Dataset sample_mixture(const MixtureSpec& spec, Index n, std::uint64_t sample_seed) {
  const Matrix centers = mixture_centers(spec);
  const std::vector<double> props = spec.proportions();
  Rng rng(sample_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, spec.dim);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    double acc = 0.0;
    int c = spec.classes - 1;
    for (int k = 0; k < spec.classes; ++k) {
      acc += props[static_cast<std::size_t>(k)];
      if (u < acc) {
        c = k;
        break;
      }
    }
    while (props[static_cast<std::size_t>(c)] == 0.0 && c > 0) --c;
    y[static_cast<std::size_t>(i)] = c;
    for (int j = 0; j < spec.dim; ++j) x(i, j) = centers(c, j) + normal(rng);
  }
  HardLabelVector labels(std::move(y));
  Dataset d;
  d.features = FeatureMatrix(std::move(x));
  d.labels = one_hot(labels, spec.classes);
  d.clean_labels = std::move(labels);
  return d;
}

Dataset gaussian_mixture(const MixtureSpec& spec) {
  spec.validate();
  return sample_mixture(spec, spec.n, derive_seed(spec.seed, 1));
}

bool MarginReport::all_positive() const {
  for (double m : min_margin) {
    if (!(m > 0.0)) return false;
  }
  return true;
}

MarginReport margin_report(const Dataset& dataset) {
  if (!dataset.clean_labels) throw InputDomainError("margin_report: clean labels are required");
  const HardLabelVector& y = *dataset.clean_labels;
  const int classes = std::max<int>(y.inferred_classes(), static_cast<int>(dataset.labels.classes()));
  const Matrix& x = dataset.features.data();
  Matrix design(x.rows(), x.cols() + 1);
  design << x, Matrix::Ones(x.rows(), 1);
  Matrix targets = Matrix::Constant(x.rows(), classes, -1.0);
  for (std::size_t i = 0; i < y.size(); ++i) targets(static_cast<Index>(i), y[i]) = 1.0;
  const Matrix w = numerics::ridge_solve(design, targets, 1e-9 * static_cast<double>(x.rows()));
  const Matrix scores = design * w;
  MarginReport report;
  report.min_margin.assign(static_cast<std::size_t>(classes), std::numeric_limits<double>::infinity());
  std::vector<bool> present(static_cast<std::size_t>(classes), false);
  for (std::size_t i = 0; i < y.size(); ++i) present[static_cast<std::size_t>(y[i])] = true;
  for (int c = 0; c < classes; ++c) {
    if (!present[static_cast<std::size_t>(c)]) {
      report.min_margin[static_cast<std::size_t>(c)] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    // The LS fit targets ±1, so the decision threshold sits at 0.
    double worst = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < x.rows(); ++i) worst = std::min(worst, targets(i, c) * scores(i, c));
    report.min_margin[static_cast<std::size_t>(c)] = worst;
  }
  return report;
}

}  // namespace stct::synthetic
