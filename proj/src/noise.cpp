#include "stct/noise.hpp"

#include "stct/errors.hpp"
#include "stct/random.hpp"

#include <cmath>
#include <string>

namespace stct::noise {

NoiseTransitionMatrix::NoiseTransitionMatrix(Matrix t) : t_(std::move(t)) {
  if (t_.rows() != t_.cols() || t_.rows() < 1) {
    throw InputDomainError("transition matrix must be square and nonempty");
  }
  for (Index i = 0; i < t_.rows(); ++i) {
    double sum = 0.0;
    for (Index j = 0; j < t_.cols(); ++j) {
      const double v = t_(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InputDomainError("transition matrix entry (" + std::to_string(i) + "," +
                               std::to_string(j) + ") is outside [0,1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw InputDomainError("transition matrix row " + std::to_string(i) + " sums to " +
                             std::to_string(sum));
    }
  }
}

std::vector<int> NoiseTransitionMatrix::dominance_violations() const {
  std::vector<int> bad;
  for (Index i = 0; i < t_.rows(); ++i) {
    for (Index j = 0; j < t_.cols(); ++j) {
      if (j != i && !(t_(i, i) > t_(i, j))) {
        bad.push_back(static_cast<int>(i));
        break;
      }
    }
  }
  return bad;
}

bool NoiseTransitionMatrix::diagonally_dominant() const { return dominance_violations().empty(); }

ClassPrior::ClassPrior(Vector p) : p_(std::move(p)) {
  if (p_.size() < 1) throw InputDomainError("class prior must be nonempty");
  if ((p_.array() < 0.0).any() || std::abs(p_.sum() - 1.0) > 1e-12) {
    throw InputDomainError("class prior must be nonnegative and sum to 1");
  }
}

ClassPrior ClassPrior::uniform(int classes) {
  return ClassPrior(Vector::Constant(classes, 1.0 / classes));
}

NoiseTransitionMatrix make_symmetric_T(int classes, double rho, SymmetricConvention convention) {
  if (classes < 2) throw InputDomainError("symmetric noise needs at least two classes");
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw InputDomainError("noise rate " + std::to_string(rho) + " is outside [0,1]");
  }
  const double c = classes;
  double diag = 0.0;
  double off = 0.0;
  if (convention == SymmetricConvention::IncludeSelf) {
    diag = (1.0 - rho) + rho / c;
    off = rho / c;
  } else {
    diag = 1.0 - rho;
    off = rho / (c - 1.0);
  }
  Matrix t = Matrix::Constant(classes, classes, off);
  t.diagonal().setConstant(diag);
  return NoiseTransitionMatrix(std::move(t));
}

NoiseTransitionMatrix make_asymmetric_T(int classes, double rho, const std::map<int, int>& flip_map) {
  if (classes < 2) throw InputDomainError("asymmetric noise needs at least two classes");
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw InputDomainError("noise rate " + std::to_string(rho) + " is outside [0,1]");
  }
  Matrix t = Matrix::Identity(classes, classes);
  for (const auto& [from, to] : flip_map) {
    if (from < 0 || from >= classes || to < 0 || to >= classes) {
      throw InputDomainError("flip map entry " + std::to_string(from) + "->" +
                             std::to_string(to) + " is out of range");
    }
    if (from == to) {
      throw InputDomainError("flip map sends class " + std::to_string(from) + " to itself");
    }
    t(from, from) = 1.0 - rho;
    t(from, to) = rho;
  }
  return NoiseTransitionMatrix(std::move(t));
}

std::map<int, int> cyclic_flip_map(int classes) {
  std::map<int, int> m;
  for (int i = 0; i < classes; ++i) m[i] = (i + 1) % classes;
  return m;
}

NoisyLabels inject_noise(const HardLabelVector& clean, const NoiseTransitionMatrix& t,
                         std::uint64_t seed) {
  const int c = t.classes();
  Rng rng(seed);
  std::vector<int> out(clean.size());
  std::vector<bool> mask(clean.size(), false);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const int y = clean[i];
    if (y < 0 || y >= c) {
      throw InputDomainError("inject_noise: label " + std::to_string(y) + " at position " +
                             std::to_string(i) + " is outside [0, " + std::to_string(c) + ")");
    }
    const double u = uniform01(rng);
    double acc = 0.0;
    int drawn = c - 1;
    for (int j = 0; j < c; ++j) {
      acc += t(y, j);
      if (u < acc) {
        drawn = j;
        break;
      }
    }
    // Guard against rows whose float sum lands a hair under 1.
    while (t(y, drawn) == 0.0 && drawn > 0) --drawn;
    out[i] = drawn;
    mask[i] = drawn != y;
  }
  return {HardLabelVector(std::move(out)), std::move(mask)};
}

double theorem1_noisy_accuracy(const ClassPrior& prior, const NoiseTransitionMatrix& t) {
  if (prior.classes() != t.classes()) {
    throw InputDomainError("prior and transition matrix disagree on class count");
  }
  double s = 0.0;
  for (int i = 0; i < t.classes(); ++i) s += prior.probabilities()(i) * t(i, i);
  return s;
}

bool ConfusionMatrix::all_defined() const {
  for (bool d : defined) {
    if (!d) return false;
  }
  return true;
}

ConfusionMatrix confusion_matrix(const HardLabelVector& pred, const HardLabelVector& truth,
                                 int classes) {
  if (pred.size() != truth.size()) throw InputDomainError("confusion_matrix: length mismatch");
  Matrix counts = Matrix::Zero(classes, classes);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= classes || truth[i] < 0 || truth[i] >= classes) {
      throw InputDomainError("confusion_matrix: label out of range at position " +
                             std::to_string(i));
    }
    counts(truth[i], pred[i]) += 1.0;
  }
  ConfusionMatrix out{Matrix::Zero(classes, classes), std::vector<bool>(classes, false)};
  for (int i = 0; i < classes; ++i) {
    const double total = counts.row(i).sum();
    if (total > 0.0) {
      out.rates.row(i) = counts.row(i) / total;
      out.defined[i] = true;
    }
  }
  return out;
}

double hoeffding_bound(long long n_v, double eps) {
  if (n_v < 1) throw InputDomainError("hoeffding_bound: n_v must be at least 1");
  if (!(eps > 0.0)) throw InputDomainError("hoeffding_bound: eps must be positive");
  return 2.0 * std::exp(-2.0 * static_cast<double>(n_v) * eps * eps);
}

}  // namespace stct::noise
